#include "qkdsim/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qkd {

void ReconcileConfig::validate() const {
  if (block_len && *block_len < 2) throw std::invalid_argument("block length must be at least 2");
  if (step1_rounds < 0) throw std::invalid_argument("step1_rounds must be nonnegative");
  if (step2_stop_n < 1) throw std::invalid_argument("step2_stop_n must be at least 1");
}

int choose_block_len(double error_rate) {
  if (!(error_rate > 0.0 && error_rate < 0.5))
    throw std::invalid_argument("block length rule needs 0 < R < 0.5");
  const long raw = std::lround(0.73 / error_rate);
  return static_cast<int>(std::min(64L, std::max(2L, raw)));
}

namespace {

struct WorkingKeys {
  // Parallel arrays in current (permuted) order.
  std::vector<std::uint32_t> slots;
  std::vector<std::uint8_t> alice;
  std::vector<std::uint8_t> bob;

  std::size_t size() const { return slots.size(); }
};

int parity_of(const std::vector<std::uint8_t>& bits, const std::vector<std::size_t>& idx) {
  int p = 0;
  for (const auto i : idx) p ^= bits[i];
  return p;
}

struct ReconcileSession {
  WorkingKeys keys;
  PublicTranscript& transcript;
  ReconcileStats stats;
  int leaked = 0;
  std::set<std::uint32_t> removal_slots;  // discards and deletions of the current sweep

  explicit ReconcileSession(PublicTranscript& t) : transcript(t) {}

  // Publishes the parities of the positions `idx` (current order), schedules
  // the rightmost position for discard, and reports whether they disagree.
  bool compare(const std::vector<std::size_t>& idx, const char* phase, nlohmann::json where) {
    const int pa = parity_of(keys.alice, idx);
    const int pb = parity_of(keys.bob, idx);
    const std::uint32_t discard_slot = keys.slots[idx.back()];
    where["n"] = idx.size();
    where["parity_alice"] = pa;
    where["parity_bob"] = pb;
    where["discard_slot"] = discard_slot;
    transcript.publish(TranscriptRecord::Sender::Alice, phase, std::move(where));
    ++stats.parity_comparisons;
    ++leaked;
    removal_slots.insert(discard_slot);
    return pa != pb;
  }

  // Bisective search inside a range with mismatched parities: compare the
  // left half, recurse into the disagreeing side, delete the located error.
  void locate_and_delete(std::vector<std::size_t> range, const nlohmann::json& where) {
    while (range.size() > 1) {
      const std::size_t half = (range.size() + 1) / 2;
      std::vector<std::size_t> left(range.begin(), range.begin() + half);
      const bool left_mismatch = compare(left, "reconcile:subblock", where);
      if (left_mismatch)
        range = std::move(left);
      else
        range.erase(range.begin(), range.begin() + half);
    }
    const std::uint32_t slot = keys.slots[range.front()];
    nlohmann::json payload = where;
    payload["slot"] = slot;
    transcript.publish(TranscriptRecord::Sender::Bob, "reconcile:delete", std::move(payload));
    removal_slots.insert(slot);
    ++stats.errors_deleted;
  }

  void apply_removals() {
    if (removal_slots.empty()) return;
    WorkingKeys next;
    next.slots.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (removal_slots.count(keys.slots[i])) continue;
      next.slots.push_back(keys.slots[i]);
      next.alice.push_back(keys.alice[i]);
      next.bob.push_back(keys.bob[i]);
    }
    stats.bits_removed += static_cast<int>(keys.size() - next.size());
    keys = std::move(next);
    removal_slots.clear();
  }

  void permute(std::uint64_t seed) {
    SeededRng perm_rng(seed);
    for (std::size_t i = keys.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(perm_rng.next_below(i));
      std::swap(keys.slots[i - 1], keys.slots[j]);
      std::swap(keys.alice[i - 1], keys.alice[j]);
      std::swap(keys.bob[i - 1], keys.bob[j]);
    }
  }
};

}  // namespace

ReconcileResult reconcile(const KeyMaterial& alice, const KeyMaterial& bob,
                          const ReconcileConfig& cfg, PublicTranscript& transcript) {
  cfg.validate();
  if (alice.size() != bob.size())
    throw std::invalid_argument("reconciliation needs equal-length keys");
  if (alice.stage != KeyStage::Estimated || bob.stage != KeyStage::Estimated)
    throw std::invalid_argument("reconciliation expects keys after error estimation");

  int block_len;
  if (cfg.block_len) {
    block_len = *cfg.block_len;
  } else if (cfg.error_rate_hint && *cfg.error_rate_hint > 0.0) {
    block_len = choose_block_len(*cfg.error_rate_hint);
  } else {
    // No observed errors: the widest blocks still sweep the key for
    // discrepancies the estimate missed.
    block_len = 64;
  }

  ReconcileSession session(transcript);
  session.keys.slots = alice.slots;
  session.keys.alice = alice.bits;
  session.keys.bob = bob.bits;

  SeededRng coin(cfg.rng_seed);

  // Step 1: permuted block-parity passes.
  for (int round = 0; round < cfg.step1_rounds; ++round) {
    const std::uint64_t perm_seed = coin.next_u64();
    transcript.publish(TranscriptRecord::Sender::Alice, "reconcile:permutation",
                       {{"round", round}, {"seed", perm_seed}, {"block_len", block_len}});
    session.permute(perm_seed);
    int block_index = 0;
    for (std::size_t start = 0; start < session.keys.size();
         start += static_cast<std::size_t>(block_len)) {
      const std::size_t stop = std::min(session.keys.size(), start + block_len);
      std::vector<std::size_t> block(stop - start);
      for (std::size_t i = start; i < stop; ++i) block[i - start] = i;
      const nlohmann::json where{{"round", round}, {"block", block_index++}};
      if (session.compare(block, "reconcile:block", where))
        session.locate_and_delete(block, where);
    }
    session.apply_removals();
    if (session.keys.size() == 0) break;
  }

  // Step 2: random-subset probes until step2_stop_n consecutive clean ones.
  int clean_streak = 0;
  while (clean_streak < cfg.step2_stop_n && session.keys.size() > 0) {
    const std::uint64_t subset_seed = coin.next_u64();
    SeededRng subset_rng(subset_seed);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < session.keys.size(); ++i)
      if (subset_rng.next_bit()) subset.push_back(i);
    if (subset.empty()) continue;
    transcript.publish(TranscriptRecord::Sender::Bob, "reconcile:subset",
                       {{"seed", subset_seed}, {"n", subset.size()}});
    const nlohmann::json where{{"probe", session.stats.step2_probes}};
    ++session.stats.step2_probes;
    if (session.compare(subset, "reconcile:probe", where)) {
      session.locate_and_delete(subset, where);
      clean_streak = 0;
    } else {
      ++clean_streak;
    }
    session.apply_removals();
  }

  ReconcileResult result;
  result.stats = session.stats;
  if (session.keys.size() == 0) {
    result.stats.aborted = "key exhausted during reconciliation";
    return result;
  }

  // Restore slot order; the parties' keys stay position-aligned either way.
  std::vector<std::size_t> order(session.keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&session](std::size_t a, std::size_t b) {
    return session.keys.slots[a] < session.keys.slots[b];
  });
  auto rebuild = [&](const std::vector<std::uint8_t>& bits, const KeyMaterial& from) {
    KeyMaterial k;
    k.stage = KeyStage::Reconciled;
    k.leaked_parities = from.leaked_parities + session.leaked;
    k.bits.reserve(order.size());
    k.slots.reserve(order.size());
    for (const auto i : order) {
      k.bits.push_back(bits[i]);
      k.slots.push_back(session.keys.slots[i]);
    }
    return k;
  };
  result.alice = rebuild(session.keys.alice, alice);
  result.bob = rebuild(session.keys.bob, bob);
  return result;
}

int reconcile_removals_from_transcript(const PublicTranscript& transcript) {
  std::set<std::uint64_t> removed;
  for (const auto& rec : transcript.records()) {
    if (rec.phase == "reconcile:block" || rec.phase == "reconcile:subblock" ||
        rec.phase == "reconcile:probe")
      removed.insert(rec.payload.at("discard_slot").get<std::uint64_t>());
    else if (rec.phase == "reconcile:delete")
      removed.insert(rec.payload.at("slot").get<std::uint64_t>());
  }
  return static_cast<int>(removed.size());
}

void AmplifyConfig::validate() const {
  if (s < 1) throw std::invalid_argument("security parameter must be at least 1");
}

int estimate_eve_knowledge(double error_rate, int n) {
  if (!(error_rate >= 0.0 && error_rate < 0.5))
    throw std::invalid_argument("eve-knowledge rule needs 0 <= R < 0.5");
  const long k = static_cast<long>(std::ceil(2.0 * error_rate * n));
  return static_cast<int>(std::min<long>(n, std::max<long>(0, k)));
}

std::vector<std::vector<std::uint64_t>> expand_amplify_masks(std::uint64_t seed, std::size_t n_bits,
                                                             std::size_t n_subsets) {
  if (n_bits == 0 && n_subsets > 0)
    throw std::invalid_argument("cannot draw nonempty subsets of an empty key");
  SeededRng rng(seed);
  const std::size_t words = (n_bits + 63) / 64;
  std::vector<std::vector<std::uint64_t>> masks;
  masks.reserve(n_subsets);
  while (masks.size() < n_subsets) {
    std::vector<std::uint64_t> mask(words, 0);
    bool nonempty = false;
    for (std::size_t i = 0; i < n_bits; ++i) {
      if (rng.next_bit()) {
        mask[i / 64] |= (1ULL << (i % 64));
        nonempty = true;
      }
    }
    if (nonempty) masks.push_back(std::move(mask));  // empty subsets are redrawn
  }
  return masks;
}

int subset_parity(const std::vector<std::uint8_t>& bits, const std::vector<std::uint64_t>& mask) {
  int p = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i] && (mask[i / 64] >> (i % 64)) & 1ULL) p ^= 1;
  return p;
}

AmplifyResult privacy_amplify(const KeyMaterial& key, const AmplifyConfig& cfg, double error_rate,
                              PublicTranscript& transcript) {
  cfg.validate();
  if (key.stage != KeyStage::Reconciled)
    throw std::invalid_argument("privacy amplification expects a reconciled key");
  const int n = static_cast<int>(key.size());
  const int k = cfg.k_override ? *cfg.k_override : estimate_eve_knowledge(error_rate, n);
  if (k < 0 || k > n) throw std::invalid_argument("eve-knowledge bound must lie in [0, n]");

  AmplifyResult result;
  result.k_used = k;
  const int out_len = n - k - cfg.s;
  if (out_len < 1) {
    result.aborted = "key exhausted by privacy amplification";
    return result;
  }

  // The subset choices are public; their parities are the final key and stay
  // private. Publishing the selection seed publishes every index set.
  const std::uint64_t mask_seed = cfg.rng_seed;
  transcript.publish(TranscriptRecord::Sender::Alice, "amplify:subsets",
                     {{"seed", mask_seed}, {"count", out_len}, {"n", n}, {"k", k}, {"s", cfg.s}});
  result.masks = expand_amplify_masks(mask_seed, static_cast<std::size_t>(n),
                                      static_cast<std::size_t>(out_len));

  result.key.stage = KeyStage::Final;
  result.key.leaked_parities = key.leaked_parities;
  result.key.bits.reserve(out_len);
  for (const auto& mask : result.masks)
    result.key.bits.push_back(static_cast<std::uint8_t>(subset_parity(key.bits, mask)));
  return result;
}

}  // namespace qkd
