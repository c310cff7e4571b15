#include "qkdsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkd {

std::string outcome_label(BobOutcome o) {
  switch (o) {
    case BobOutcome::Bit0:
      return "0";
    case BobOutcome::Bit1:
      return "1";
    case BobOutcome::Erasure:
      return "erasure";
    case BobOutcome::NoReception:
      return "no-reception";
  }
  return "?";
}

void write_records_csv(std::ostream& out, const std::vector<TransmissionRecord>& records) {
  out << "slot,alice_bit,alice_alphabet,eve_action,bob_strategy,bob_outcome\n";
  for (const auto& r : records) {
    out << r.slot << ',' << r.alice_bit << ',' << r.alice_alphabet << ',' << r.eve_action << ','
        << r.bob_strategy << ',' << outcome_label(r.outcome) << '\n';
  }
}

std::string stage_label(KeyStage s) {
  switch (s) {
    case KeyStage::Raw:
      return "raw";
    case KeyStage::Estimated:
      return "estimated";
    case KeyStage::Reconciled:
      return "reconciled";
    case KeyStage::Final:
      return "final";
  }
  return "?";
}

nlohmann::json SessionReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["protocol"] = protocol;
  j["eve"] = eve;
  j["n_sent"] = n_sent;
  j["n_received"] = n_received;
  auto put = [&j](const char* key, const auto& opt) {
    if (opt)
      j[key] = *opt;
    else
      j[key] = nullptr;
  };
  put("pre_sift_accuracy", pre_sift_accuracy);
  put("raw_error_rate_estimate", raw_error_rate_estimate);
  put("erasure_rate", erasure_rate);
  put("bell_beta", bell_beta);
  put("bell_beta_se", bell_beta_se);
  put("eve_detected", eve_detected);
  put("p_false", p_false);
  put("raw_key_length", raw_key_length);
  put("final_key_length", final_key_length);
  j["leaked_parities"] = leaked_parities;
  put("keys_agree", keys_agree);
  put("eve_prediction_rate", eve_prediction_rate);
  put("k_model_mismatched", k_model_mismatched);
  put("aborted", aborted);
  return j;
}

EprSource EprSource::standard() {
  constexpr double kPi = 3.14159265358979323846;
  EprSource src;
  for (int j = 0; j < 3; ++j) {
    const double a = j * kPi / 6.0;
    const double b = a + kPi / 2.0;
    const Ket4 left = tensor(linear(a), linear(b));
    const Ket4 right = tensor(linear(b), linear(a));
    Ket4 omega;
    for (int i = 0; i < 4; ++i) omega.amp[i] = (left.amp[i] - right.amp[i]) / std::sqrt(2.0);
    src.states[j] = omega;
  }
  return src;
}

// --- stage 1 -----------------------------------------------------------------

std::vector<TransmissionRecord> bb84_stage1(int n, const QuantumChannelConfig& channel,
                                            EveStrategy& eve, SeededRng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one slot");
  channel.validate();
  EveStrategy::Context ctx;
  ctx.protocol = EveStrategy::Context::Protocol::BB84;
  eve.set_context(ctx);
  // Channel and eavesdropper draws live on their own stream so the channel
  // seed participates in the replay key.
  SeededRng channel_rng = rng.fork(channel.rng_seed);

  std::vector<TransmissionRecord> records;
  records.reserve(n);
  for (int slot = 0; slot < n; ++slot) {
    TransmissionRecord rec;
    rec.slot = slot;
    rec.alice_bit = rng.next_bit();
    const QuantumAlphabet alice_alphabet =
        rng.next_bit() == 0 ? circular_alphabet() : linear_alphabet();
    rec.alice_alphabet = alice_alphabet.name;
    const QuantumAlphabet bob_alphabet =
        rng.next_bit() == 0 ? circular_alphabet() : linear_alphabet();
    rec.bob_strategy = "basis:" + bob_alphabet.name;

    const Ket2 sent = encode(rec.alice_bit, alice_alphabet);
    const auto received = transmit(sent, channel, eve, slot, channel_rng);
    rec.eve_action = eve.ledger().back().action;
    if (!received) {
      rec.outcome = BobOutcome::NoReception;
    } else {
      const auto out = receive(*received, ReceiverStrategy::orthogonal(bob_alphabet), rng);
      rec.outcome = *out.bit == 0 ? BobOutcome::Bit0 : BobOutcome::Bit1;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TransmissionRecord> b92_stage1(int n, double theta, ReceiverStrategy::Kind receiver,
                                           const QuantumChannelConfig& channel, EveStrategy& eve,
                                           SeededRng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one slot");
  channel.validate();
  const QuantumAlphabet alphabet = b92_alphabet(theta);
  const ReceiverStrategy strategy = receiver == ReceiverStrategy::Kind::B92Povm
                                        ? ReceiverStrategy::b92_povm(theta)
                                        : ReceiverStrategy::b92_projective(theta);
  EveStrategy::Context ctx;
  ctx.protocol = EveStrategy::Context::Protocol::B92;
  ctx.theta = theta;
  ctx.b92_receiver = strategy.kind;
  eve.set_context(ctx);
  SeededRng channel_rng = rng.fork(channel.rng_seed);

  std::vector<TransmissionRecord> records;
  records.reserve(n);
  for (int slot = 0; slot < n; ++slot) {
    TransmissionRecord rec;
    rec.slot = slot;
    rec.alice_bit = rng.next_bit();
    rec.alice_alphabet = alphabet.name;
    rec.bob_strategy = strategy.describe();
    const Ket2 sent = encode(rec.alice_bit, alphabet);
    const auto received = transmit(sent, channel, eve, slot, channel_rng);
    rec.eve_action = eve.ledger().back().action;
    if (!received) {
      rec.outcome = BobOutcome::NoReception;
    } else {
      const auto out = receive(*received, strategy, rng);
      if (out.erasure())
        rec.outcome = BobOutcome::Erasure;
      else
        rec.outcome = *out.bit == 0 ? BobOutcome::Bit0 : BobOutcome::Bit1;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TransmissionRecord> epr_stage1(int n, const EprSource& source, EveStrategy& eve,
                                           SeededRng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one slot");
  EveStrategy::Context ctx;
  ctx.protocol = EveStrategy::Context::Protocol::EPR;
  eve.set_context(ctx);

  std::vector<TransmissionRecord> records;
  records.reserve(n);
  for (int slot = 0; slot < n; ++slot) {
    TransmissionRecord rec;
    rec.slot = slot;
    Ket4 state = source.states[rng.next_below(3)];

    // Intercept-resend on an EPR pair measures both photons and forwards the
    // collapsed product state.
    if (eve.kind() == EveStrategy::Kind::Opaque && eve.lambda() > 0.0 &&
        rng.bernoulli(eve.lambda())) {
      std::string action = "opaque:";
      for (int photon = 0; photon < 2; ++photon) {
        const int op = static_cast<int>(rng.next_below(3));
        const QuantumAlphabet alpha = epr_alphabet(op);
        const std::array<Ket2, 2> basis{alpha.ket_for_0, alpha.ket_for_1};
        const auto [bit, post] = measure_factor(state, photon, basis, rng);
        state = post;
        action += "M" + std::to_string(op);
      }
      rec.eve_action = action;
    } else if (eve.kind() == EveStrategy::Kind::Opaque ||
               eve.kind() == EveStrategy::Kind::None) {
      rec.eve_action = "idle";
    } else {
      throw std::invalid_argument("probe strategies are not defined for the EPR pair source");
    }

    const int op_a = static_cast<int>(rng.next_below(3));
    const int op_b = static_cast<int>(rng.next_below(3));
    const QuantumAlphabet alpha_a = epr_alphabet(op_a);
    const QuantumAlphabet alpha_b = epr_alphabet(op_b);
    const std::array<Ket2, 2> basis_a{alpha_a.ket_for_0, alpha_a.ket_for_1};
    const std::array<Ket2, 2> basis_b{alpha_b.ket_for_0, alpha_b.ket_for_1};
    const auto [bit_a, after_a] = measure_factor(state, 0, basis_a, rng);
    const auto [bit_b, after_b] = measure_factor(after_a, 1, basis_b, rng);
    (void)after_b;

    rec.alice_bit = bit_a;           // Alice records her measured bit
    const int bob_recorded = 1 - bit_b;  // Bob records the complement of his
    rec.alice_alphabet = "M" + std::to_string(op_a);
    rec.bob_strategy = "M" + std::to_string(op_b);
    rec.outcome = bob_recorded == 0 ? BobOutcome::Bit0 : BobOutcome::Bit1;
    records.push_back(std::move(rec));
  }
  return records;
}

// --- sifting -------------------------------------------------------------------

namespace {

KeyMaterial key_from(const std::vector<std::uint32_t>& slots, const std::vector<std::uint8_t>& bits) {
  KeyMaterial k;
  k.slots = slots;
  k.bits = bits;
  k.stage = KeyStage::Raw;
  return k;
}

}  // namespace

std::pair<KeyMaterial, KeyMaterial> sift(const std::vector<TransmissionRecord>& records,
                                         PublicTranscript& transcript) {
  // Bob first announces which measurement bases he used for the slots that
  // produced a bit.
  nlohmann::json bob_choices = nlohmann::json::array();
  for (const auto& r : records) {
    if (r.bob_bit())
      bob_choices.push_back({{"slot", r.slot}, {"basis", r.bob_strategy}});
  }
  transcript.publish(TranscriptRecord::Sender::Bob, "sift:bases", std::move(bob_choices));

  // Alice confirms the slots where his basis matched her alphabet.
  std::vector<std::uint32_t> kept_slots;
  std::vector<std::uint8_t> alice_bits, bob_bits;
  nlohmann::json confirmations = nlohmann::json::array();
  for (const auto& r : records) {
    const auto bob = r.bob_bit();
    if (!bob) continue;
    if (r.bob_strategy != "basis:" + r.alice_alphabet) continue;
    confirmations.push_back(r.slot);
    kept_slots.push_back(static_cast<std::uint32_t>(r.slot));
    alice_bits.push_back(static_cast<std::uint8_t>(r.alice_bit));
    bob_bits.push_back(static_cast<std::uint8_t>(*bob));
  }
  transcript.publish(TranscriptRecord::Sender::Alice, "sift:confirmations", std::move(confirmations));
  return {key_from(kept_slots, alice_bits), key_from(kept_slots, bob_bits)};
}

std::pair<KeyMaterial, KeyMaterial> b92_sift(const std::vector<TransmissionRecord>& records,
                                             PublicTranscript& transcript) {
  std::vector<std::uint32_t> kept_slots;
  std::vector<std::uint8_t> alice_bits, bob_bits;
  nlohmann::json non_erasures = nlohmann::json::array();
  for (const auto& r : records) {
    const auto bob = r.bob_bit();
    if (!bob) continue;
    non_erasures.push_back(r.slot);
    kept_slots.push_back(static_cast<std::uint32_t>(r.slot));
    alice_bits.push_back(static_cast<std::uint8_t>(r.alice_bit));
    bob_bits.push_back(static_cast<std::uint8_t>(*bob));
  }
  transcript.publish(TranscriptRecord::Sender::Bob, "sift:non-erasures", std::move(non_erasures));
  return {key_from(kept_slots, alice_bits), key_from(kept_slots, bob_bits)};
}

// --- public comparisons -----------------------------------------------------------

namespace {

// Sample `count` distinct indices of [0, size) in increasing order.
std::vector<std::size_t> sample_positions(std::size_t size, std::size_t count, SeededRng& rng) {
  std::vector<std::size_t> all(size);
  for (std::size_t i = 0; i < size; ++i) all[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(size - i));
    std::swap(all[i], all[j]);
  }
  std::vector<std::size_t> picked(all.begin(), all.begin() + count);
  std::sort(picked.begin(), picked.end());
  return picked;
}

KeyMaterial remove_positions(const KeyMaterial& key, const std::vector<std::size_t>& sorted_positions,
                             KeyStage new_stage) {
  KeyMaterial out;
  out.stage = new_stage;
  out.leaked_parities = key.leaked_parities;
  std::size_t next = 0;
  for (std::size_t i = 0; i < key.bits.size(); ++i) {
    if (next < sorted_positions.size() && sorted_positions[next] == i) {
      ++next;
      continue;
    }
    out.bits.push_back(key.bits[i]);
    out.slots.push_back(key.slots[i]);
  }
  return out;
}

}  // namespace

DetectResult detect_noiseless(const KeyMaterial& alice, const KeyMaterial& bob, int m,
                              double ground_truth_lambda, SeededRng& rng,
                              PublicTranscript& transcript) {
  if (alice.size() != bob.size()) throw std::invalid_argument("raw keys have unequal length");
  if (m < 0 || static_cast<std::size_t>(m) > alice.size())
    throw std::invalid_argument("comparison size exceeds the raw key");

  const auto positions = sample_positions(alice.size(), static_cast<std::size_t>(m), rng);
  nlohmann::json revealed = nlohmann::json::array();
  int mismatches = 0;
  for (const auto pos : positions) {
    const int a = alice.bits[pos];
    const int b = bob.bits[pos];
    mismatches += (a != b);
    revealed.push_back({{"slot", alice.slots[pos]}, {"alice", a}, {"bob", b}});
  }
  transcript.publish(TranscriptRecord::Sender::Alice, "detect:compare", std::move(revealed));

  DetectResult res;
  res.clean = mismatches == 0;
  res.mismatches = mismatches;
  res.compared = m;
  res.p_false = std::pow(1.0 - ground_truth_lambda / 4.0, m);
  res.alice_remnant = remove_positions(alice, positions, KeyStage::Final);
  res.bob_remnant = remove_positions(bob, positions, KeyStage::Final);
  return res;
}

EstimateResult estimate_error(const KeyMaterial& alice, const KeyMaterial& bob,
                              double sample_fraction, double r_max, SeededRng& rng,
                              PublicTranscript& transcript) {
  if (alice.size() != bob.size()) throw std::invalid_argument("raw keys have unequal length");
  if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
    throw std::invalid_argument("sample fraction must lie strictly between 0 and 1");
  const auto count =
      static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(alice.size())));
  if (count == 0) throw std::invalid_argument("estimation sample is empty");

  const auto positions = sample_positions(alice.size(), count, rng);
  nlohmann::json revealed = nlohmann::json::array();
  int mismatches = 0;
  for (const auto pos : positions) {
    const int a = alice.bits[pos];
    const int b = bob.bits[pos];
    mismatches += (a != b);
    revealed.push_back({{"slot", alice.slots[pos]}, {"alice", a}, {"bob", b}});
  }
  transcript.publish(TranscriptRecord::Sender::Alice, "estimate:compare", std::move(revealed));

  EstimateResult res;
  res.error_rate = static_cast<double>(mismatches) / static_cast<double>(count);
  res.proceed = res.error_rate <= r_max;
  res.alice_remnant = remove_positions(alice, positions, KeyStage::Estimated);
  res.bob_remnant = remove_positions(bob, positions, KeyStage::Estimated);
  return res;
}

EprSplit epr_split(const std::vector<TransmissionRecord>& records, PublicTranscript& transcript) {
  nlohmann::json alice_ops = nlohmann::json::array();
  nlohmann::json bob_ops = nlohmann::json::array();
  for (const auto& r : records) {
    alice_ops.push_back(r.alice_alphabet);
    bob_ops.push_back(r.bob_strategy);
  }
  transcript.publish(TranscriptRecord::Sender::Alice, "epr:operators", std::move(alice_ops));
  transcript.publish(TranscriptRecord::Sender::Bob, "epr:operators", std::move(bob_ops));

  EprSplit split;
  for (const auto& r : records) {
    const auto bob = r.bob_bit();
    if (!bob) continue;
    const int op_a = r.alice_alphabet.back() - '0';
    const int op_b = r.bob_strategy.back() - '0';
    if (op_a == op_b) {
      split.alice_raw.slots.push_back(static_cast<std::uint32_t>(r.slot));
      split.alice_raw.bits.push_back(static_cast<std::uint8_t>(r.alice_bit));
      split.bob_raw.slots.push_back(static_cast<std::uint32_t>(r.slot));
      split.bob_raw.bits.push_back(static_cast<std::uint8_t>(*bob));
    } else {
      split.rejected.push_back(RejectedSlot{static_cast<std::uint32_t>(r.slot), op_a, op_b,
                                            r.alice_bit, *bob});
    }
  }
  return split;
}

nlohmann::json BellResult::to_json() const {
  return nlohmann::json{{"beta", beta},
                        {"standard_error", standard_error},
                        {"eve_detected", eve_detected},
                        {"delta_12", delta[0]},
                        {"delta_01", delta[1]},
                        {"delta_02", delta[2]}};
}

BellResult bell_test(const std::vector<RejectedSlot>& rejected) {
  // Pairs in the order {1,2}, {0,1}, {0,2}.
  constexpr int pair_i[3] = {1, 0, 0};
  constexpr int pair_j[3] = {2, 1, 2};
  long counts[3] = {0, 0, 0};
  long disagreements[3] = {0, 0, 0};
  for (const auto& r : rejected) {
    for (int k = 0; k < 3; ++k) {
      const bool direct = r.op_alice == pair_i[k] && r.op_bob == pair_j[k];
      const bool swapped = r.op_alice == pair_j[k] && r.op_bob == pair_i[k];
      if (direct || swapped) {
        ++counts[k];
        disagreements[k] += (r.bit_alice != r.bit_bob);
      }
    }
  }
  BellResult res;
  double variance = 0;
  for (int k = 0; k < 3; ++k) {
    if (counts[k] == 0)
      throw std::invalid_argument("no rejected-key samples for operator pair {" +
                                  std::to_string(pair_i[k]) + "," + std::to_string(pair_j[k]) +
                                  "}");
    const double p_neq = static_cast<double>(disagreements[k]) / static_cast<double>(counts[k]);
    res.delta[k] = 2.0 * p_neq - 1.0;
    variance += 4.0 * p_neq * (1.0 - p_neq) / static_cast<double>(counts[k]);
  }
  res.beta = 1.0 + res.delta[0] - std::abs(res.delta[1] - res.delta[2]);
  res.standard_error = std::sqrt(variance);
  // The asymptotic rule is beta >= 0; the finite-sample decision edge backs
  // off by two standard errors.
  res.eve_detected = res.beta >= -2.0 * res.standard_error;
  return res;
}

}  // namespace qkd
