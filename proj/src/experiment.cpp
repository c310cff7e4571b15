#include "qkdsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <thread>

namespace qkd {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

}  // namespace

EveStrategy EveSpec::instantiate(double session_theta) const {
  const double theta_eff = theta.value_or(session_theta);
  switch (kind) {
    case Kind::None:
      return EveStrategy::none();
    case Kind::Opaque:
      return EveStrategy::opaque(lambda);
    case Kind::Translucent:
      return build_translucent(theta_eff, strength);
    case Kind::TranslucentEntangled: {
      // Default to the maximal-information admissible coefficients,
      // 2ab = cos(2 theta) with orthogonal probe states.
      const double a_eff = a.value_or(std::cos(kPi / 4.0 - theta_eff));
      const double b_eff = b.value_or(std::sin(kPi / 4.0 - theta_eff));
      return build_translucent_entangled(theta_eff, a_eff, b_eff);
    }
  }
  throw std::logic_error("unreachable eve spec kind");
}

std::string EveSpec::describe() const {
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::Opaque:
      return "opaque:" + std::to_string(lambda);
    case Kind::Translucent:
      return theta ? "translucent:" + std::to_string(*theta) + ":" + std::to_string(strength)
                   : "translucent:" + std::to_string(strength);
    case Kind::TranslucentEntangled:
      if (a && b)
        return "translucent-entangled:" + std::to_string(*a) + ":" + std::to_string(*b);
      return "translucent-entangled";
  }
  return "?";
}

EveSpec EveSpec::parse(const std::string& text) {
  const auto parts = split(text, ':');
  EveSpec spec;
  const std::string& head = parts[0];
  if (head == "none") {
    if (parts.size() != 1) throw std::invalid_argument("eve spec 'none' takes no parameters");
    return spec;
  }
  if (head == "opaque") {
    spec.kind = Kind::Opaque;
    if (parts.size() != 2) throw std::invalid_argument("eve spec needs 'opaque:<lambda>'");
    spec.lambda = std::stod(parts[1]);
    return spec;
  }
  if (head == "translucent") {
    spec.kind = Kind::Translucent;
    if (parts.size() == 2) {
      spec.strength = std::stod(parts[1]);
    } else if (parts.size() == 3) {
      spec.theta = std::stod(parts[1]);
      spec.strength = std::stod(parts[2]);
    } else {
      throw std::invalid_argument("eve spec needs 'translucent:<strength>' or 'translucent:<theta>:<strength>'");
    }
    return spec;
  }
  if (head == "translucent-entangled") {
    spec.kind = Kind::TranslucentEntangled;
    if (parts.size() == 3) {
      spec.a = std::stod(parts[1]);
      spec.b = std::stod(parts[2]);
    } else if (parts.size() != 1) {
      throw std::invalid_argument(
          "eve spec needs 'translucent-entangled' or 'translucent-entangled:<a>:<b>'");
    }
    return spec;
  }
  throw std::invalid_argument("unknown eve strategy '" + head + "'");
}

std::string protocol_label(ProtocolKind p) {
  switch (p) {
    case ProtocolKind::Bb84:
      return "bb84";
    case ProtocolKind::Bb84Noisy:
      return "bb84-noisy";
    case ProtocolKind::B92:
      return "b92";
    case ProtocolKind::Epr:
      return "epr";
  }
  return "?";
}

ProtocolKind parse_protocol(const std::string& name) {
  if (name == "bb84") return ProtocolKind::Bb84;
  if (name == "bb84-noisy") return ProtocolKind::Bb84Noisy;
  if (name == "b92") return ProtocolKind::B92;
  if (name == "epr") return ProtocolKind::Epr;
  throw std::invalid_argument("unknown protocol '" + name + "' (expected bb84, bb84-noisy, b92 or epr)");
}

void SessionConfig::validate() const {
  if (n_slots < 1) throw std::invalid_argument("n must be at least 1");
  channel.validate();
  if (protocol == ProtocolKind::B92 || eve.kind == EveSpec::Kind::Translucent ||
      eve.kind == EveSpec::Kind::TranslucentEntangled) {
    const double theta_eff = eve.theta.value_or(theta);
    if (!(theta_eff > 0.0 && theta_eff < kPi / 4.0))
      throw std::invalid_argument("theta must lie strictly between 0 and pi/4");
  }
  if (protocol == ProtocolKind::Epr && (channel.p_flip > 0.0 || channel.p_loss > 0.0))
    throw std::invalid_argument("the pair source runs without a channel noise model");
  if (detect_m < 0) throw std::invalid_argument("m must be nonnegative");
  if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
    throw std::invalid_argument("sample-fraction must lie strictly between 0 and 1");
  if (!(r_max >= 0.0 && r_max < 0.5)) throw std::invalid_argument("r-max must lie in [0, 0.5)");
  reconcile.validate();
  amplify.validate();
}

namespace {

struct PreSiftStats {
  int received = 0;
  int with_bit = 0;
  int matches = 0;
  int erasures = 0;
};

PreSiftStats pre_sift_stats(const std::vector<TransmissionRecord>& records) {
  PreSiftStats s;
  for (const auto& r : records) {
    if (r.outcome == BobOutcome::NoReception) continue;
    ++s.received;
    if (r.outcome == BobOutcome::Erasure) {
      ++s.erasures;
      continue;
    }
    ++s.with_bit;
    s.matches += (*r.bob_bit() == r.alice_bit);
  }
  return s;
}

bool bits_equal(const KeyMaterial& a, const KeyMaterial& b) {
  return a.bits == b.bits;
}

// Shared tail of the noisy pipelines: estimation, reconciliation, privacy
// amplification, and the scoring of Eve's notebook against the final key.
void run_noisy_phases(const SessionConfig& cfg, SeededRng& rng, EveStrategy& eve,
                      KeyMaterial&& alice_raw, KeyMaterial&& bob_raw, SessionArtifacts& art) {
  SessionReport& report = art.report;
  const auto est = estimate_error(alice_raw, bob_raw, cfg.sample_fraction, cfg.r_max, rng,
                                  art.transcript);
  report.raw_error_rate_estimate = est.error_rate;
  if (!est.proceed) {
    report.aborted = "error estimate " + std::to_string(est.error_rate) +
                     " exceeds the configured maximum; restarting stage 1 is required";
    return;
  }

  ReconcileConfig rcfg = cfg.reconcile;
  rcfg.error_rate_hint = est.error_rate;
  rcfg.rng_seed = rng.next_u64();
  const auto rec = reconcile(est.alice_remnant, est.bob_remnant, rcfg, art.transcript);
  if (rec.stats.aborted) {
    report.aborted = *rec.stats.aborted;
    return;
  }

  AmplifyConfig acfg = cfg.amplify;
  acfg.rng_seed = rng.next_u64();
  const auto amp = privacy_amplify(rec.alice, acfg, est.error_rate, art.transcript);
  if (amp.aborted) {
    report.aborted = *amp.aborted;
    return;
  }

  // Bob applies the published subset choices to his reconciled key.
  KeyMaterial bob_final;
  bob_final.stage = KeyStage::Final;
  bob_final.leaked_parities = rec.bob.leaked_parities;
  for (const auto& mask : amp.masks)
    bob_final.bits.push_back(static_cast<std::uint8_t>(subset_parity(rec.bob.bits, mask)));

  report.final_key_length = static_cast<int>(amp.key.size());
  report.leaked_parities = amp.key.leaked_parities;
  report.keys_agree = bits_equal(amp.key, bob_final);
  if (eve.kind() != EveStrategy::Kind::None) {
    report.k_model_mismatched = eve.kind() != EveStrategy::Kind::Opaque;
    // Eve reconstructs the surviving slots from the public record and
    // predicts each final bit as the parity of her per-slot guesses.
    std::vector<std::uint8_t> eve_bits;
    eve_bits.reserve(rec.alice.size());
    for (const auto slot : rec.alice.slots)
      eve_bits.push_back(static_cast<std::uint8_t>(eve.predict_bit(static_cast<int>(slot))));
    int hits = 0;
    for (std::size_t i = 0; i < amp.masks.size(); ++i)
      hits += (subset_parity(eve_bits, amp.masks[i]) == amp.key.bits[i]);
    report.eve_prediction_rate =
        amp.key.bits.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(amp.key.size());
  }
  art.alice_final = std::move(amp.key);
  art.bob_final = std::move(bob_final);
}

}  // namespace

SessionArtifacts run_session(const SessionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  SessionArtifacts art;
  SessionReport& report = art.report;
  report.seed = seed;
  report.protocol = protocol_label(cfg.protocol);
  report.eve = cfg.eve.describe();

  SeededRng rng(seed);
  EveStrategy eve = cfg.eve.instantiate(cfg.theta);
  art.transcript.attach_reader([&eve](const TranscriptRecord& r) { eve.observe(r); });

  switch (cfg.protocol) {
    case ProtocolKind::Bb84:
    case ProtocolKind::Bb84Noisy: {
      art.records = bb84_stage1(cfg.n_slots, cfg.channel, eve, rng);
      const auto stats = pre_sift_stats(art.records);
      report.n_sent = cfg.n_slots;
      report.n_received = stats.received;
      if (stats.with_bit > 0)
        report.pre_sift_accuracy = static_cast<double>(stats.matches) / stats.with_bit;

      auto [alice_raw, bob_raw] = sift(art.records, art.transcript);
      report.raw_key_length = static_cast<int>(alice_raw.size());

      if (cfg.protocol == ProtocolKind::Bb84) {
        const double ground_truth_lambda =
            eve.kind() == EveStrategy::Kind::Opaque ? eve.lambda() : 0.0;
        const auto det = detect_noiseless(alice_raw, bob_raw, cfg.detect_m, ground_truth_lambda,
                                          rng, art.transcript);
        report.p_false = det.p_false;
        if (det.compared > 0)
          report.raw_error_rate_estimate =
              static_cast<double>(det.mismatches) / static_cast<double>(det.compared);
        if (!det.clean) {
          report.aborted = "public comparison found mismatches; eavesdropping detected";
        } else {
          report.final_key_length = static_cast<int>(det.alice_remnant.size());
          report.keys_agree = bits_equal(det.alice_remnant, det.bob_remnant);
          art.alice_final = det.alice_remnant;
          art.bob_final = det.bob_remnant;
        }
      } else {
        run_noisy_phases(cfg, rng, eve, std::move(alice_raw), std::move(bob_raw), art);
      }
      break;
    }
    case ProtocolKind::B92: {
      art.records =
          b92_stage1(cfg.n_slots, cfg.theta, cfg.b92_receiver, cfg.channel, eve, rng);
      const auto stats = pre_sift_stats(art.records);
      report.n_sent = cfg.n_slots;
      report.n_received = stats.received;
      if (stats.received > 0)
        report.erasure_rate = static_cast<double>(stats.erasures) / stats.received;
      if (stats.with_bit > 0)
        report.pre_sift_accuracy = static_cast<double>(stats.matches) / stats.with_bit;

      auto [alice_raw, bob_raw] = b92_sift(art.records, art.transcript);
      report.raw_key_length = static_cast<int>(alice_raw.size());
      run_noisy_phases(cfg, rng, eve, std::move(alice_raw), std::move(bob_raw), art);
      break;
    }
    case ProtocolKind::Epr: {
      const EprSource source = EprSource::standard();
      art.records = epr_stage1(cfg.n_slots, source, eve, rng);
      const auto stats = pre_sift_stats(art.records);
      report.n_sent = cfg.n_slots;
      report.n_received = stats.received;
      if (stats.with_bit > 0)
        report.pre_sift_accuracy = static_cast<double>(stats.matches) / stats.with_bit;

      auto split = epr_split(art.records, art.transcript);
      report.raw_key_length = static_cast<int>(split.alice_raw.size());
      const auto bell = bell_test(split.rejected);
      report.bell_beta = bell.beta;
      report.bell_beta_se = bell.standard_error;
      report.eve_detected = bell.eve_detected;
      if (bell.eve_detected) {
        report.aborted = "Bell statistic consistent with local hidden variables; eavesdropping suspected";
      } else {
        split.alice_raw.stage = KeyStage::Final;
        split.bob_raw.stage = KeyStage::Final;
        report.final_key_length = static_cast<int>(split.alice_raw.size());
        report.keys_agree = bits_equal(split.alice_raw, split.bob_raw);
        art.alice_final = std::move(split.alice_raw);
        art.bob_final = std::move(split.bob_raw);
      }
      break;
    }
  }
  art.eve_ledger = eve.ledger_json();
  return art;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  SessionConfig& s = cfg.session;
  if (j.contains("protocol")) s.protocol = parse_protocol(j.at("protocol").get<std::string>());
  if (j.contains("n")) s.n_slots = j.at("n").get<int>();
  if (j.contains("p-flip")) s.channel.p_flip = j.at("p-flip").get<double>();
  if (j.contains("p-loss")) s.channel.p_loss = j.at("p-loss").get<double>();
  if (j.contains("eve")) s.eve = EveSpec::parse(j.at("eve").get<std::string>());
  if (j.contains("theta")) s.theta = j.at("theta").get<double>();
  if (j.contains("receiver")) {
    const auto r = j.at("receiver").get<std::string>();
    if (r == "projective")
      s.b92_receiver = ReceiverStrategy::Kind::B92Projective;
    else if (r == "povm")
      s.b92_receiver = ReceiverStrategy::Kind::B92Povm;
    else
      throw std::invalid_argument("receiver must be 'projective' or 'povm'");
  }
  if (j.contains("m")) s.detect_m = j.at("m").get<int>();
  if (j.contains("sample-fraction")) s.sample_fraction = j.at("sample-fraction").get<double>();
  if (j.contains("r-max")) s.r_max = j.at("r-max").get<double>();
  if (j.contains("block-len") && !j.at("block-len").is_null())
    s.reconcile.block_len = j.at("block-len").get<int>();
  if (j.contains("step1-rounds")) s.reconcile.step1_rounds = j.at("step1-rounds").get<int>();
  if (j.contains("step2-stop-n")) s.reconcile.step2_stop_n = j.at("step2-stop-n").get<int>();
  if (j.contains("security-s")) s.amplify.s = j.at("security-s").get<int>();
  if (j.contains("k-override") && !j.at("k-override").is_null())
    s.amplify.k_override = j.at("k-override").get<int>();
  if (j.contains("seeds")) {
    if (j.at("seeds").is_string())
      cfg.seeds = parse_seed_list(j.at("seeds").get<std::string>());
    else
      cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (cfg.seeds.empty()) throw std::invalid_argument("seed list is empty");
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  const SessionConfig& s = session;
  nlohmann::json j;
  j["protocol"] = protocol_label(s.protocol);
  j["n"] = s.n_slots;
  j["p-flip"] = s.channel.p_flip;
  j["p-loss"] = s.channel.p_loss;
  j["eve"] = s.eve.describe();
  j["theta"] = s.theta;
  j["receiver"] =
      s.b92_receiver == ReceiverStrategy::Kind::B92Povm ? "povm" : "projective";
  j["m"] = s.detect_m;
  j["sample-fraction"] = s.sample_fraction;
  j["r-max"] = s.r_max;
  j["block-len"] = s.reconcile.block_len ? nlohmann::json(*s.reconcile.block_len)
                                         : nlohmann::json(nullptr);
  j["step1-rounds"] = s.reconcile.step1_rounds;
  j["step2-stop-n"] = s.reconcile.step2_stop_n;
  j["security-s"] = s.amplify.s;
  j["k-override"] =
      s.amplify.k_override ? nlohmann::json(*s.amplify.k_override) : nlohmann::json(nullptr);
  j["seeds"] = seeds;
  return j;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos) {
    const std::uint64_t lo = std::stoull(text.substr(0, range_pos));
    const std::uint64_t hi = std::stoull(text.substr(range_pos + 2));
    if (hi < lo) throw std::invalid_argument("seed range is reversed");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    seeds.push_back(std::stoull(part));
  }
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  return seeds;
}

int worker_thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("QKD_SIM_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) cap = std::min(cap, requested);
  }
  return cap;
}

namespace {

const std::vector<std::pair<std::string, std::optional<double> SessionReport::*>>&
numeric_fields() {
  static const std::vector<std::pair<std::string, std::optional<double> SessionReport::*>> fields{
      {"pre_sift_accuracy", &SessionReport::pre_sift_accuracy},
      {"raw_error_rate_estimate", &SessionReport::raw_error_rate_estimate},
      {"erasure_rate", &SessionReport::erasure_rate},
      {"bell_beta", &SessionReport::bell_beta},
      {"p_false", &SessionReport::p_false},
      {"eve_prediction_rate", &SessionReport::eve_prediction_rate},
  };
  return fields;
}

void aggregate_values(nlohmann::json& agg, const std::string& name,
                      const std::vector<double>& values) {
  if (values.empty()) return;
  double mean = 0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0;
  for (const double v : values) var += (v - mean) * (v - mean);
  const double stddev =
      values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
  agg[name] = {{"mean", mean},
               {"stddev", stddev},
               {"stderr", stddev / std::sqrt(static_cast<double>(values.size()))},
               {"count", values.size()}};
}

nlohmann::json aggregate_reports(const std::vector<SessionReport>& reports) {
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [name, member] : numeric_fields()) {
    std::vector<double> values;
    for (const auto& r : reports)
      if (r.*member) values.push_back(*(r.*member));
    aggregate_values(agg, name, values);
  }
  {
    std::vector<double> err;
    for (const auto& r : reports)
      if (r.pre_sift_accuracy) err.push_back(1.0 - *r.pre_sift_accuracy);
    aggregate_values(agg, "pre_sift_error", err);
  }
  {
    std::vector<double> lens;
    for (const auto& r : reports)
      if (r.final_key_length) lens.push_back(static_cast<double>(*r.final_key_length));
    aggregate_values(agg, "final_key_length", lens);
  }
  {
    std::vector<double> raw;
    for (const auto& r : reports)
      if (r.raw_key_length) raw.push_back(static_cast<double>(*r.raw_key_length));
    aggregate_values(agg, "raw_key_length", raw);
  }
  {
    std::vector<double> leaks;
    for (const auto& r : reports) leaks.push_back(static_cast<double>(r.leaked_parities));
    aggregate_values(agg, "leaked_parities", leaks);
  }
  return agg;
}

std::vector<SessionReport> run_all_sessions(const SessionConfig& session,
                                            const std::vector<std::uint64_t>& seeds) {
  std::vector<SessionReport> reports(seeds.size());
  const int n_threads =
      std::max(1, std::min<int>(worker_thread_cap(), static_cast<int>(seeds.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        reports[i] = run_session(session, seeds[i]).report;
      } catch (const std::exception& e) {
        reports[i].seed = seeds[i];
        reports[i].protocol = protocol_label(session.protocol);
        reports[i].eve = session.eve.describe();
        reports[i].aborted = std::string("session error: ") + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return reports;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.session.validate();
  if (cfg.seeds.empty()) throw std::invalid_argument("seed list is empty");
  const auto reports = run_all_sessions(cfg.session, cfg.seeds);

  ExperimentResult result;
  result.sessions = static_cast<int>(reports.size());
  nlohmann::json per_seed = nlohmann::json::array();
  nlohmann::json aborts = nlohmann::json::array();
  for (const auto& r : reports) {
    per_seed.push_back(r.to_json());
    if (r.aborted) {
      ++result.aborted;
      aborts.push_back({{"seed", r.seed}, {"reason", *r.aborted}});
    }
  }
  result.report = nlohmann::json{{"config", cfg.to_json()},
                                 {"per_seed", std::move(per_seed)},
                                 {"aggregate", aggregate_reports(reports)},
                                 {"aborts", std::move(aborts)}};
  return result;
}

SweepResult sweep_experiment(const ExperimentConfig& base, const std::string& parameter,
                             const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  SweepResult sweep;
  sweep.parameter = parameter;
  sweep.values = values;
  nlohmann::json rows = nlohmann::json::array();
  for (const double value : values) {
    ExperimentConfig cfg = base;
    SessionConfig& s = cfg.session;
    if (parameter == "lambda") {
      if (s.eve.kind == EveSpec::Kind::None) s.eve.kind = EveSpec::Kind::Opaque;
      if (s.eve.kind != EveSpec::Kind::Opaque)
        throw std::invalid_argument("lambda sweeps apply to the opaque strategy");
      s.eve.lambda = value;
    } else if (parameter == "theta") {
      s.theta = value;
    } else if (parameter == "strength") {
      if (s.eve.kind == EveSpec::Kind::None) s.eve.kind = EveSpec::Kind::Translucent;
      if (s.eve.kind != EveSpec::Kind::Translucent)
        throw std::invalid_argument("strength sweeps apply to the translucent strategy");
      s.eve.strength = value;
    } else if (parameter == "p-flip") {
      s.channel.p_flip = value;
    } else if (parameter == "s") {
      s.amplify.s = static_cast<int>(std::lround(value));
    } else if (parameter == "m") {
      s.detect_m = static_cast<int>(std::lround(value));
    } else {
      throw std::invalid_argument("unknown sweep parameter '" + parameter +
                                  "' (expected lambda, theta, strength, p-flip, s or m)");
    }
    const auto run = run_experiment(cfg);
    rows.push_back({{"value", value},
                    {"aggregate", run.report.at("aggregate")},
                    {"aborted_sessions", run.aborted}});
  }
  sweep.report = nlohmann::json{
      {"parameter", parameter}, {"config", base.to_json()}, {"rows", std::move(rows)}};
  return sweep;
}

void SweepResult::write_csv(std::ostream& out) const {
  // Union of aggregate statistics across rows, in first-appearance order.
  std::vector<std::string> stats;
  for (const auto& row : report.at("rows")) {
    for (auto it = row.at("aggregate").begin(); it != row.at("aggregate").end(); ++it) {
      if (std::find(stats.begin(), stats.end(), it.key()) == stats.end())
        stats.push_back(it.key());
    }
  }
  out << "value";
  for (const auto& s : stats) out << ',' << s << "_mean," << s << "_stderr";
  out << ",aborted_sessions\n";
  for (const auto& row : report.at("rows")) {
    out << row.at("value").get<double>();
    const auto& agg = row.at("aggregate");
    for (const auto& s : stats) {
      if (agg.contains(s))
        out << ',' << agg.at(s).at("mean").get<double>() << ','
            << agg.at(s).at("stderr").get<double>();
      else
        out << ",,";
    }
    out << ',' << row.at("aborted_sessions").get<int>() << '\n';
  }
}

}  // namespace qkd
