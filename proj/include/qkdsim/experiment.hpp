#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkdsim/postprocess.hpp"
#include "qkdsim/protocols.hpp"

namespace qkd {

struct EveSpec {
  enum class Kind { None, Opaque, Translucent, TranslucentEntangled };

  Kind kind = Kind::None;
  double lambda = 0;
  std::optional<double> theta;  // defaults to the session angle
  double strength = 0;
  std::optional<double> a;      // entangling coefficients; defaults to the
  std::optional<double> b;      // maximal-information admissible pair

  EveStrategy instantiate(double session_theta) const;
  std::string describe() const;

  // "none" | "opaque:L" | "translucent:S" | "translucent:THETA:S" |
  // "translucent-entangled" | "translucent-entangled:A:B"
  static EveSpec parse(const std::string& text);
};

enum class ProtocolKind { Bb84, Bb84Noisy, B92, Epr };

std::string protocol_label(ProtocolKind p);
ProtocolKind parse_protocol(const std::string& name);

struct SessionConfig {
  ProtocolKind protocol = ProtocolKind::Bb84;
  int n_slots = 100000;
  QuantumChannelConfig channel;
  EveSpec eve;
  double theta = 0.39269908169872414;  // pi/8
  ReceiverStrategy::Kind b92_receiver = ReceiverStrategy::Kind::B92Projective;
  int detect_m = 200;           // noiseless public comparison size
  double sample_fraction = 0.1; // noisy error-estimation sample
  double r_max = 0.12;
  ReconcileConfig reconcile;
  AmplifyConfig amplify;

  void validate() const;
};

struct SessionArtifacts {
  SessionReport report;
  std::vector<TransmissionRecord> records;
  PublicTranscript transcript;
  KeyMaterial alice_final;
  KeyMaterial bob_final;
  nlohmann::json eve_ledger;  // per-slot actions and guesses, for post-hoc analysis
};

// One deterministic session: identical seed and config, identical artifacts.
SessionArtifacts run_session(const SessionConfig& cfg, std::uint64_t seed);

struct ExperimentConfig {
  SessionConfig session;
  std::vector<std::uint64_t> seeds{1};

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// "1..10" or "3,5,9" or "7".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct ExperimentResult {
  nlohmann::json report;  // config echo, per-seed reports, aggregates, aborts
  int sessions = 0;
  int aborted = 0;
};

// Sessions dispatched to a worker pool capped by QKD_SIM_THREADS; aggregation
// runs after the join in seed order, so reports are byte-stable.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SweepResult {
  std::string parameter;
  std::vector<double> values;
  nlohmann::json report;  // one aggregated entry per value

  void write_csv(std::ostream& out) const;
};

// parameter is one of: lambda, theta, strength, p-flip, s, m.
SweepResult sweep_experiment(const ExperimentConfig& base, const std::string& parameter,
                             const std::vector<double>& values);

int worker_thread_cap();

}  // namespace qkd
