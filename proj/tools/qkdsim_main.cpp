#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qkdsim/acceptance.hpp"
#include "qkdsim/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAborted = 2;
constexpr int kExitAcceptance = 3;

struct CommonFlags {
  std::string config_path;
  std::string protocol;
  std::optional<int> n;
  std::string seeds;
  std::string eve;
  std::optional<double> p_flip, p_loss, theta, sample_fraction, r_max;
  std::string receiver;
  std::optional<int> m, block_len, step1_rounds, step2_stop_n, security_s, k_override;
  std::string out_path;
  std::string records_csv;
  std::string transcript_jsonl;
  std::string ledger_json;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override its values");
  cmd->add_option("--protocol", f.protocol, "bb84 | bb84-noisy | b92 | epr");
  cmd->add_option("--n", f.n, "time slots per session");
  cmd->add_option("--seeds", f.seeds, "seed list: 1..10 or 3,5,9");
  cmd->add_option("--eve", f.eve,
                  "none | opaque:L | translucent:S | translucent:THETA:S | "
                  "translucent-entangled[:A:B]");
  cmd->add_option("--p-flip", f.p_flip, "channel disturbance probability");
  cmd->add_option("--p-loss", f.p_loss, "channel non-reception probability");
  cmd->add_option("--theta", f.theta, "b92 alphabet angle (radians)");
  cmd->add_option("--receiver", f.receiver, "b92 receiver: projective | povm");
  cmd->add_option("--m", f.m, "noiseless public comparison size");
  cmd->add_option("--sample-fraction", f.sample_fraction, "error-estimation sample fraction");
  cmd->add_option("--r-max", f.r_max, "abort threshold for the error estimate");
  cmd->add_option("--block-len", f.block_len, "reconciliation block length override");
  cmd->add_option("--step1-rounds", f.step1_rounds, "reconciliation permutation passes");
  cmd->add_option("--step2-stop-n", f.step2_stop_n, "clean probes ending reconciliation");
  cmd->add_option("--security-s", f.security_s, "privacy amplification security parameter");
  cmd->add_option("--k-override", f.k_override, "fixed bound on Eve's known bits");
  cmd->add_option("--out", f.out_path, "write the JSON report here instead of stdout");
  cmd->add_option("--records-csv", f.records_csv,
                  "dump first-seed per-slot records to this CSV file");
  cmd->add_option("--transcript-jsonl", f.transcript_jsonl,
                  "dump the first seed's public transcript as JSON lines");
  cmd->add_option("--ledger-json", f.ledger_json,
                  "dump the first seed's eavesdropper ledger as JSON");
}

qkd::ExperimentConfig build_config(const CommonFlags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw std::invalid_argument("cannot open config file '" + f.config_path + "'");
    in >> j;
  }
  if (!f.protocol.empty()) j["protocol"] = f.protocol;
  if (f.n) j["n"] = *f.n;
  if (!f.seeds.empty()) j["seeds"] = f.seeds;
  if (!f.eve.empty()) j["eve"] = f.eve;
  if (f.p_flip) j["p-flip"] = *f.p_flip;
  if (f.p_loss) j["p-loss"] = *f.p_loss;
  if (f.theta) j["theta"] = *f.theta;
  if (!f.receiver.empty()) j["receiver"] = f.receiver;
  if (f.m) j["m"] = *f.m;
  if (f.sample_fraction) j["sample-fraction"] = *f.sample_fraction;
  if (f.r_max) j["r-max"] = *f.r_max;
  if (f.block_len) j["block-len"] = *f.block_len;
  if (f.step1_rounds) j["step1-rounds"] = *f.step1_rounds;
  if (f.step2_stop_n) j["step2-stop-n"] = *f.step2_stop_n;
  if (f.security_s) j["security-s"] = *f.security_s;
  if (f.k_override) j["k-override"] = *f.k_override;
  return qkd::ExperimentConfig::from_json(j);
}

void emit_report(const nlohmann::json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << std::endl;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output file '" + out_path + "'");
  out << report.dump(2) << '\n';
}

void maybe_dump_artifacts(const qkd::ExperimentConfig& cfg, const CommonFlags& f) {
  if (f.records_csv.empty() && f.transcript_jsonl.empty() && f.ledger_json.empty()) return;
  const auto art = qkd::run_session(cfg.session, cfg.seeds.front());
  auto open_or_throw = [](const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
    return out;
  };
  if (!f.records_csv.empty()) {
    auto out = open_or_throw(f.records_csv);
    qkd::write_records_csv(out, art.records);
  }
  if (!f.transcript_jsonl.empty()) {
    auto out = open_or_throw(f.transcript_jsonl);
    art.transcript.write_jsonl(out);
  }
  if (!f.ledger_json.empty()) {
    auto out = open_or_throw(f.ledger_json);
    out << art.eve_ledger.dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seedable simulator for quantum key distribution protocols"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run sessions and report statistics");
  add_common_flags(run_cmd, run_flags);

  CommonFlags sweep_flags;
  std::string sweep_parameter;
  std::vector<double> sweep_values;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "rerun while varying one parameter");
  add_common_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--parameter", sweep_parameter, "lambda | theta | strength | p-flip | s | m")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "values to sweep")->required()->delimiter(',');

  CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the acceptance suite");
  (void)selftest_cmd;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) {
      const auto cfg = build_config(run_flags);
      const auto result = qkd::run_experiment(cfg);
      emit_report(result.report, run_flags.out_path);
      maybe_dump_artifacts(cfg, run_flags);
      return result.aborted == result.sessions ? kExitAborted : kExitOk;
    }
    if (sweep_cmd->parsed()) {
      const auto cfg = build_config(sweep_flags);
      const auto sweep = qkd::sweep_experiment(cfg, sweep_parameter, sweep_values);
      if (sweep_flags.out_path.empty()) {
        sweep.write_csv(std::cout);
      } else {
        std::ofstream out(sweep_flags.out_path);
        if (!out)
          throw std::invalid_argument("cannot open output file '" + sweep_flags.out_path + "'");
        sweep.write_csv(out);
      }
      return kExitOk;
    }
    // selftest
    const int failures = qkd::run_acceptance(std::cout);
    return failures == 0 ? kExitOk : kExitAcceptance;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAborted;
  }
}
