#include <cmath>
#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "qkdsim/experiment.hpp"

using namespace qkd;

TEST_CASE("eve specs parse and describe") {
  CHECK(EveSpec::parse("none").kind == EveSpec::Kind::None);
  const auto opaque = EveSpec::parse("opaque:0.5");
  CHECK(opaque.kind == EveSpec::Kind::Opaque);
  CHECK(opaque.lambda == doctest::Approx(0.5));
  const auto probe = EveSpec::parse("translucent:0.25:0.75");
  CHECK(probe.kind == EveSpec::Kind::Translucent);
  CHECK(*probe.theta == doctest::Approx(0.25));
  CHECK(probe.strength == doctest::Approx(0.75));
  const auto short_probe = EveSpec::parse("translucent:0.4");
  CHECK(!short_probe.theta);
  CHECK(short_probe.strength == doctest::Approx(0.4));
  CHECK(EveSpec::parse("translucent-entangled").kind == EveSpec::Kind::TranslucentEntangled);
  const auto ab = EveSpec::parse("translucent-entangled:0.9238795325112867:0.3826834323650898");
  CHECK(*ab.a == doctest::Approx(0.92387953));

  CHECK_THROWS_AS(EveSpec::parse("opaque"), std::invalid_argument);
  CHECK_THROWS_AS(EveSpec::parse("vampire:1"), std::invalid_argument);
  CHECK_THROWS_AS(EveSpec::parse("none:1"), std::invalid_argument);
}

TEST_CASE("protocol names") {
  CHECK(parse_protocol("bb84") == ProtocolKind::Bb84);
  CHECK(parse_protocol("bb84-noisy") == ProtocolKind::Bb84Noisy);
  CHECK(parse_protocol("b92") == ProtocolKind::B92);
  CHECK(parse_protocol("epr") == ProtocolKind::Epr);
  CHECK_THROWS_AS(parse_protocol("e91"), std::invalid_argument);
  CHECK(protocol_label(ProtocolKind::B92) == "b92");
}

TEST_CASE("seed lists") {
  CHECK(parse_seed_list("1..10").size() == 10);
  CHECK(parse_seed_list("3,5,9") == std::vector<std::uint64_t>{3, 5, 9});
  CHECK(parse_seed_list("7") == std::vector<std::uint64_t>{7});
  CHECK_THROWS_AS(parse_seed_list("9..3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_seed_list(""), std::invalid_argument);
}

TEST_CASE("session configs validate") {
  SessionConfig cfg;
  cfg.n_slots = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_slots = 10;
  cfg.sample_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sample_fraction = 0.1;
  cfg.protocol = ProtocolKind::B92;
  cfg.theta = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.theta = 0.3;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("noiseless session report") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Bb84;
  cfg.n_slots = 20000;
  const auto art = run_session(cfg, 241);
  const auto& report = art.report;
  CHECK(report.protocol == "bb84");
  CHECK(report.n_sent == 20000);
  CHECK(report.n_received == 20000);
  CHECK(std::abs(*report.pre_sift_accuracy - 0.75) < 0.02);
  CHECK(!report.aborted);
  CHECK(*report.keys_agree);
  CHECK(*report.p_false == doctest::Approx(1.0));
  CHECK(*report.final_key_length == static_cast<int>(art.alice_final.size()));
  CHECK(*report.raw_key_length >= *report.final_key_length);
  CHECK(art.alice_final.bits == art.bob_final.bits);
  CHECK(art.records.size() == 20000);
}

TEST_CASE("interception aborts the noiseless session") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Bb84;
  cfg.n_slots = 5000;
  cfg.eve = EveSpec::parse("opaque:1.0");
  const auto art = run_session(cfg, 243);
  REQUIRE(art.report.aborted);
  CHECK(*art.report.aborted ==
        "public comparison found mismatches; eavesdropping detected");
  CHECK(*art.report.p_false < 2e-25);
}

TEST_CASE("noisy pipeline produces a final key and a prediction score") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Bb84Noisy;
  cfg.n_slots = 20000;
  cfg.eve = EveSpec::parse("opaque:0.25");
  cfg.r_max = 0.2;
  const auto art = run_session(cfg, 247);
  const auto& report = art.report;
  REQUIRE(!report.aborted);
  CHECK(std::abs(*report.raw_error_rate_estimate - 0.0625) < 0.02);
  CHECK(*report.keys_agree);
  CHECK(*report.final_key_length > 0);
  CHECK(*report.final_key_length < *report.raw_key_length);
  CHECK(report.leaked_parities > 0);
  CHECK(*report.eve_prediction_rate < 0.6);
  const bool flagged = report.k_model_mismatched.has_value() && *report.k_model_mismatched;
  CHECK(!flagged);
}

TEST_CASE("channel noise alone feeds the noisy pipeline") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Bb84Noisy;
  cfg.n_slots = 20000;
  cfg.channel.p_flip = 0.1;  // matched-basis error rate near 0.05
  const auto art = run_session(cfg, 263);
  const auto& report = art.report;
  REQUIRE(!report.aborted);
  CHECK(std::abs(*report.raw_error_rate_estimate - 0.05) < 0.02);
  CHECK(*report.keys_agree);
  CHECK(*report.final_key_length > 0);
}

TEST_CASE("the channel seed is part of the replay key") {
  auto records_with = [](std::uint64_t channel_seed) {
    SessionConfig cfg;
    cfg.protocol = ProtocolKind::Bb84;
    cfg.n_slots = 400;
    cfg.detect_m = 20;
    cfg.channel.p_loss = 0.5;
    cfg.channel.rng_seed = channel_seed;
    return run_session(cfg, 997).records;
  };
  const auto base = records_with(0);
  const auto same = records_with(0);
  const auto other = records_with(1);
  REQUIRE(base.size() == same.size());
  bool all_equal = true, any_differs = false;
  for (std::size_t i = 0; i < base.size(); ++i) {
    all_equal = all_equal && base[i].outcome == same[i].outcome;
    any_differs = any_differs || base[i].outcome != other[i].outcome;
  }
  CHECK(all_equal);
  CHECK(any_differs);
}

TEST_CASE("threshold overrun aborts the noisy pipeline") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Bb84Noisy;
  cfg.n_slots = 20000;
  cfg.eve = EveSpec::parse("opaque:1.0");
  cfg.r_max = 0.12;
  const auto art = run_session(cfg, 251);
  REQUIRE(art.report.aborted);
  CHECK(art.report.aborted->find("exceeds the configured maximum") != std::string::npos);
}

TEST_CASE("b92 session carries erasure statistics through the pipeline") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::B92;
  cfg.n_slots = 40000;
  cfg.b92_receiver = ReceiverStrategy::Kind::B92Povm;
  const auto art = run_session(cfg, 253);
  const auto& report = art.report;
  REQUIRE(!report.aborted);
  CHECK(std::abs(*report.erasure_rate - std::cos(0.7853981633974483)) < 0.02);  // cos(pi/4)
  CHECK(*report.keys_agree);
  CHECK(*report.final_key_length > 0);
}

TEST_CASE("probe strategies flag the knowledge model") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::B92;
  cfg.n_slots = 30000;
  cfg.eve = EveSpec::parse("translucent:0.6");
  cfg.r_max = 0.3;
  const auto art = run_session(cfg, 257);
  REQUIRE(!art.report.aborted);
  REQUIRE(art.report.k_model_mismatched.has_value());
  CHECK(*art.report.k_model_mismatched);
}

TEST_CASE("pair session reports the correlation statistic") {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Epr;
  cfg.n_slots = 30000;
  const auto art = run_session(cfg, 259);
  const auto& report = art.report;
  REQUIRE(!report.aborted);
  CHECK(std::abs(*report.bell_beta + 0.5) < 0.04);
  CHECK(!*report.eve_detected);
  CHECK(*report.keys_agree);
  CHECK(*report.final_key_length == static_cast<int>(art.alice_final.size()));
}

TEST_CASE("experiment aggregation and abort accounting") {
  ExperimentConfig cfg;
  cfg.session.protocol = ProtocolKind::Bb84;
  cfg.session.n_slots = 5000;
  cfg.seeds = {1, 2, 3, 4};
  const auto result = run_experiment(cfg);
  CHECK(result.sessions == 4);
  CHECK(result.aborted == 0);
  CHECK(result.report.at("per_seed").size() == 4);
  const auto& acc = result.report.at("aggregate").at("pre_sift_accuracy");
  CHECK(std::abs(acc.at("mean").get<double>() - 0.75) < 0.02);
  CHECK(acc.at("count").get<int>() == 4);
  CHECK(result.report.at("config").at("protocol") == "bb84");

  ExperimentConfig doomed = cfg;
  doomed.session.eve = EveSpec::parse("opaque:1.0");
  const auto aborted = run_experiment(doomed);
  CHECK(aborted.aborted == aborted.sessions);
  CHECK(aborted.report.at("aborts").size() == 4);
}

TEST_CASE("reports are byte-stable across runs and thread caps") {
  ExperimentConfig cfg;
  cfg.session.protocol = ProtocolKind::Epr;
  cfg.session.n_slots = 2000;
  cfg.seeds = parse_seed_list("1..6");
  const auto first = run_experiment(cfg).report.dump();
  const auto second = run_experiment(cfg).report.dump();
  CHECK(first == second);

  setenv("QKD_SIM_THREADS", "1", 1);
  const auto single_threaded = run_experiment(cfg).report.dump();
  unsetenv("QKD_SIM_THREADS");
  CHECK(first == single_threaded);
}

TEST_CASE("sweeps vary one knob") {
  ExperimentConfig cfg;
  cfg.session.protocol = ProtocolKind::Bb84;
  cfg.session.n_slots = 20000;
  cfg.seeds = {11, 12};

  const auto sweep = sweep_experiment(cfg, "lambda", {0.0, 0.5, 1.0});
  REQUIRE(sweep.report.at("rows").size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const double lambda = sweep.report.at("rows")[i].at("value").get<double>();
    const double err = sweep.report.at("rows")[i]
                           .at("aggregate")
                           .at("pre_sift_error")
                           .at("mean")
                           .get<double>();
    CHECK(std::abs(err - (0.25 + lambda / 8)) < 0.015);
  }

  std::ostringstream csv;
  sweep.write_csv(csv);
  const std::string text = csv.str();
  CHECK(text.find("value,") == 0);
  CHECK(text.find("pre_sift_error_mean") != std::string::npos);
  int lines = 0;
  for (const char c : text) lines += c == '\n';
  CHECK(lines == 4);  // header + three rows

  CHECK_THROWS_AS(sweep_experiment(cfg, "gamma", {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(sweep_experiment(cfg, "lambda", {}), std::invalid_argument);
}

TEST_CASE("config json round trip") {
  nlohmann::json j;
  j["protocol"] = "b92";
  j["n"] = 1234;
  j["eve"] = "opaque:0.75";
  j["theta"] = 0.3;
  j["receiver"] = "povm";
  j["seeds"] = "2..4";
  j["r-max"] = 0.2;
  j["block-len"] = 16;
  const auto cfg = ExperimentConfig::from_json(j);
  CHECK(cfg.session.protocol == ProtocolKind::B92);
  CHECK(cfg.session.n_slots == 1234);
  CHECK(cfg.session.eve.lambda == doctest::Approx(0.75));
  CHECK(cfg.session.theta == doctest::Approx(0.3));
  CHECK(cfg.session.b92_receiver == ReceiverStrategy::Kind::B92Povm);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{2, 3, 4});
  CHECK(*cfg.session.reconcile.block_len == 16);

  const auto echoed = cfg.to_json();
  CHECK(echoed.at("protocol") == "b92");
  CHECK(echoed.at("receiver") == "povm");
  CHECK(echoed.at("block-len") == 16);
  CHECK(ExperimentConfig::from_json(echoed).session.n_slots == 1234);

  nlohmann::json bad = j;
  bad["receiver"] = "homodyne";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
}
