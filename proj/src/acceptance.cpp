#include "qkdsim/acceptance.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "qkdsim/experiment.hpp"
#include "qkdsim/nogo.hpp"
#include "qkdsim/postprocess.hpp"

namespace qkd {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Check {
  std::string name;
  std::function<void()> body;
};

void expect(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

void expect_near(double actual, double wanted, double tol, const std::string& what) {
  if (!(std::abs(actual - wanted) <= tol)) {
    std::ostringstream msg;
    msg << what << ": got " << std::setprecision(12) << actual << ", wanted " << wanted
        << " within " << tol;
    throw std::runtime_error(msg.str());
  }
}

// 01: the 36 bracket products of the six polarization kets.
void check_bracket_table() {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx ir(0, r);
  const cplx pp(0.5, 0.5);   // (1+i)/2
  const cplx pm(0.5, -0.5);  // (1-i)/2
  const std::array<Ket2, 6> kets{vertical(),     horizontal(),    diagonal_pos(),
                                 diagonal_neg(), circular_right(), circular_left()};
  const cplx table[6][6] = {
      {1, 0, r, r, r, r},
      {0, 1, r, -r, -ir, ir},
      {r, r, 1, 0, pm, pp},
      {r, -r, 0, 1, pp, pm},
      {r, ir, pp, pm, 1, 0},
      {r, -ir, pm, pp, 0, 1},
  };
  for (int row = 0; row < 6; ++row)
    for (int col = 0; col < 6; ++col) {
      const cplx got = bracket(kets[row], kets[col]);
      expect(std::abs(got - table[row][col]) <= kAlgebraTol,
             "bracket entry (" + std::to_string(row) + "," + std::to_string(col) + ") off");
    }
}

// 02: reception probability 3/4 with neither noise nor eavesdropping.
void check_bb84_reception() {
  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Bb84;
  cfg.n_slots = 100000;
  const auto art = run_session(cfg, 11);
  expect(art.report.pre_sift_accuracy.has_value(), "accuracy missing");
  expect_near(*art.report.pre_sift_accuracy, 0.75, 0.01, "pre-sift accuracy");
}

// 03: error rate 1/4 + lambda/8 across intensities.
void check_error_rate_jump() {
  const double lambdas[3] = {0.0, 0.5, 1.0};
  for (int i = 0; i < 3; ++i) {
    SessionConfig cfg;
    cfg.protocol = ProtocolKind::Bb84;
    cfg.n_slots = 100000;
    if (lambdas[i] > 0) {
      cfg.eve.kind = EveSpec::Kind::Opaque;
      cfg.eve.lambda = lambdas[i];
    }
    const auto art = run_session(cfg, 13 + i);
    const double error = 1.0 - *art.report.pre_sift_accuracy;
    expect_near(error, 0.25 + lambdas[i] / 8.0, 0.01,
                "pre-sift error at lambda=" + std::to_string(lambdas[i]));
  }
}

// 04: sifted keys disagree at rate lambda/4 = 1/4 under full interception.
void check_raw_disagreement() {
  SeededRng rng(17);
  EveStrategy eve = EveStrategy::opaque(1.0);
  const auto records = bb84_stage1(120000, QuantumChannelConfig{}, eve, rng);
  PublicTranscript transcript;
  const auto [alice, bob] = sift(records, transcript);
  expect(alice.size() >= 50000, "need at least 5e4 sifted bits");
  long mismatches = 0;
  for (std::size_t i = 0; i < alice.size(); ++i) mismatches += (alice.bits[i] != bob.bits[i]);
  expect_near(static_cast<double>(mismatches) / static_cast<double>(alice.size()), 0.25, 0.01,
              "raw-key disagreement");
}

// 05: detection frequency 1-(3/4)^20 over 1e4 sessions, and the closed-form
// escape probability at m=200.
void check_detection_probability() {
  int detected = 0;
  const int sessions = 10000;
  for (int s = 0; s < sessions; ++s) {
    SeededRng rng(900000 + s);
    EveStrategy eve = EveStrategy::opaque(1.0);
    const auto records = bb84_stage1(100, QuantumChannelConfig{}, eve, rng);
    PublicTranscript transcript;
    const auto [alice, bob] = sift(records, transcript);
    const auto det = detect_noiseless(alice, bob, 20, 1.0, rng, transcript);
    detected += det.clean ? 0 : 1;
  }
  const double frequency = static_cast<double>(detected) / sessions;
  expect_near(frequency, 1.0 - std::pow(0.75, 20), 0.005, "detection frequency at m=20");

  SeededRng rng(77);
  EveStrategy eve = EveStrategy::opaque(1.0);
  const auto records = bb84_stage1(600, QuantumChannelConfig{}, eve, rng);
  PublicTranscript transcript;
  const auto [alice, bob] = sift(records, transcript);
  const auto det = detect_noiseless(alice, bob, 200, 1.0, rng, transcript);
  const double reference = std::pow(0.75, 200);
  expect(std::abs(det.p_false - reference) <= 1e-6 * reference,
         "p_false at m=200 deviates from (3/4)^200");
}

// 06: projective receiver erasure and correct-reception rates at theta=pi/8.
void check_b92_projective() {
  SeededRng rng(23);
  EveStrategy eve = EveStrategy::none();
  const auto records = b92_stage1(100000, kPi / 8.0, ReceiverStrategy::Kind::B92Projective,
                                  QuantumChannelConfig{}, eve, rng);
  long erasures = 0, correct = 0;
  for (const auto& r : records) {
    if (r.outcome == BobOutcome::Erasure)
      ++erasures;
    else if (r.bob_bit() && *r.bob_bit() == r.alice_bit)
      ++correct;
  }
  const double n = static_cast<double>(records.size());
  expect_near(erasures / n, 0.75, 0.01, "b92 projective erasure rate");
  expect_near(correct / n, 0.25, 0.01, "b92 projective correct-reception rate");
}

// 07: POVM receiver inconclusive rate cos(pi/4) and zero wrong bits.
void check_b92_povm() {
  SeededRng rng(29);
  EveStrategy eve = EveStrategy::none();
  const auto records = b92_stage1(100000, kPi / 8.0, ReceiverStrategy::Kind::B92Povm,
                                  QuantumChannelConfig{}, eve, rng);
  long inconclusive = 0, wrong = 0;
  for (const auto& r : records) {
    if (r.outcome == BobOutcome::Erasure)
      ++inconclusive;
    else if (r.bob_bit() && *r.bob_bit() != r.alice_bit)
      ++wrong;
  }
  const double n = static_cast<double>(records.size());
  expect_near(inconclusive / n, std::cos(kPi / 4.0), 0.01, "b92 povm inconclusive rate");
  expect(wrong == 0, "povm receiver produced a wrong bit on a noiseless channel");
}

// 08: Bell statistic -1/2 without Eve; local-hidden-variable range with full
// intercept-resend.
void check_bell_statistic() {
  const EprSource source = EprSource::standard();
  {
    SeededRng rng(31);
    EveStrategy eve = EveStrategy::none();
    const auto records = epr_stage1(100000, source, eve, rng);
    PublicTranscript transcript;
    const auto split = epr_split(records, transcript);
    const auto bell = bell_test(split.rejected);
    expect_near(bell.beta, -0.5, 0.02, "Bell beta without Eve");
    expect(!bell.eve_detected, "no-Eve run flagged as eavesdropped");
  }
  {
    SeededRng rng(37);
    EveStrategy eve = EveStrategy::opaque(1.0);
    const auto records = epr_stage1(100000, source, eve, rng);
    PublicTranscript transcript;
    const auto split = epr_split(records, transcript);
    const auto bell = bell_test(split.rejected);
    expect(bell.beta >= -2.0 * bell.standard_error,
           "intercept-resend beta fell below the LHV range");
    expect(bell.eve_detected, "intercept-resend run not flagged");
  }
}

// 09: equal-operator slots agree exactly without Eve.
void check_epr_agreement() {
  SeededRng rng(41);
  EveStrategy eve = EveStrategy::none();
  const auto records = epr_stage1(100000, EprSource::standard(), eve, rng);
  PublicTranscript transcript;
  const auto split = epr_split(records, transcript);
  expect(split.alice_raw.size() > 0, "no raw key");
  expect(split.alice_raw.bits == split.bob_raw.bits, "raw keys disagree on equal operators");
}

// 10: cascade reconciliation on 1e4-bit keys with 5% errors, 100 seeds.
void check_reconciliation() {
  int identical = 0;
  for (int seed = 0; seed < 100; ++seed) {
    SeededRng rng(4000 + seed);
    KeyMaterial alice, bob;
    alice.stage = bob.stage = KeyStage::Estimated;
    for (int i = 0; i < 10000; ++i) {
      const std::uint8_t bit = static_cast<std::uint8_t>(rng.next_bit());
      const std::uint8_t flipped = rng.bernoulli(0.05) ? static_cast<std::uint8_t>(1 - bit) : bit;
      alice.bits.push_back(bit);
      alice.slots.push_back(static_cast<std::uint32_t>(i));
      bob.bits.push_back(flipped);
      bob.slots.push_back(static_cast<std::uint32_t>(i));
    }
    ReconcileConfig cfg;
    cfg.error_rate_hint = 0.05;
    cfg.rng_seed = 0xC0FFEE + seed;
    PublicTranscript transcript;
    const auto rec = reconcile(alice, bob, cfg, transcript);
    expect(!rec.stats.aborted, "reconciliation exhausted the key");
    identical += (rec.alice.bits == rec.bob.bits);
    const int derived = reconcile_removals_from_transcript(transcript);
    const int actual = static_cast<int>(alice.size() - rec.alice.size());
    expect(derived == actual, "transcript-derived removal count mismatch at seed " +
                                  std::to_string(seed) + ": " + std::to_string(derived) + " vs " +
                                  std::to_string(actual));
  }
  expect(identical >= 99, "only " + std::to_string(identical) + "/100 seeds reconciled cleanly");
}

// 11: privacy amplification length contract and the Eve prediction ceiling.
void check_privacy_amplification() {
  SeededRng rng(53);
  int checked = 0;
  while (checked < 100) {
    const int n = 80 + static_cast<int>(rng.next_below(3000));
    const int k = static_cast<int>(rng.next_below(n / 2));
    const int s = 1 + static_cast<int>(rng.next_below(40));
    if (n - k - s < 1) continue;
    KeyMaterial key;
    key.stage = KeyStage::Reconciled;
    for (int i = 0; i < n; ++i) {
      key.bits.push_back(static_cast<std::uint8_t>(rng.next_bit()));
      key.slots.push_back(static_cast<std::uint32_t>(i));
    }
    AmplifyConfig cfg;
    cfg.s = s;
    cfg.k_override = k;
    cfg.rng_seed = rng.next_u64();
    PublicTranscript transcript;
    const auto amp = privacy_amplify(key, cfg, 0.0, transcript);
    expect(!amp.aborted, "unexpected amplification abort");
    expect(static_cast<int>(amp.key.size()) == n - k - s, "final length != n-k-s");
    ++checked;
  }

  SessionConfig cfg;
  cfg.protocol = ProtocolKind::Bb84Noisy;
  cfg.n_slots = 30000;
  cfg.eve.kind = EveSpec::Kind::Opaque;
  cfg.eve.lambda = 1.0;
  cfg.r_max = 0.35;
  cfg.amplify.s = 30;
  double rate_sum = 0;
  int completed = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const auto art = run_session(cfg, 6000 + seed);
    expect(!art.report.aborted.has_value(),
           "pipeline aborted at seed " + std::to_string(seed) +
               (art.report.aborted ? ": " + *art.report.aborted : ""));
    expect(art.report.eve_prediction_rate.has_value(), "prediction rate missing");
    rate_sum += *art.report.eve_prediction_rate;
    ++completed;
  }
  const double mean_rate = rate_sum / completed;
  expect(mean_rate <= 0.52, "Eve predicted " + std::to_string(mean_rate) + " of final key bits");
}

// 12: duplicating any strictly-overlapping pair needs probe overlap above 1.
void check_no_cloning() {
  SeededRng rng(59);
  for (int t = 0; t < 10000; ++t) {
    const Ket2 u = random_ket2(rng);
    const Ket2 perp = orthogonal_complement(u);
    const double c = 0.05 + 0.9 * rng.next_double();
    const double phase = 2 * kPi * rng.next_double();
    Ket2 v;
    for (int i = 0; i < 2; ++i)
      v.amp[i] = c * u.amp[i] + std::sqrt(1 - c * c) * std::polar(1.0, phase) * perp.amp[i];
    const auto feas = cloning_feasibility(CloningInstance{u, v});
    expect(feas.verdict == CloningVerdict::Infeasible, "overlapping pair judged copyable");
    expect(*feas.required_probe_overlap > 1.0, "required probe overlap not above 1");
  }
}

// 13: carrier-preserving probes learn nothing; the probe family's
// detectability and information vanish together and grow together.
void check_undetectable_uninformed() {
  SeededRng rng(61);
  for (int t = 0; t < 1000; ++t) {
    Ket2 a = random_ket2(rng);
    Ket2 b = random_ket2(rng);
    if (std::abs(bracket(a, b)) < 0.05) {
      --t;
      continue;
    }
    const Op4 u = random_carrier_preserving_unitary(a, b, rng);
    const auto verdict = undetectable_implies_uninformed(u, a, b, 1e-10);
    expect(verdict.undetectable, "constructed unitary not carrier-preserving");
    expect(*verdict.overlap_deficit <= 1e-10, "probe overlap strayed from 1");
  }

  const double theta = kPi / 8.0;
  double previous_residual = -1, previous_info = -1;
  for (int i = 0; i <= 9; ++i) {
    const double s = i / 9.0;
    const EveStrategy eve = build_translucent(theta, s);
    const auto verdict = undetectable_implies_uninformed(eve.interaction(), linear(theta),
                                                         linear(-theta), 1e-10);
    const double residual =
        std::max(verdict.carrier_residual_u, verdict.carrier_residual_v);
    const double info = 1.0 - std::abs(eve.probe_overlap());
    if (i == 0) {
      expect(residual <= 1e-10 && info <= 1e-12, "zero-strength probe not idle");
    } else {
      expect(residual > 1e-10 && info > 1e-12, "information without disturbance found");
    }
    expect(residual >= previous_residual - 1e-12 && info >= previous_info - 1e-12,
           "disturbance or information decreased along the sweep");
    previous_residual = residual;
    previous_info = info;
  }
}

// 14: variance-product inequality on random observable pairs and states.
void check_uncertainty() {
  SeededRng rng(67);
  for (int t = 0; t < 10000; ++t) {
    const Op2 a = random_hermitian2(rng);
    const Op2 b = random_hermitian2(rng);
    const Ket2 psi = random_ket2(rng);
    const auto res = uncertainty_product(a, b, psi);
    expect(res.lhs >= res.rhs - 1e-10, "variance product below the commutator bound");
  }
}

// 15: identical seeds and configs give byte-identical reports.
void check_determinism() {
  auto render = [](const ExperimentConfig& cfg) {
    return run_experiment(cfg).report.dump();
  };
  {
    ExperimentConfig cfg;
    cfg.session.protocol = ProtocolKind::Bb84;
    cfg.session.n_slots = 2000;
    cfg.seeds = {1, 2, 3, 4, 5};
    expect(render(cfg) == render(cfg), "bb84 reports differ across reruns");
  }
  {
    ExperimentConfig cfg;
    cfg.session.protocol = ProtocolKind::B92;
    cfg.session.n_slots = 4000;
    cfg.session.b92_receiver = ReceiverStrategy::Kind::B92Povm;
    cfg.session.eve = EveSpec::parse("opaque:0.25");
    cfg.session.r_max = 0.35;
    cfg.seeds = {7, 8};
    expect(render(cfg) == render(cfg), "b92 reports differ across reruns");
  }
  {
    ExperimentConfig cfg;
    cfg.session.protocol = ProtocolKind::Epr;
    cfg.session.n_slots = 3000;
    cfg.seeds = parse_seed_list("1..4");
    expect(render(cfg) == render(cfg), "epr reports differ across reruns");
  }
}

}  // namespace

int run_acceptance(std::ostream& out) {
  const std::vector<Check> checks{
      {"bracket-table golden values", check_bracket_table},
      {"bb84 reception probability 3/4", check_bb84_reception},
      {"error-rate jump 1/4 + lambda/8", check_error_rate_jump},
      {"raw-key disagreement lambda/4", check_raw_disagreement},
      {"detection frequency and p_false", check_detection_probability},
      {"b92 projective receiver rates", check_b92_projective},
      {"b92 povm receiver rates", check_b92_povm},
      {"EPR Bell statistic", check_bell_statistic},
      {"EPR raw-key agreement", check_epr_agreement},
      {"cascade reconciliation", check_reconciliation},
      {"privacy amplification", check_privacy_amplification},
      {"no-cloning constraint", check_no_cloning},
      {"undetectable implies uninformed", check_undetectable_uninformed},
      {"uncertainty inequality", check_uncertainty},
      {"determinism of reports", check_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    std::string verdict = "PASS";
    std::string detail;
    try {
      checks[i].body();
    } catch (const std::exception& e) {
      verdict = "FAIL";
      detail = e.what();
      ++failures;
    }
    out << '[' << std::setw(2) << (i + 1) << "/15] " << verdict << "  " << checks[i].name;
    if (!detail.empty()) out << "  -- " << detail;
    out << '\n';
  }
  out << (failures == 0 ? "all acceptance criteria passed"
                        : std::to_string(failures) + " acceptance criteria failed")
      << '\n';
  return failures;
}

}  // namespace qkd
