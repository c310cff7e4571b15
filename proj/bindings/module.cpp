#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qkdsim/experiment.hpp"
#include "qkdsim/nogo.hpp"
#include "qkdsim/postprocess.hpp"

namespace py = pybind11;

namespace {

using CVec = std::vector<std::complex<double>>;
using CMat = std::vector<CVec>;

qkd::Ket2 to_ket2(const CVec& v) {
  if (v.size() != 2) throw std::invalid_argument("state must have 2 amplitudes");
  return qkd::make_ket<2>({v[0], v[1]});
}

CVec from_ket2(const qkd::Ket2& k) { return {k.amp[0], k.amp[1]}; }

qkd::Op2 to_op2(const CMat& m) {
  if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
    throw std::invalid_argument("operator must be a 2x2 matrix");
  qkd::Op2 op;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) op.at(r, c) = m[r][c];
  return op;
}

CMat from_op2(const qkd::Op2& op) {
  CMat m(2, CVec(2));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m[r][c] = op.at(r, c);
  return m;
}

std::vector<std::uint8_t> to_bits(const std::vector<int>& bits) {
  std::vector<std::uint8_t> out;
  out.reserve(bits.size());
  for (const int b : bits) {
    if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
    out.push_back(static_cast<std::uint8_t>(b));
  }
  return out;
}

std::vector<int> from_bits(const std::vector<std::uint8_t>& bits) {
  return std::vector<int>(bits.begin(), bits.end());
}

}  // namespace

PYBIND11_MODULE(pyqkdsim, m) {
  m.doc() = "quantum key distribution protocol simulator";

  m.def("vertical", [] { return from_ket2(qkd::vertical()); });
  m.def("horizontal", [] { return from_ket2(qkd::horizontal()); });
  m.def("diagonal_pos", [] { return from_ket2(qkd::diagonal_pos()); });
  m.def("diagonal_neg", [] { return from_ket2(qkd::diagonal_neg()); });
  m.def("circular_right", [] { return from_ket2(qkd::circular_right()); });
  m.def("circular_left", [] { return from_ket2(qkd::circular_left()); });
  m.def("linear", [](double theta) { return from_ket2(qkd::linear(theta)); }, py::arg("theta"));

  m.def(
      "bracket",
      [](const CVec& a, const CVec& b) { return qkd::bracket(to_ket2(a), to_ket2(b)); },
      py::arg("bra_of"), py::arg("ket"));

  m.def(
      "expectation",
      [](const CMat& obs, const CVec& state) {
        return qkd::expectation(to_op2(obs), to_ket2(state));
      },
      py::arg("observable"), py::arg("state"));

  m.def(
      "uncertainty_product",
      [](const CMat& a, const CMat& b, const CVec& state) {
        const auto res = qkd::uncertainty_product(to_op2(a), to_op2(b), to_ket2(state));
        return py::make_tuple(res.lhs, res.rhs);
      },
      py::arg("a"), py::arg("b"), py::arg("state"));

  m.def(
      "b92_povm",
      [](double theta) {
        const auto povm = qkd::build_b92_povm(theta);
        std::vector<std::pair<std::string, CMat>> out;
        for (const auto& [label, op] : povm.elements) out.emplace_back(label, from_op2(op));
        return out;
      },
      py::arg("theta"));

  m.def(
      "cloning_required_probe_overlap",
      [](const CVec& u, const CVec& v) -> py::object {
        const auto feas = qkd::cloning_feasibility(qkd::CloningInstance{to_ket2(u), to_ket2(v)});
        if (feas.verdict == qkd::CloningVerdict::FeasibleTrivially) return py::none();
        return py::float_(*feas.required_probe_overlap);
      },
      py::arg("u"), py::arg("v"));

  m.def(
      "reconcile",
      [](const std::vector<int>& alice, const std::vector<int>& bob, double error_rate_hint,
         std::uint64_t seed) {
        qkd::KeyMaterial a, b;
        a.stage = b.stage = qkd::KeyStage::Estimated;
        a.bits = to_bits(alice);
        b.bits = to_bits(bob);
        for (std::size_t i = 0; i < a.bits.size(); ++i) {
          a.slots.push_back(static_cast<std::uint32_t>(i));
          b.slots.push_back(static_cast<std::uint32_t>(i));
        }
        qkd::ReconcileConfig cfg;
        if (error_rate_hint > 0) cfg.error_rate_hint = error_rate_hint;
        cfg.rng_seed = seed;
        qkd::PublicTranscript transcript;
        const auto rec = qkd::reconcile(a, b, cfg, transcript);
        py::dict out;
        out["alice"] = from_bits(rec.alice.bits);
        out["bob"] = from_bits(rec.bob.bits);
        out["leaked_parities"] = rec.alice.leaked_parities;
        out["aborted"] = rec.stats.aborted.has_value();
        return out;
      },
      py::arg("alice"), py::arg("bob"), py::arg("error_rate_hint"), py::arg("seed"));

  m.def(
      "privacy_amplify",
      [](const std::vector<int>& bits, int k, int s, std::uint64_t seed) {
        qkd::KeyMaterial key;
        key.stage = qkd::KeyStage::Reconciled;
        key.bits = to_bits(bits);
        for (std::size_t i = 0; i < key.bits.size(); ++i)
          key.slots.push_back(static_cast<std::uint32_t>(i));
        qkd::AmplifyConfig cfg;
        cfg.s = s;
        cfg.k_override = k;
        cfg.rng_seed = seed;
        qkd::PublicTranscript transcript;
        const auto amp = qkd::privacy_amplify(key, cfg, 0.0, transcript);
        if (amp.aborted) throw std::invalid_argument(*amp.aborted);
        return from_bits(amp.key.bits);
      },
      py::arg("bits"), py::arg("k"), py::arg("s"), py::arg("seed"));

  m.def(
      "run_experiment_json",
      [](const std::string& config_json) {
        const auto cfg = qkd::ExperimentConfig::from_json(nlohmann::json::parse(config_json));
        return qkd::run_experiment(cfg).report.dump();
      },
      py::arg("config_json"));
}
