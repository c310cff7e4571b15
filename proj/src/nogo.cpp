#include "qkdsim/nogo.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

Ket2 blank_probe() { return vertical(); }

// Contract the carrier factor against `carrier` in a carrier (x) probe state.
Ket2 extract_probe(const Ket4& state, const Ket2& carrier) {
  Ket2 probe;
  for (int j = 0; j < 2; ++j) {
    cplx s = 0;
    for (int i = 0; i < 2; ++i) s += std::conj(carrier.amp[i]) * state.amp[2 * i + j];
    probe.amp[j] = s;
  }
  return probe;
}

}  // namespace

CloningFeasibility cloning_feasibility(const CloningInstance& inst) {
  const double overlap = std::abs(inst.overlap());
  if (overlap < kAlgebraTol || overlap > 1.0 - kAlgebraTol)
    return CloningFeasibility{CloningVerdict::FeasibleTrivially, std::nullopt};
  // Duplicating both states would need <Psi'|Psi''> <u|v>^2 = <u|v>, i.e. a
  // probe overlap of magnitude 1/|<u|v>| > 1.
  return CloningFeasibility{CloningVerdict::Infeasible, 1.0 / overlap};
}

double cloning_deviation(const Op4& u, const Ket2& x) {
  const Ket4 input = tensor(blank_probe(), x);
  const Ket4 target = tensor(x, x);
  const Ket4 image = apply(u, input);
  const double fidelity = std::norm(bracket(target, image));
  return 1.0 - std::min(1.0, fidelity);
}

CloningSearchResult cloning_search(int trials, double overlap, SeededRng& rng) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (!(overlap > 0.0 && overlap < 1.0))
    throw std::invalid_argument("search needs a strictly partial overlap");
  CloningSearchResult result;
  result.trials = trials;
  result.min_over_unitaries = 2.0;
  constexpr double kTwoPi = 6.28318530717958647692;
  for (int t = 0; t < trials; ++t) {
    const Op4 u = random_unitary4(rng);
    const Ket2 first = random_ket2(rng);
    const Ket2 perp = orthogonal_complement(first);
    const double phase = kTwoPi * rng.next_double();
    const double sin_part = std::sqrt(1.0 - overlap * overlap);
    Ket2 second;
    for (int i = 0; i < 2; ++i)
      second.amp[i] =
          overlap * first.amp[i] + sin_part * std::polar(1.0, phase) * perp.amp[i];
    const double dev = std::max(cloning_deviation(u, first), cloning_deviation(u, second));
    result.min_over_unitaries = std::min(result.min_over_unitaries, dev);
    result.max_over_unitaries = std::max(result.max_over_unitaries, dev);
  }
  return result;
}

Op4 orthogonal_pair_copier(const Ket2& u, const Ket2& v) {
  if (std::abs(bracket(u, v)) > kSumTol)
    throw std::invalid_argument("copier construction needs an orthogonal pair");
  const std::array<Ket4, 2> from{tensor(blank_probe(), u), tensor(blank_probe(), v)};
  const std::array<Ket4, 2> to{tensor(u, u), tensor(v, v)};
  return unitary_from_pairs(from, to);
}

UndetectableVerdict undetectable_implies_uninformed(const Op4& u, const Ket2& a, const Ket2& b,
                                                    double tol) {
  if (!u.is_unitary(kAlgebraTol)) throw std::invalid_argument("probe interaction must be unitary");
  const double carrier_overlap = std::abs(bracket(a, b));
  if (carrier_overlap < 1e-9)
    throw std::invalid_argument("the argument needs non-orthogonal carriers");

  const Ket4 image_a = apply(u, tensor(a, blank_probe()));
  const Ket4 image_b = apply(u, tensor(b, blank_probe()));

  // Residual of the carrier-preserving form |a>|Psi'>: the part of the image
  // outside the a-carrier subspace.
  const Op4 keep_a = tensor(outer(a, a), Op2::identity());
  const Op4 keep_b = tensor(outer(b, b), Op2::identity());
  auto residual = [](const Op4& keep, const Ket4& image) {
    const Ket4 kept = apply(keep, image);
    double r = 0;
    for (int i = 0; i < 4; ++i) r += std::norm(image.amp[i] - kept.amp[i]);
    return r;
  };

  UndetectableVerdict verdict;
  verdict.carrier_residual_u = residual(keep_a, image_a);
  verdict.carrier_residual_v = residual(keep_b, image_b);
  const double ra = verdict.carrier_residual_u;
  const double rb = verdict.carrier_residual_v;
  verdict.derived_tolerance =
      (std::sqrt(ra) + std::sqrt(rb) + std::sqrt(ra * rb)) / carrier_overlap + 1e-10;
  verdict.undetectable = ra <= tol && rb <= tol;
  if (!verdict.undetectable) return verdict;

  const Ket2 probe_a = extract_probe(image_a, a).normalized();
  const Ket2 probe_b = extract_probe(image_b, b).normalized();
  verdict.probe_overlap = bracket(probe_a, probe_b);
  verdict.overlap_deficit = std::abs(*verdict.probe_overlap - cplx(1, 0));
  return verdict;
}

Op4 random_carrier_preserving_unitary(const Ket2& a, const Ket2& b, SeededRng& rng) {
  if (std::abs(bracket(a, b)) < 1e-9)
    throw std::invalid_argument("carrier-preserving construction needs non-orthogonal carriers");
  // Preserving both carriers forces a single post-interaction probe state;
  // only that state is free here.
  const Ket2 probe_after = random_ket2(rng);
  const std::array<Ket4, 2> from{tensor(a, blank_probe()), tensor(b, blank_probe())};
  const std::array<Ket4, 2> to{tensor(a, probe_after), tensor(b, probe_after)};
  return unitary_from_pairs(from, to);
}

}  // namespace qkd
