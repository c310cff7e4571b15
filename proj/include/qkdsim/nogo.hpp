#pragma once

#include <optional>
#include <string>

#include "qkdsim/hilbert.hpp"
#include "qkdsim/rng.hpp"

namespace qkd {

// A candidate pair for duplication. The interesting case is a strictly
// partial overlap; orthogonal or identical pairs are copyable.
struct CloningInstance {
  Ket2 u;
  Ket2 v;

  cplx overlap() const { return bracket(u, v); }
};

enum class CloningVerdict { Infeasible, FeasibleTrivially };

struct CloningFeasibility {
  CloningVerdict verdict;
  // Probe overlap a replicator would need; magnitude above 1 is the witness
  // of infeasibility.
  std::optional<double> required_probe_overlap;
};

// Cloning both states forces probe overlap 1/<u|v>, impossible whenever
// 0 < |<u|v>| < 1.
CloningFeasibility cloning_feasibility(const CloningInstance& inst);

// How far U(|blank>|x>) is from the duplicated form |x>|x>, as an infidelity
// in [0, 1].
double cloning_deviation(const Op4& u, const Ket2& x);

struct CloningSearchResult {
  double min_over_unitaries = 0;  // of the worse deviation across the pair
  double max_over_unitaries = 0;
  int trials = 0;
};

// Randomized corroboration: for `trials` random unitaries and non-orthogonal
// pairs with |<u|v>| = overlap, no unitary brings both deviations near zero.
CloningSearchResult cloning_search(int trials, double overlap, SeededRng& rng);

// Explicit duplicator for an orthonormal pair; residual zero is achievable
// there.
Op4 orthogonal_pair_copier(const Ket2& u, const Ket2& v);

struct UndetectableVerdict {
  bool undetectable = false;
  double carrier_residual_u = 0;  // squared distance from carrier-preserving form
  double carrier_residual_v = 0;
  std::optional<cplx> probe_overlap;      // <Psi'|Psi''> when undetectable
  std::optional<double> overlap_deficit;  // |overlap - 1|, bounded by derived_tolerance
  double derived_tolerance = 0;
};

// Checks whether U fixes both carriers (undetectability) and, if so, that the
// two probe states are the same state, i.e. Eve learned nothing. The overlap
// tolerance is derived from the carrier residuals and |<a|b>|.
UndetectableVerdict undetectable_implies_uninformed(const Op4& u, const Ket2& a, const Ket2& b,
                                                    double tol);

// Random unitary that fixes both carriers on the given non-orthogonal pair by
// construction (the conclusion then demands a common probe state).
Op4 random_carrier_preserving_unitary(const Ket2& a, const Ket2& b, SeededRng& rng);

}  // namespace qkd
