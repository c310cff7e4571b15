#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qkdsim/rng.hpp"

namespace qkd {

using cplx = std::complex<double>;

// Tolerance tiers: single algebraic identities vs. accumulated sums.
inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kSumTol = 1e-10;

// Unit vector in the fixed reference basis {vertical, horizontal}.
// Dimension 2 is a single photon, dimension 4 a photon pair or a
// carrier/probe composite in the product basis
// {v1 v2, v1 h2, h1 v2, h1 h2}.
template <std::size_t N>
struct Ket {
  std::array<cplx, N> amp{};

  double norm() const;
  Ket normalized() const;  // throws on the zero vector
  bool is_unit(double tol = kAlgebraTol) const;
};

using Ket2 = Ket<2>;
using Ket4 = Ket<4>;

template <std::size_t N>
Ket<N> make_ket(const std::array<cplx, N>& amplitudes);  // normalizes

// d x d complex matrix, d in {2, 4}. Hermiticity and unitarity are
// observations about the entries, never assumptions.
template <std::size_t N>
struct Operator {
  std::array<cplx, static_cast<std::size_t>(N) * N> m{};

  cplx& at(int r, int c) { return m[static_cast<std::size_t>(r) * N + c]; }
  const cplx& at(int r, int c) const { return m[static_cast<std::size_t>(r) * N + c]; }

  static Operator identity();
  static Operator zero();

  Operator adjoint() const;
  bool is_hermitian(double tol = kAlgebraTol) const;
  bool is_unitary(double tol = kAlgebraTol) const;
  double frobenius_norm() const;

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator scaled(cplx factor) const;
};

using Op2 = Operator<2>;
using Op4 = Operator<4>;

// --- fixed polarization states -------------------------------------------

Ket2 vertical();         // reference basis, first element
Ket2 horizontal();       // reference basis, second element
Ket2 diagonal_pos();     // +45 degrees off the vertical
Ket2 diagonal_neg();     // -45 degrees off the vertical
Ket2 circular_right();   // (v - i h)/sqrt(2)
Ket2 circular_left();    // (v + i h)/sqrt(2)
Ket2 linear(double theta);          // cos(theta) v + sin(theta) h
Ket2 orthogonal_complement(const Ket2& k);

// --- elementary algebra ----------------------------------------------------

template <std::size_t N>
cplx bracket(const Ket<N>& bra_of, const Ket<N>& ket);

Ket4 tensor(const Ket2& left, const Ket2& right);
Op4 tensor(const Op2& left, const Op2& right);

template <std::size_t N>
Ket<N> apply(const Operator<N>& op, const Ket<N>& state);  // no unitarity demand

// Throws unless op is unitary within kAlgebraTol.
template <std::size_t N>
Ket<N> apply_unitary(const Operator<N>& u, const Ket<N>& state);

template <std::size_t N>
Operator<N> outer(const Ket<N>& ket, const Ket<N>& bra_of);  // |ket><bra|

template <std::size_t N>
Operator<N> commutator(const Operator<N>& a, const Operator<N>& b);

// <psi|A|psi> for hermitian A; throws otherwise.
template <std::size_t N>
double expectation(const Operator<N>& obs, const Ket<N>& state);

struct UncertaintyProduct {
  double lhs;  // variance product <(dA)^2><(dB)^2>
  double rhs;  // (1/4) |<[A,B]>|^2
};

template <std::size_t N>
UncertaintyProduct uncertainty_product(const Operator<N>& a, const Operator<N>& b,
                                       const Ket<N>& state);

// --- measurement -----------------------------------------------------------

// Projective measurement in a complete orthonormal basis. Returns the chosen
// index and the post-measurement state (exactly the chosen eigenket).
// Sampling is a single inverse-CDF draw in basis order.
template <std::size_t N>
std::pair<int, Ket<N>> measure_projective(const Ket<N>& state,
                                          const std::array<Ket<N>, N>& eigenkets,
                                          SeededRng& rng);

// Two-outcome measurement of one factor of a pair state; the other factor is
// left alone and the residual is renormalized (degenerate projection, not a
// jump to a basis ket).
std::pair<int, Ket4> measure_factor(const Ket4& state, int factor,
                                    const std::array<Ket2, 2>& basis, SeededRng& rng);

struct Povm {
  std::vector<std::pair<std::string, Op2>> elements;

  // Elements must be PSD and sum to the identity within kSumTol.
  void validate() const;  // throws std::invalid_argument
};

// Destructive generalized measurement; returns the element index.
int measure_povm(const Ket2& state, const Povm& povm, SeededRng& rng);

// --- predicates and helpers -------------------------------------------------

// Physical equality: |<a|b>| = 1 within tol (global phase is not quotiented
// in storage).
template <std::size_t N>
bool same_physical_state(const Ket<N>& a, const Ket<N>& b, double tol = kAlgebraTol);

template <std::size_t N>
bool is_orthonormal_basis(const std::array<Ket<N>, N>& kets, double tol = kSumTol);

// Unitary with f_i = U e_i for two Gram-matched vector pairs, completed by
// orthonormalization; used by probe couplings and randomized searches.
Op4 unitary_from_pairs(const std::array<Ket4, 2>& from, const std::array<Ket4, 2>& to);

Op2 random_hermitian2(SeededRng& rng);
Ket2 random_ket2(SeededRng& rng);
Op4 random_unitary4(SeededRng& rng);

}  // namespace qkd
