#include "qkdsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

// --- Ket --------------------------------------------------------------------

template <std::size_t N>
double Ket<N>::norm() const {
  double s = 0;
  for (const auto& a : amp) s += std::norm(a);
  return std::sqrt(s);
}

template <std::size_t N>
Ket<N> Ket<N>::normalized() const {
  const double n = norm();
  if (n < 1e-300) throw std::invalid_argument("cannot normalize the zero vector");
  Ket<N> out;
  for (std::size_t i = 0; i < N; ++i) out.amp[i] = amp[i] / n;
  return out;
}

template <std::size_t N>
bool Ket<N>::is_unit(double tol) const {
  return std::abs(norm() - 1.0) <= tol;
}

template <std::size_t N>
Ket<N> make_ket(const std::array<cplx, N>& amplitudes) {
  Ket<N> k{amplitudes};
  return k.normalized();
}

// --- Operator ----------------------------------------------------------------

template <std::size_t N>
Operator<N> Operator<N>::identity() {
  Operator<N> op;
  for (std::size_t i = 0; i < N; ++i) op.at(i, i) = 1.0;
  return op;
}

template <std::size_t N>
Operator<N> Operator<N>::zero() {
  return Operator<N>{};
}

template <std::size_t N>
Operator<N> Operator<N>::adjoint() const {
  Operator<N> out;
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) out.at(r, c) = std::conj(at(c, r));
  return out;
}

template <std::size_t N>
bool Operator<N>::is_hermitian(double tol) const {
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c)
      if (std::abs(at(r, c) - std::conj(at(c, r))) > tol) return false;
  return true;
}

template <std::size_t N>
bool Operator<N>::is_unitary(double tol) const {
  const Operator<N> probe = adjoint() * (*this) - identity();
  for (const auto& e : probe.m)
    if (std::abs(e) > tol) return false;
  return true;
}

template <std::size_t N>
double Operator<N>::frobenius_norm() const {
  double s = 0;
  for (const auto& e : m) s += std::norm(e);
  return std::sqrt(s);
}

template <std::size_t N>
Operator<N> Operator<N>::operator+(const Operator& o) const {
  Operator<N> out;
  for (std::size_t i = 0; i < m.size(); ++i) out.m[i] = m[i] + o.m[i];
  return out;
}

template <std::size_t N>
Operator<N> Operator<N>::operator-(const Operator& o) const {
  Operator<N> out;
  for (std::size_t i = 0; i < m.size(); ++i) out.m[i] = m[i] - o.m[i];
  return out;
}

template <std::size_t N>
Operator<N> Operator<N>::operator*(const Operator& o) const {
  Operator<N> out;
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) {
      cplx s = 0;
      for (std::size_t k = 0; k < N; ++k) s += at(r, k) * o.at(k, c);
      out.at(r, c) = s;
    }
  return out;
}

template <std::size_t N>
Operator<N> Operator<N>::scaled(cplx factor) const {
  Operator<N> out;
  for (std::size_t i = 0; i < m.size(); ++i) out.m[i] = m[i] * factor;
  return out;
}

// --- fixed states --------------------------------------------------------------

Ket2 vertical() { return Ket2{{cplx(1, 0), cplx(0, 0)}}; }
Ket2 horizontal() { return Ket2{{cplx(0, 0), cplx(1, 0)}}; }

Ket2 diagonal_pos() {
  const double r = 1.0 / std::sqrt(2.0);
  return Ket2{{cplx(r, 0), cplx(r, 0)}};
}

Ket2 diagonal_neg() {
  const double r = 1.0 / std::sqrt(2.0);
  return Ket2{{cplx(r, 0), cplx(-r, 0)}};
}

Ket2 circular_right() {
  const double r = 1.0 / std::sqrt(2.0);
  return Ket2{{cplx(r, 0), cplx(0, -r)}};
}

Ket2 circular_left() {
  const double r = 1.0 / std::sqrt(2.0);
  return Ket2{{cplx(r, 0), cplx(0, r)}};
}

Ket2 linear(double theta) {
  return Ket2{{cplx(std::cos(theta), 0), cplx(std::sin(theta), 0)}};
}

Ket2 orthogonal_complement(const Ket2& k) {
  return Ket2{{-std::conj(k.amp[1]), std::conj(k.amp[0])}};
}

// --- elementary algebra -----------------------------------------------------

template <std::size_t N>
cplx bracket(const Ket<N>& bra_of, const Ket<N>& ket) {
  cplx s = 0;
  for (std::size_t i = 0; i < N; ++i) s += std::conj(bra_of.amp[i]) * ket.amp[i];
  return s;
}

Ket4 tensor(const Ket2& left, const Ket2& right) {
  Ket4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.amp[2 * i + j] = left.amp[i] * right.amp[j];
  return out;
}

Op4 tensor(const Op2& left, const Op2& right) {
  Op4 out;
  for (int r1 = 0; r1 < 2; ++r1)
    for (int c1 = 0; c1 < 2; ++c1)
      for (int r2 = 0; r2 < 2; ++r2)
        for (int c2 = 0; c2 < 2; ++c2)
          out.at(2 * r1 + r2, 2 * c1 + c2) = left.at(r1, c1) * right.at(r2, c2);
  return out;
}

template <std::size_t N>
Ket<N> apply(const Operator<N>& op, const Ket<N>& state) {
  Ket<N> out;
  for (std::size_t r = 0; r < N; ++r) {
    cplx s = 0;
    for (std::size_t c = 0; c < N; ++c) s += op.at(r, c) * state.amp[c];
    out.amp[r] = s;
  }
  return out;
}

template <std::size_t N>
Ket<N> apply_unitary(const Operator<N>& u, const Ket<N>& state) {
  if (!u.is_unitary(kAlgebraTol)) throw std::invalid_argument("operator is not unitary");
  return apply(u, state);
}

template <std::size_t N>
Operator<N> outer(const Ket<N>& ket, const Ket<N>& bra_of) {
  Operator<N> out;
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) out.at(r, c) = ket.amp[r] * std::conj(bra_of.amp[c]);
  return out;
}

template <std::size_t N>
Operator<N> commutator(const Operator<N>& a, const Operator<N>& b) {
  return a * b - b * a;
}

template <std::size_t N>
double expectation(const Operator<N>& obs, const Ket<N>& state) {
  if (!obs.is_hermitian(kAlgebraTol)) throw std::invalid_argument("observable is not hermitian");
  return bracket(state, apply(obs, state)).real();
}

template <std::size_t N>
UncertaintyProduct uncertainty_product(const Operator<N>& a, const Operator<N>& b,
                                       const Ket<N>& state) {
  if (!a.is_hermitian(kAlgebraTol) || !b.is_hermitian(kAlgebraTol))
    throw std::invalid_argument("uncertainty product needs hermitian observables");
  const double mean_a = expectation(a, state);
  const double mean_b = expectation(b, state);
  const Operator<N> da = a - Operator<N>::identity().scaled(mean_a);
  const Operator<N> db = b - Operator<N>::identity().scaled(mean_b);
  const double var_a = expectation(da * da, state);
  const double var_b = expectation(db * db, state);
  const cplx comm_mean = bracket(state, apply(commutator(a, b), state));
  return UncertaintyProduct{var_a * var_b, 0.25 * std::norm(comm_mean)};
}

// --- measurement ---------------------------------------------------------------

template <std::size_t N>
bool is_orthonormal_basis(const std::array<Ket<N>, N>& kets, double tol) {
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      const cplx br = bracket(kets[i], kets[j]);
      const cplx want = (i == j) ? cplx(1, 0) : cplx(0, 0);
      if (std::abs(br - want) > tol) return false;
    }
  return true;
}

namespace {

// Single inverse-CDF draw; outcome order follows the given probabilities.
int sample_index(const std::vector<double>& probs, SeededRng& rng) {
  double total = 0;
  for (double p : probs) total += p;
  const double u = rng.next_double() * total;
  double acc = 0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

template <std::size_t N>
std::pair<int, Ket<N>> measure_projective(const Ket<N>& state,
                                          const std::array<Ket<N>, N>& eigenkets,
                                          SeededRng& rng) {
  if (!is_orthonormal_basis(eigenkets, kSumTol))
    throw std::invalid_argument("measurement basis is not orthonormal");
  std::vector<double> probs(N);
  for (std::size_t i = 0; i < N; ++i) probs[i] = clamp01(std::norm(bracket(eigenkets[i], state)));
  const int idx = sample_index(probs, rng);
  return {idx, eigenkets[idx]};
}

std::pair<int, Ket4> measure_factor(const Ket4& state, int factor,
                                    const std::array<Ket2, 2>& basis, SeededRng& rng) {
  if (factor != 0 && factor != 1) throw std::invalid_argument("factor index must be 0 or 1");
  if (!is_orthonormal_basis(basis, kSumTol))
    throw std::invalid_argument("factor basis is not orthonormal");
  const Op2 proj0 = outer(basis[0], basis[0]);
  const Op4 p0 = factor == 0 ? tensor(proj0, Op2::identity()) : tensor(Op2::identity(), proj0);
  const Ket4 branch0 = apply(p0, state);
  const double prob0 = clamp01(branch0.norm() * branch0.norm());
  if (rng.next_double() < prob0) return {0, branch0.normalized()};
  Ket4 branch1;
  for (int i = 0; i < 4; ++i) branch1.amp[i] = state.amp[i] - branch0.amp[i];
  return {1, branch1.normalized()};
}

namespace {

// Eigenvalues of a hermitian 2x2.
std::pair<double, double> herm2_eigenvalues(const Op2& h) {
  const double a = h.at(0, 0).real();
  const double d = h.at(1, 1).real();
  const double off = std::abs(h.at(0, 1));
  const double mid = 0.5 * (a + d);
  const double rad = std::sqrt(0.25 * (a - d) * (a - d) + off * off);
  return {mid - rad, mid + rad};
}

}  // namespace

void Povm::validate() const {
  if (elements.empty()) throw std::invalid_argument("POVM has no elements");
  Op2 sum = Op2::zero();
  for (const auto& [label, op] : elements) {
    if (!op.is_hermitian(kSumTol))
      throw std::invalid_argument("POVM element '" + label + "' is not hermitian");
    const auto [lo, hi] = herm2_eigenvalues(op);
    (void)hi;
    if (lo < -kSumTol)
      throw std::invalid_argument("POVM element '" + label + "' is not positive semidefinite");
    sum = sum + op;
  }
  const Op2 defect = sum - Op2::identity();
  for (const auto& e : defect.m)
    if (std::abs(e) > kSumTol) throw std::invalid_argument("POVM elements do not sum to identity");
}

int measure_povm(const Ket2& state, const Povm& povm, SeededRng& rng) {
  povm.validate();
  std::vector<double> probs;
  probs.reserve(povm.elements.size());
  for (const auto& [label, op] : povm.elements) {
    (void)label;
    probs.push_back(clamp01(bracket(state, apply(op, state)).real()));
  }
  return sample_index(probs, rng);
}

// --- predicates and constructions ------------------------------------------------

template <std::size_t N>
bool same_physical_state(const Ket<N>& a, const Ket<N>& b, double tol) {
  return std::abs(std::abs(bracket(a, b)) - 1.0) <= tol;
}

namespace {

using Vec4 = std::array<cplx, 4>;

cplx dot4(const Vec4& a, const Vec4& b) {
  cplx s = 0;
  for (int i = 0; i < 4; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm4(const Vec4& a) { return std::sqrt(std::abs(dot4(a, a))); }

// Orthonormalizes `candidate` against the vectors already in `basis`;
// returns false when the residual is negligible.
bool add_orthonormal(std::vector<Vec4>& basis, Vec4 candidate) {
  for (const auto& e : basis) {
    const cplx c = dot4(e, candidate);
    for (int i = 0; i < 4; ++i) candidate[i] -= c * e[i];
  }
  const double n = norm4(candidate);
  if (n < 1e-7) return false;
  for (auto& x : candidate) x /= n;
  basis.push_back(candidate);
  return true;
}

std::vector<Vec4> complete_basis(const std::array<Ket4, 2>& pair) {
  std::vector<Vec4> basis;
  if (!add_orthonormal(basis, pair[0].amp))
    throw std::invalid_argument("degenerate vector pair");
  add_orthonormal(basis, pair[1].amp);
  for (int i = 0; i < 4 && basis.size() < 4; ++i) {
    Vec4 e{};
    e[i] = 1.0;
    add_orthonormal(basis, e);
  }
  if (basis.size() != 4) throw std::invalid_argument("could not complete basis");
  return basis;
}

}  // namespace

Op4 unitary_from_pairs(const std::array<Ket4, 2>& from, const std::array<Ket4, 2>& to) {
  const cplx gram_from = bracket(from[0], from[1]);
  const cplx gram_to = bracket(to[0], to[1]);
  if (std::abs(gram_from - gram_to) > 1e-9)
    throw std::invalid_argument("vector pairs have mismatched Gram matrices");
  const auto e = complete_basis(from);
  const auto f = complete_basis(to);
  Op4 u = Op4::zero();
  for (std::size_t k = 0; k < 4; ++k)
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) u.at(r, c) += f[k][r] * std::conj(e[k][c]);
  return u;
}

Op2 random_hermitian2(SeededRng& rng) {
  auto u = [&rng] { return 2.0 * rng.next_double() - 1.0; };
  Op2 g;
  for (auto& e : g.m) e = cplx(u(), u());
  return (g + g.adjoint()).scaled(0.5);
}

Ket2 random_ket2(SeededRng& rng) {
  auto u = [&rng] { return 2.0 * rng.next_double() - 1.0; };
  for (;;) {
    Ket2 k{{cplx(u(), u()), cplx(u(), u())}};
    if (k.norm() > 1e-3) return k.normalized();
  }
}

Op4 random_unitary4(SeededRng& rng) {
  auto u = [&rng] { return 2.0 * rng.next_double() - 1.0; };
  for (;;) {
    std::vector<Vec4> cols;
    bool ok = true;
    for (int c = 0; c < 4 && ok; ++c) {
      Vec4 v;
      for (auto& x : v) x = cplx(u(), u());
      ok = add_orthonormal(cols, v);
    }
    if (!ok) continue;
    Op4 out;
    for (int c = 0; c < 4; ++c)
      for (int r = 0; r < 4; ++r) out.at(r, c) = cols[c][r];
    return out;
  }
}

// --- explicit instantiations ------------------------------------------------

template struct Ket<2>;
template struct Ket<4>;
template struct Operator<2>;
template struct Operator<4>;

template Ket2 make_ket<2>(const std::array<cplx, 2>&);
template Ket4 make_ket<4>(const std::array<cplx, 4>&);

template cplx bracket<2>(const Ket2&, const Ket2&);
template cplx bracket<4>(const Ket4&, const Ket4&);

template Ket2 apply<2>(const Op2&, const Ket2&);
template Ket4 apply<4>(const Op4&, const Ket4&);

template Ket2 apply_unitary<2>(const Op2&, const Ket2&);
template Ket4 apply_unitary<4>(const Op4&, const Ket4&);

template Op2 outer<2>(const Ket2&, const Ket2&);
template Op4 outer<4>(const Ket4&, const Ket4&);

template Op2 commutator<2>(const Op2&, const Op2&);
template Op4 commutator<4>(const Op4&, const Op4&);

template double expectation<2>(const Op2&, const Ket2&);
template double expectation<4>(const Op4&, const Ket4&);

template UncertaintyProduct uncertainty_product<2>(const Op2&, const Op2&, const Ket2&);
template UncertaintyProduct uncertainty_product<4>(const Op4&, const Op4&, const Ket4&);

template std::pair<int, Ket2> measure_projective<2>(const Ket2&, const std::array<Ket2, 2>&,
                                                    SeededRng&);
template std::pair<int, Ket4> measure_projective<4>(const Ket4&, const std::array<Ket4, 4>&,
                                                    SeededRng&);

template bool same_physical_state<2>(const Ket2&, const Ket2&, double);
template bool same_physical_state<4>(const Ket4&, const Ket4&, double);

template bool is_orthonormal_basis<2>(const std::array<Ket2, 2>&, double);
template bool is_orthonormal_basis<4>(const std::array<Ket4, 4>&, double);

}  // namespace qkd
