#include <cmath>
#include <complex>

#include "doctest.h"
#include "qkdsim/hilbert.hpp"

using namespace qkd;

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

bool close(cplx a, cplx b, double tol = kAlgebraTol) { return std::abs(a - b) <= tol; }

bool kets_equal(const Ket2& a, const Ket2& b, double tol = kAlgebraTol) {
  return std::abs(a.amp[0] - b.amp[0]) <= tol && std::abs(a.amp[1] - b.amp[1]) <= tol;
}

Ket2 scaled_sum(cplx ca, const Ket2& a, cplx cb, const Ket2& b) {
  Ket2 out;
  for (int i = 0; i < 2; ++i) out.amp[i] = ca * a.amp[i] + cb * b.amp[i];
  return out;
}

}  // namespace

TEST_CASE("bracket values of the named polarization states") {
  CHECK(close(bracket(vertical(), circular_right()), kInvSqrt2));
  CHECK(close(bracket(vertical(), vertical()), 1.0));
  CHECK(close(bracket(diagonal_pos(), circular_left()), cplx(0.5, 0.5)));
  CHECK(close(bracket(horizontal(), circular_right()), cplx(0, -kInvSqrt2)));
}

TEST_CASE("bracket is conjugate symmetric") {
  SeededRng rng(101);
  for (int t = 0; t < 200; ++t) {
    const Ket2 x = random_ket2(rng);
    const Ket2 y = random_ket2(rng);
    CHECK(close(bracket(x, y), std::conj(bracket(y, x))));
  }
}

TEST_CASE("bracket table of all six states") {
  const double r = kInvSqrt2;
  const cplx ir(0, r);
  const cplx pp(0.5, 0.5);
  const cplx pm(0.5, -0.5);
  const std::array<Ket2, 6> kets{vertical(),     horizontal(),     diagonal_pos(),
                                 diagonal_neg(), circular_right(), circular_left()};
  const cplx expected[6][6] = {
      {1, 0, r, r, r, r},
      {0, 1, r, -r, -ir, ir},
      {r, r, 1, 0, pm, pp},
      {r, -r, 0, 1, pp, pm},
      {r, ir, pp, pm, 1, 0},
      {r, -ir, pm, pp, 0, 1},
  };
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(close(bracket(kets[i], kets[j]), expected[i][j]));
}

TEST_CASE("basis conversion identities") {
  const cplx pp(0.5, 0.5);
  const cplx pm(0.5, -0.5);
  const cplx i_unit(0, 1);
  // diagonal from linear
  CHECK(kets_equal(diagonal_pos(), scaled_sum(kInvSqrt2, vertical(), kInvSqrt2, horizontal())));
  CHECK(kets_equal(diagonal_neg(), scaled_sum(kInvSqrt2, vertical(), -kInvSqrt2, horizontal())));
  // diagonal from circular
  CHECK(kets_equal(diagonal_pos(), scaled_sum(pp, circular_right(), pm, circular_left())));
  CHECK(kets_equal(diagonal_neg(), scaled_sum(pm, circular_right(), pp, circular_left())));
  // linear from diagonal
  CHECK(kets_equal(vertical(), scaled_sum(kInvSqrt2, diagonal_pos(), kInvSqrt2, diagonal_neg())));
  CHECK(
      kets_equal(horizontal(), scaled_sum(kInvSqrt2, diagonal_pos(), -kInvSqrt2, diagonal_neg())));
  // linear from circular
  CHECK(kets_equal(vertical(), scaled_sum(kInvSqrt2, circular_right(), kInvSqrt2, circular_left())));
  CHECK(kets_equal(horizontal(), scaled_sum(i_unit * kInvSqrt2, circular_right(),
                                            -i_unit * kInvSqrt2, circular_left())));
  // circular from linear
  CHECK(kets_equal(circular_right(),
                   scaled_sum(kInvSqrt2, vertical(), -i_unit * kInvSqrt2, horizontal())));
  CHECK(kets_equal(circular_left(),
                   scaled_sum(kInvSqrt2, vertical(), i_unit * kInvSqrt2, horizontal())));
  // circular from diagonal
  CHECK(kets_equal(circular_right(), scaled_sum(pm, diagonal_pos(), pp, diagonal_neg())));
  CHECK(kets_equal(circular_left(), scaled_sum(pp, diagonal_pos(), pm, diagonal_neg())));
}

TEST_CASE("tensor products") {
  const Ket4 product = tensor(vertical(), horizontal());
  CHECK(close(product.amp[0], 0.0));
  CHECK(close(product.amp[1], 1.0));
  CHECK(close(product.amp[2], 0.0));
  CHECK(close(product.amp[3], 0.0));

  // singlet-type state from tensors: (|v h> - |h v>)/sqrt(2)
  const Ket4 left = tensor(linear(0), linear(kPi / 2));
  const Ket4 right = tensor(linear(kPi / 2), linear(0));
  Ket4 omega;
  for (int i = 0; i < 4; ++i) omega.amp[i] = (left.amp[i] - right.amp[i]) * kInvSqrt2;
  CHECK(close(omega.amp[1], kInvSqrt2));
  CHECK(close(omega.amp[2], -kInvSqrt2));
  CHECK(omega.is_unit());

  CHECK(
      close(bracket(tensor(diagonal_pos(), vertical()), tensor(diagonal_pos(), vertical())), 1.0));

  SeededRng rng(7);
  for (int t = 0; t < 100; ++t) {
    const Ket2 a = random_ket2(rng), b = random_ket2(rng);
    const Ket2 c = random_ket2(rng), d = random_ket2(rng);
    CHECK(close(bracket(tensor(a, b), tensor(c, d)), bracket(a, c) * bracket(b, d), kSumTol));
  }
}

TEST_CASE("projective measurement statistics and collapse") {
  const std::array<Ket2, 2> linear_basis{vertical(), horizontal()};

  SUBCASE("eigenstate is returned with certainty") {
    SeededRng rng(3);
    for (int t = 0; t < 100; ++t) {
      const auto [idx, post] = measure_projective(vertical(), linear_basis, rng);
      CHECK(idx == 0);
      CHECK(kets_equal(post, vertical()));
    }
  }

  SUBCASE("circular photon through a vertical filter passes half the time") {
    SeededRng rng(5);
    int vertical_count = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t)
      vertical_count += measure_projective(circular_right(), linear_basis, rng).first == 0;
    CHECK(std::abs(vertical_count / double(trials) - 0.5) < 0.01);
  }

  SUBCASE("inserted diagonal filter re-opens the horizontal branch") {
    // vertical -> diagonal filter (prob 1/2) -> horizontal filter (prob 1/2)
    const std::array<Ket2, 2> diagonal_basis{diagonal_pos(), diagonal_neg()};
    CHECK(close(std::norm(bracket(diagonal_pos(), vertical())), 0.5));
    CHECK(close(std::norm(bracket(horizontal(), diagonal_pos())), 0.5));
    SeededRng rng(9);
    int through = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
      const auto [d_idx, d_post] = measure_projective(vertical(), diagonal_basis, rng);
      if (d_idx != 0) continue;
      through += measure_projective(d_post, linear_basis, rng).first == 1;
    }
    CHECK(std::abs(through / double(trials) - 0.25) < 0.01);
  }

  SUBCASE("repeating a measurement reproduces the outcome") {
    SeededRng rng(11);
    for (int t = 0; t < 200; ++t) {
      const Ket2 state = random_ket2(rng);
      const auto [idx, post] = measure_projective(state, linear_basis, rng);
      const auto [idx2, post2] = measure_projective(post, linear_basis, rng);
      CHECK(idx2 == idx);
      CHECK(kets_equal(post2, post));
    }
  }

  SUBCASE("outcome probabilities sum to one over any orthonormal basis") {
    SeededRng rng(13);
    for (int t = 0; t < 100; ++t) {
      const Op4 u = random_unitary4(rng);
      std::array<Ket4, 4> basis;
      for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) basis[c].amp[r] = u.at(r, c);
      const Ket4 probe = tensor(random_ket2(rng), random_ket2(rng));
      double total = 0;
      for (const auto& b : basis) total += std::norm(bracket(b, probe));
      CHECK(std::abs(total - 1.0) < kSumTol);
    }
  }

  SUBCASE("non-orthonormal basis is rejected") {
    SeededRng rng(15);
    const std::array<Ket2, 2> skewed{vertical(), diagonal_pos()};
    CHECK_THROWS_AS(measure_projective(vertical(), skewed, rng), std::invalid_argument);
  }
}

TEST_CASE("POVM measurement") {
  Povm povm;
  povm.elements.push_back({"v", outer(vertical(), vertical())});
  povm.elements.push_back({"h", outer(horizontal(), horizontal())});
  povm.validate();

  SeededRng rng(17);
  int v_count = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) v_count += measure_povm(diagonal_pos(), povm, rng) == 0;
  CHECK(std::abs(v_count / double(trials) - 0.5) < 0.02);

  SUBCASE("incomplete element sets are rejected") {
    Povm broken;
    broken.elements.push_back({"v", outer(vertical(), vertical())});
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
    CHECK_THROWS_AS(measure_povm(vertical(), broken, rng), std::invalid_argument);
  }

  SUBCASE("negative elements are rejected") {
    Povm broken;
    broken.elements.push_back({"neg", outer(vertical(), vertical()).scaled(-1.0)});
    broken.elements.push_back(
        {"rest", Op2::identity() - outer(vertical(), vertical()).scaled(-1.0)});
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  }
}

TEST_CASE("expectation values") {
  CHECK(expectation(outer(vertical(), vertical()), circular_right()) == doctest::Approx(0.5));
  SeededRng rng(19);
  for (int t = 0; t < 50; ++t)
    CHECK(expectation(Op2::identity(), random_ket2(rng)) == doctest::Approx(1.0));
  CHECK(expectation(outer(diagonal_pos(), diagonal_pos()), vertical()) == doctest::Approx(0.5));

  Op2 non_hermitian = Op2::zero();
  non_hermitian.at(0, 1) = 1.0;
  CHECK_THROWS_AS(expectation(non_hermitian, vertical()), std::invalid_argument);
}

TEST_CASE("commutators") {
  const Op2 pv = outer(vertical(), vertical());
  const Op2 pd = outer(diagonal_pos(), diagonal_pos());

  CHECK(commutator(pv, pv).frobenius_norm() == doctest::Approx(0.0));

  // direct 2x2 arithmetic: [|v><v|, |d+><d+|] = [[0, 1/2], [-1/2, 0]]
  const Op2 c = commutator(pv, pd);
  CHECK(close(c.at(0, 0), 0.0));
  CHECK(close(c.at(0, 1), 0.5));
  CHECK(close(c.at(1, 0), -0.5));
  CHECK(close(c.at(1, 1), 0.0));
  CHECK(c.frobenius_norm() == doctest::Approx(kInvSqrt2));

  const Op2 pr = outer(circular_right(), circular_right());
  CHECK(commutator(pr, pv).frobenius_norm() > 0.1);

  SeededRng rng(23);
  for (int t = 0; t < 100; ++t) {
    const Op2 a = random_hermitian2(rng);
    const Op2 b = random_hermitian2(rng);
    const Op2 anti = commutator(a, b) + commutator(b, a);
    CHECK(anti.frobenius_norm() < kSumTol);
  }
}

TEST_CASE("uncertainty product") {
  const Op2 pv = outer(vertical(), vertical());
  const auto same = uncertainty_product(pv, pv, circular_right());
  CHECK(same.lhs == doctest::Approx(1.0 / 16.0));
  CHECK(same.rhs == doctest::Approx(0.0));

  const Op2 pd = outer(diagonal_pos(), diagonal_pos());
  const auto eigen = uncertainty_product(pv, pd, vertical());
  CHECK(eigen.lhs == doctest::Approx(0.0));
  CHECK(eigen.rhs == doctest::Approx(0.0));

  const auto mixed = uncertainty_product(pv, pd, circular_right());
  CHECK(mixed.lhs >= mixed.rhs - 1e-10);

  SeededRng rng(29);
  for (int t = 0; t < 2000; ++t) {
    const auto res =
        uncertainty_product(random_hermitian2(rng), random_hermitian2(rng), random_ket2(rng));
    CHECK(res.lhs >= res.rhs - 1e-10);
  }

  Op2 non_hermitian = Op2::zero();
  non_hermitian.at(0, 1) = 1.0;
  CHECK_THROWS_AS(uncertainty_product(non_hermitian, pv, vertical()), std::invalid_argument);
}

TEST_CASE("unitary application") {
  CHECK(kets_equal(apply_unitary(Op2::identity(), linear(0.3)), linear(0.3)));

  // maps the linear basis onto the diagonal basis
  const Op2 to_diagonal = outer(diagonal_pos(), vertical()) + outer(diagonal_neg(), horizontal());
  CHECK(to_diagonal.is_unitary());
  CHECK(kets_equal(apply_unitary(to_diagonal, vertical()), diagonal_pos()));
  // while the coordinates of |v> against the diagonal basis stay (r, r)
  CHECK(close(bracket(diagonal_pos(), vertical()), kInvSqrt2));
  CHECK(close(bracket(diagonal_neg(), vertical()), kInvSqrt2));

  SeededRng rng(31);
  for (int t = 0; t < 100; ++t) {
    const Op4 u = random_unitary4(rng);
    const Ket4 state = tensor(random_ket2(rng), random_ket2(rng));
    CHECK(apply_unitary(u, state).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  Op2 shrink = Op2::identity().scaled(0.5);
  CHECK_THROWS_AS(apply_unitary(shrink, vertical()), std::invalid_argument);
}

TEST_CASE("brackets are preserved by unitaries") {
  SeededRng rng(37);
  for (int t = 0; t < 100; ++t) {
    const Op4 u = random_unitary4(rng);
    const Ket4 a = tensor(random_ket2(rng), random_ket2(rng));
    const Ket4 b = tensor(random_ket2(rng), random_ket2(rng));
    CHECK(close(bracket(apply_unitary(u, a), apply_unitary(u, b)), bracket(a, b), kSumTol));
  }
}

TEST_CASE("physical equality ignores the global phase") {
  const Ket2 base = linear(0.7);
  Ket2 rotated;
  const cplx phase = std::polar(1.0, 1.234);
  for (int i = 0; i < 2; ++i) rotated.amp[i] = phase * base.amp[i];
  CHECK(same_physical_state(base, rotated));
  CHECK(!same_physical_state(base, orthogonal_complement(base)));
}

TEST_CASE("pair measurement of one factor") {
  SeededRng rng(41);
  const std::array<Ket2, 2> basis{vertical(), horizontal()};
  const Ket4 product = tensor(diagonal_pos(), circular_left());
  int first = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto [idx, post] = measure_factor(product, 0, basis, rng);
    first += idx == 0;
    if (t == 0) {
      // the untouched factor keeps its state
      const Ket2 chosen = idx == 0 ? vertical() : horizontal();
      CHECK(std::abs(std::abs(bracket(post, tensor(chosen, circular_left()))) - 1.0) < kSumTol);
    }
  }
  CHECK(std::abs(first / double(trials) - 0.5) < 0.02);
  CHECK_THROWS_AS(measure_factor(product, 2, basis, rng), std::invalid_argument);
}

TEST_CASE("gram-matched pair extension") {
  const std::array<Ket4, 2> from{tensor(vertical(), vertical()),
                                 tensor(diagonal_pos(), vertical())};
  const std::array<Ket4, 2> matched{tensor(vertical(), diagonal_pos()),
                                    tensor(diagonal_pos(), diagonal_pos())};
  const Op4 u = unitary_from_pairs(from, matched);
  CHECK(u.is_unitary());
  CHECK(std::abs(std::abs(bracket(apply(u, from[0]), matched[0])) - 1.0) < kSumTol);

  const std::array<Ket4, 2> mismatched{tensor(vertical(), vertical()),
                                       tensor(horizontal(), vertical())};
  CHECK_THROWS_AS(unitary_from_pairs(from, mismatched), std::invalid_argument);
}
