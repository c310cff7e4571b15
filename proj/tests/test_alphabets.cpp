#include <cmath>

#include "doctest.h"
#include "qkdsim/alphabets.hpp"

using namespace qkd;

namespace {

constexpr double kPi = 3.14159265358979323846;

bool kets_equal(const Ket2& a, const Ket2& b, double tol = kAlgebraTol) {
  return std::abs(a.amp[0] - b.amp[0]) <= tol && std::abs(a.amp[1] - b.amp[1]) <= tol;
}

}  // namespace

TEST_CASE("encoding maps bits to the table states") {
  CHECK(kets_equal(encode(1, circular_alphabet()), circular_right()));
  CHECK(kets_equal(encode(0, linear_alphabet()), horizontal()));
  CHECK(kets_equal(encode(0, b92_alphabet(kPi / 8)), linear(-kPi / 8)));
  CHECK_THROWS_AS(encode(2, linear_alphabet()), std::invalid_argument);
}

TEST_CASE("alphabet orthogonality") {
  CHECK(circular_alphabet().orthogonal());
  CHECK(linear_alphabet().orthogonal());
  for (double theta : {0.05, kPi / 8, kPi / 4 - 0.01}) {
    const auto alphabet = b92_alphabet(theta);
    CHECK(!alphabet.orthogonal());
    CHECK(std::abs(bracket(alphabet.ket_for_1, alphabet.ket_for_0)) ==
          doctest::Approx(std::cos(2 * theta)));
  }
  CHECK_THROWS_AS(b92_alphabet(0.0), std::invalid_argument);
  CHECK_THROWS_AS(b92_alphabet(kPi / 4), std::invalid_argument);
}

TEST_CASE("circular and linear alphabets are incompatible") {
  const auto circ = circular_alphabet();
  const auto lin = linear_alphabet();
  for (const Ket2& c : {circ.ket_for_0, circ.ket_for_1})
    for (const Ket2& l : {lin.ket_for_0, lin.ket_for_1})
      CHECK(commutator(outer(c, c), outer(l, l)).frobenius_norm() > 0.1);
}

TEST_CASE("matched orthogonal receiver decodes exactly") {
  SeededRng rng(51);
  for (const auto& alphabet : {circular_alphabet(), linear_alphabet()}) {
    const auto strategy = ReceiverStrategy::orthogonal(alphabet);
    for (int bit = 0; bit < 2; ++bit)
      for (int t = 0; t < 200; ++t) {
        const auto out = receive(encode(bit, alphabet), strategy, rng);
        CHECK(!out.erasure());
        CHECK(*out.bit == bit);
      }
  }
}

TEST_CASE("mismatched orthogonal receiver is a coin flip") {
  SeededRng rng(53);
  const auto strategy = ReceiverStrategy::orthogonal(linear_alphabet());
  int ones = 0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const auto out = receive(encode(t & 1, circular_alphabet()), strategy, rng);
    ones += *out.bit;
  }
  CHECK(std::abs(ones / double(trials) - 0.5) < 0.01);
}

TEST_CASE("b92 projective receiver statistics") {
  const double theta = kPi / 8;
  SeededRng rng(57);
  const auto strategy = ReceiverStrategy::b92_projective(theta);
  const auto alphabet = b92_alphabet(theta);
  int erasures = 0, correct = 0, wrong = 0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const int bit = rng.next_bit();
    const auto out = receive(encode(bit, alphabet), strategy, rng);
    if (out.erasure())
      ++erasures;
    else if (*out.bit == bit)
      ++correct;
    else
      ++wrong;
  }
  const double overlap_sq = std::pow(std::cos(2 * theta), 2);
  CHECK(std::abs(erasures / double(trials) - (1 + overlap_sq) / 2) < 0.01);
  CHECK(std::abs(correct / double(trials) - (1 - overlap_sq) / 2) < 0.01);
  CHECK(wrong == 0);
}

TEST_CASE("b92 projective receiver never misidentifies, algebraically") {
  for (double theta : {0.1, kPi / 8, 0.7}) {
    const Ket2 one = linear(theta);
    const Ket2 zero = linear(-theta);
    const Op2 not_one = Op2::identity() - outer(one, one);
    const Op2 not_zero = Op2::identity() - outer(zero, zero);
    CHECK(expectation(not_one, one) == doctest::Approx(0.0).epsilon(kAlgebraTol));
    CHECK(expectation(not_zero, zero) == doctest::Approx(0.0).epsilon(kAlgebraTol));
  }
}

TEST_CASE("b92 POVM construction") {
  const double theta = kPi / 8;
  const Povm povm = build_b92_povm(theta);
  REQUIRE(povm.elements.size() == 3);
  CHECK(povm.elements[0].first == "theta");
  CHECK(povm.elements[1].first == "theta_bar");
  CHECK(povm.elements[2].first == "?");

  const Ket2 one = linear(theta);
  const Ket2 zero = linear(-theta);
  // inconclusive weight on a symbol state is the symbol overlap
  CHECK(expectation(povm.elements[2].second, one) == doctest::Approx(std::cos(2 * theta)));
  // conclusive outcomes never cross over
  CHECK(expectation(povm.elements[1].second, one) == doctest::Approx(0.0).epsilon(kAlgebraTol));
  CHECK(expectation(povm.elements[0].second, zero) == doctest::Approx(0.0).epsilon(kAlgebraTol));

  Op2 sum = Op2::zero();
  for (const auto& [label, op] : povm.elements) sum = sum + op;
  CHECK((sum - Op2::identity()).frobenius_norm() < kSumTol);

  CHECK_THROWS_AS(build_b92_povm(0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_b92_povm(kPi / 4), std::invalid_argument);
}

TEST_CASE("b92 POVM receiver frequencies") {
  const double theta = kPi / 8;
  SeededRng rng(61);
  const auto strategy = ReceiverStrategy::b92_povm(theta);
  const auto alphabet = b92_alphabet(theta);
  int conclusive_one = 0, wrong = 0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    const auto out = receive(encode(1, alphabet), strategy, rng);
    if (out.erasure()) continue;
    if (*out.bit == 1)
      ++conclusive_one;
    else
      ++wrong;
  }
  CHECK(std::abs(conclusive_one / double(trials) - (1 - std::cos(2 * theta))) < 0.01);
  CHECK(wrong == 0);
}

TEST_CASE("EPR operator convention") {
  for (int i = 0; i < 3; ++i) {
    const auto alphabet = epr_alphabet(i);
    CHECK(alphabet.orthogonal());
    const Op2 m = epr_measurement_operator(i);
    // projector onto the bit-0 symbol
    CHECK(expectation(m, alphabet.ket_for_0) == doctest::Approx(1.0));
    CHECK(expectation(m, alphabet.ket_for_1) == doctest::Approx(0.0).epsilon(kAlgebraTol));
  }
  CHECK(epr_operator_angle(1) == doctest::Approx(kPi / 6));
  CHECK_THROWS_AS(epr_alphabet(3), std::invalid_argument);

  SeededRng rng(63);
  const auto strategy = ReceiverStrategy::epr_operator(1);
  for (int t = 0; t < 100; ++t) {
    const auto out = receive(linear(kPi / 6), strategy, rng);
    CHECK(*out.bit == 0);
  }
}

TEST_CASE("receiver parameter validation") {
  CHECK_THROWS_AS(ReceiverStrategy::b92_projective(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ReceiverStrategy::b92_povm(kPi / 2), std::invalid_argument);
  CHECK_THROWS_AS(ReceiverStrategy::epr_operator(-1), std::invalid_argument);
  SeededRng rng(65);
  const auto mismatched = ReceiverStrategy::orthogonal(b92_alphabet(kPi / 8));
  CHECK_THROWS_AS(receive(vertical(), mismatched, rng), std::invalid_argument);
}
