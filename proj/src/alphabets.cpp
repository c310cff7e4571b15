#include "qkdsim/alphabets.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_b92_angle(double theta) {
  if (!(theta > 0.0 && theta < kPi / 4.0))
    throw std::invalid_argument(
        "b92 angle must lie strictly between 0 and pi/4 (states coincide at 0, "
        "become orthogonal at pi/4)");
}

}  // namespace

bool QuantumAlphabet::orthogonal(double tol) const {
  return std::abs(bracket(ket_for_0, ket_for_1)) < tol;
}

QuantumAlphabet circular_alphabet() {
  return QuantumAlphabet{"circular", circular_left(), circular_right()};
}

QuantumAlphabet linear_alphabet() {
  return QuantumAlphabet{"linear", horizontal(), vertical()};
}

QuantumAlphabet b92_alphabet(double theta) {
  require_b92_angle(theta);
  return QuantumAlphabet{"b92", linear(-theta), linear(theta)};
}

double epr_operator_angle(int index) {
  if (index < 0 || index > 2) throw std::invalid_argument("EPR operator index must be 0, 1 or 2");
  return index * kPi / 6.0;
}

QuantumAlphabet epr_alphabet(int index) {
  const double angle = epr_operator_angle(index);
  return QuantumAlphabet{"epr" + std::to_string(index), linear(angle),
                         linear(angle + kPi / 2.0)};
}

Op2 epr_measurement_operator(int index) {
  const Ket2 k = linear(epr_operator_angle(index));
  return outer(k, k);
}

Ket2 encode(int bit, const QuantumAlphabet& alphabet) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
  return bit == 0 ? alphabet.ket_for_0 : alphabet.ket_for_1;
}

ReceiverStrategy ReceiverStrategy::orthogonal(QuantumAlphabet a) {
  ReceiverStrategy s;
  s.kind = Kind::OrthogonalBasis;
  s.alphabet = std::move(a);
  return s;
}

ReceiverStrategy ReceiverStrategy::b92_projective(double theta) {
  require_b92_angle(theta);
  ReceiverStrategy s;
  s.kind = Kind::B92Projective;
  s.theta = theta;
  return s;
}

ReceiverStrategy ReceiverStrategy::b92_povm(double theta) {
  require_b92_angle(theta);
  ReceiverStrategy s;
  s.kind = Kind::B92Povm;
  s.theta = theta;
  return s;
}

ReceiverStrategy ReceiverStrategy::epr_operator(int index) {
  epr_operator_angle(index);  // range check
  ReceiverStrategy s;
  s.kind = Kind::EprOperator;
  s.epr_index = index;
  return s;
}

std::string ReceiverStrategy::describe() const {
  switch (kind) {
    case Kind::OrthogonalBasis:
      return "basis:" + alphabet.name;
    case Kind::B92Projective:
      return "b92-projective";
    case Kind::B92Povm:
      return "b92-povm";
    case Kind::EprOperator:
      return "M" + std::to_string(epr_index);
  }
  return "?";
}

ReceiveOutcome receive(const Ket2& state, const ReceiverStrategy& strategy, SeededRng& rng) {
  switch (strategy.kind) {
    case ReceiverStrategy::Kind::OrthogonalBasis: {
      if (!strategy.alphabet.orthogonal(kSumTol))
        throw std::invalid_argument("orthogonal-basis receiver needs an orthogonal alphabet");
      const std::array<Ket2, 2> basis{strategy.alphabet.ket_for_0, strategy.alphabet.ket_for_1};
      const auto [idx, post] = measure_projective(state, basis, rng);
      (void)post;
      return ReceiveOutcome{idx};
    }
    case ReceiverStrategy::Kind::B92Projective: {
      require_b92_angle(strategy.theta);
      // Choose one of the two exclusion projectors at random. A "yes" on the
      // projector annihilating |x> certifies the other symbol; "no" is an
      // erasure.
      const int exclude_bit = rng.next_bit();  // 1 excludes |theta>, 0 excludes |theta_bar>
      const Ket2 excluded =
          exclude_bit == 1 ? linear(strategy.theta) : linear(-strategy.theta);
      const std::array<Ket2, 2> basis{orthogonal_complement(excluded), excluded};
      const auto [idx, post] = measure_projective(state, basis, rng);
      (void)post;
      if (idx == 0) return ReceiveOutcome{1 - exclude_bit};
      return ReceiveOutcome{std::nullopt};
    }
    case ReceiverStrategy::Kind::B92Povm: {
      const Povm povm = build_b92_povm(strategy.theta);
      const int idx = measure_povm(state, povm, rng);
      if (idx == 0) return ReceiveOutcome{1};  // "theta"
      if (idx == 1) return ReceiveOutcome{0};  // "theta_bar"
      return ReceiveOutcome{std::nullopt};
    }
    case ReceiverStrategy::Kind::EprOperator: {
      const QuantumAlphabet alpha = epr_alphabet(strategy.epr_index);
      const std::array<Ket2, 2> basis{alpha.ket_for_0, alpha.ket_for_1};
      const auto [idx, post] = measure_projective(state, basis, rng);
      (void)post;
      return ReceiveOutcome{idx};
    }
  }
  throw std::logic_error("unreachable receiver kind");
}

Povm build_b92_povm(double theta) {
  require_b92_angle(theta);
  const Ket2 k1 = linear(theta);    // bit 1
  const Ket2 k0 = linear(-theta);   // bit 0
  const double overlap = std::abs(bracket(k1, k0));  // cos(2 theta)
  const double scale = 1.0 / (1.0 + overlap);
  const Op2 not_theta = Op2::identity() - outer(k1, k1);
  const Op2 not_theta_bar = Op2::identity() - outer(k0, k0);
  Povm povm;
  povm.elements.push_back({"theta", not_theta_bar.scaled(scale)});
  povm.elements.push_back({"theta_bar", not_theta.scaled(scale)});
  Op2 rest = Op2::identity() - povm.elements[0].second - povm.elements[1].second;
  povm.elements.push_back({"?", rest});
  povm.validate();
  return povm;
}

}  // namespace qkd
