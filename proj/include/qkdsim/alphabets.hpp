#pragma once

#include <optional>
#include <string>

#include "qkdsim/hilbert.hpp"
#include "qkdsim/rng.hpp"

namespace qkd {

// bit <-> polarization encoding; orthogonality is a property of the kets,
// not a declaration.
struct QuantumAlphabet {
  std::string name;
  Ket2 ket_for_0;
  Ket2 ket_for_1;

  bool orthogonal(double tol = kAlgebraTol) const;
};

QuantumAlphabet circular_alphabet();           // right circular -> 1, left -> 0
QuantumAlphabet linear_alphabet();             // vertical -> 1, horizontal -> 0
QuantumAlphabet b92_alphabet(double theta);    // |theta> -> 1, |-theta> -> 0
QuantumAlphabet epr_alphabet(int index);       // |angle_i> -> 0, complement -> 1

double epr_operator_angle(int index);          // 0, pi/6, 2pi/6
Op2 epr_measurement_operator(int index);       // projector onto |angle_i>

Ket2 encode(int bit, const QuantumAlphabet& alphabet);

struct ReceiveOutcome {
  std::optional<int> bit;  // empty = erasure ("?")

  bool erasure() const { return !bit.has_value(); }
};

struct ReceiverStrategy {
  enum class Kind { OrthogonalBasis, B92Projective, B92Povm, EprOperator };

  Kind kind = Kind::OrthogonalBasis;
  QuantumAlphabet alphabet;  // OrthogonalBasis only
  double theta = 0;          // b92 kinds; must satisfy 0 < theta < pi/4
  int epr_index = 0;

  static ReceiverStrategy orthogonal(QuantumAlphabet a);
  static ReceiverStrategy b92_projective(double theta);
  static ReceiverStrategy b92_povm(double theta);
  static ReceiverStrategy epr_operator(int index);

  std::string describe() const;
};

// One received photon -> decoded bit or erasure. The orthogonal-basis kind
// never produces an erasure; the b92 kinds never produce a wrong bit on an
// undisturbed channel.
ReceiveOutcome receive(const Ket2& state, const ReceiverStrategy& strategy, SeededRng& rng);

// Unambiguous-discrimination POVM for the b92 alphabet, labels
// {"theta", "theta_bar", "?"}. The element labeled "theta" is built from the
// projector annihilating |theta_bar>, so a conclusive click certifies the
// sent symbol and misidentification has probability exactly zero.
Povm build_b92_povm(double theta);

}  // namespace qkd
