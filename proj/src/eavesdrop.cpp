#include "qkdsim/eavesdrop.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// Deterministic private coin, independent of the simulation streams.
int hash_coin(int slot) {
  std::uint64_t x = static_cast<std::uint64_t>(slot) + 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<int>((x ^ (x >> 31)) & 1ULL);
}

// Carrier factor of a product state carrier (x) probe with the probe factor
// known to be `probe`.
Ket2 extract_carrier(const Ket4& product_state, const Ket2& probe) {
  Ket2 carrier;
  for (int i = 0; i < 2; ++i) {
    cplx s = 0;
    for (int j = 0; j < 2; ++j) s += product_state.amp[2 * i + j] * std::conj(probe.amp[j]);
    carrier.amp[i] = s;
  }
  return carrier.normalized();
}

}  // namespace

nlohmann::json EveLedgerEntry::to_json() const {
  nlohmann::json j{{"slot", slot}, {"action", action}};
  if (guessed_bit) j["guessed_bit"] = *guessed_bit;
  return j;
}

EveStrategy::EveStrategy() = default;

EveStrategy EveStrategy::none() { return EveStrategy(); }

EveStrategy EveStrategy::opaque(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("opaque intensity must lie in [0, 1]");
  EveStrategy eve;
  eve.kind_ = Kind::Opaque;
  eve.lambda_ = lambda;
  return eve;
}

void EveStrategy::observe(const TranscriptRecord& record) {
  (void)record;
  ++observed_;
}

int EveStrategy::predict_bit(int slot) const {
  const auto it = guesses_by_slot_.find(slot);
  if (it != guesses_by_slot_.end() && it->second.has_value()) return *it->second;
  return hash_coin(slot);
}

std::string EveStrategy::describe() const {
  switch (kind_) {
    case Kind::None:
      return "none";
    case Kind::Opaque:
      return "opaque(" + std::to_string(lambda_) + ")";
    case Kind::Translucent:
      return "translucent(theta=" + std::to_string(theta_) + ",s=" + std::to_string(strength_) +
             ")";
    case Kind::TranslucentEntangled:
      return "translucent-entangled(theta=" + std::to_string(theta_) +
             ",a=" + std::to_string(amp_keep_) + ",b=" + std::to_string(amp_cross_) + ")";
  }
  return "?";
}

nlohmann::json EveStrategy::ledger_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : ledger_) arr.push_back(e.to_json());
  return arr;
}

Ket2 EveStrategy::act(const Ket2& state, int slot, SeededRng& rng) {
  switch (kind_) {
    case Kind::None:
      ledger_.push_back({slot, "idle", std::nullopt});
      return state;
    case Kind::Opaque:
      return act_opaque(state, slot, rng);
    case Kind::Translucent:
    case Kind::TranslucentEntangled:
      return act_probe(state, slot, rng);
  }
  throw std::logic_error("unreachable eve kind");
}

Ket2 EveStrategy::act_opaque(const Ket2& state, int slot, SeededRng& rng) {
  // lambda == 0 must consume no randomness at all so that opaque(0) replays
  // identically to none under the same seed.
  if (lambda_ <= 0.0 || !rng.bernoulli(lambda_)) {
    ledger_.push_back({slot, "idle", std::nullopt});
    guesses_by_slot_[slot] = std::nullopt;
    return state;
  }
  switch (context_.protocol) {
    case Context::Protocol::BB84: {
      const QuantumAlphabet alphabet =
          rng.next_bit() == 0 ? circular_alphabet() : linear_alphabet();
      const std::array<Ket2, 2> basis{alphabet.ket_for_0, alphabet.ket_for_1};
      const auto [bit, post] = measure_projective(state, basis, rng);
      (void)post;
      ledger_.push_back({slot, "opaque:" + alphabet.name, bit});
      guesses_by_slot_[slot] = bit;
      return encode(bit, alphabet);
    }
    case Context::Protocol::B92: {
      ReceiverStrategy receiver =
          context_.b92_receiver == ReceiverStrategy::Kind::B92Povm
              ? ReceiverStrategy::b92_povm(context_.theta)
              : ReceiverStrategy::b92_projective(context_.theta);
      const QuantumAlphabet alphabet = b92_alphabet(context_.theta);
      const ReceiveOutcome out = receive(state, receiver, rng);
      if (out.bit) {
        ledger_.push_back({slot, "opaque:b92", *out.bit});
        guesses_by_slot_[slot] = *out.bit;
        return encode(*out.bit, alphabet);
      }
      // Inconclusive: masquerade with a uniformly random symbol.
      const int guess = static_cast<int>(rng.next_below(2));
      ledger_.push_back({slot, "opaque:b92-erasure", std::nullopt});
      guesses_by_slot_[slot] = std::nullopt;
      return encode(guess, alphabet);
    }
    case Context::Protocol::EPR: {
      const int op = static_cast<int>(rng.next_below(3));
      const QuantumAlphabet alphabet = epr_alphabet(op);
      const std::array<Ket2, 2> basis{alphabet.ket_for_0, alphabet.ket_for_1};
      const auto [bit, post] = measure_projective(state, basis, rng);
      (void)post;
      ledger_.push_back({slot, "opaque:M" + std::to_string(op), bit});
      guesses_by_slot_[slot] = bit;
      return encode(bit, alphabet);
    }
  }
  throw std::logic_error("unreachable eve context");
}

Ket2 EveStrategy::act_probe(const Ket2& state, int slot, SeededRng& rng) {
  // An uninformative probe never touches the carrier or the stream of random
  // draws; strength 0 replays identically to none.
  if (!probe_informative_) {
    ledger_.push_back({slot, "probe:idle", std::nullopt});
    guesses_by_slot_[slot] = std::nullopt;
    return state;
  }
  const Ket4 joint = apply(interaction_, tensor(state, probe_init_));
  // Measuring the probe commutes with everything downstream that acts on the
  // carrier alone, so drawing the deferred probe measurement here replays the
  // after-the-announcements measurement exactly.
  const auto [idx, collapsed] = measure_factor(joint, 1, probe_analysis_basis_, rng);
  const int guess = idx == 0 ? 1 : 0;
  ledger_.push_back({slot, "probe:measured", guess});
  guesses_by_slot_[slot] = guess;
  return extract_carrier(collapsed, probe_analysis_basis_[idx]);
}

EveStrategy build_translucent(double theta, double strength) {
  if (!(theta > 0.0 && theta < kPi / 4.0))
    throw std::invalid_argument("translucent coupling needs 0 < theta < pi/4");
  if (!(strength >= 0.0 && strength <= 1.0))
    throw std::invalid_argument("translucent strength must lie in [0, 1]");

  EveStrategy eve;
  eve.kind_ = EveStrategy::Kind::Translucent;
  eve.theta_ = theta;
  eve.strength_ = strength;
  eve.probe_init_ = vertical();

  // Probe half-angle phi grows with strength; the carrier half-angle eta
  // shrinks so the bracket of the coupled pairs stays cos(2*theta), which is
  // exactly the unitarity constraint for the product form.
  const double phi = strength * theta;
  const double carrier_cos = clamp(std::cos(2 * theta) / std::cos(2 * phi), -1.0, 1.0);
  const double eta = 0.5 * std::acos(carrier_cos);

  eve.probe_for_1_ = linear(phi);
  eve.probe_for_0_ = linear(-phi);
  eve.carrier_out_1_ = linear(eta);
  eve.carrier_out_0_ = linear(-eta);
  eve.probe_analysis_basis_ = {diagonal_pos(), diagonal_neg()};
  eve.probe_informative_ = strength > 0.0;

  const std::array<Ket4, 2> from{tensor(linear(theta), eve.probe_init_),
                                 tensor(linear(-theta), eve.probe_init_)};
  const std::array<Ket4, 2> to{tensor(eve.carrier_out_1_, eve.probe_for_1_),
                               tensor(eve.carrier_out_0_, eve.probe_for_0_)};
  eve.interaction_ = unitary_from_pairs(from, to);
  if (!eve.interaction_.is_unitary(kAlgebraTol))
    throw std::invalid_argument("translucent coupling construction failed unitarity");
  return eve;
}

EveStrategy build_translucent_entangled(double theta, double a, double b) {
  if (!(theta > 0.0 && theta < kPi / 4.0))
    throw std::invalid_argument("entangling coupling needs 0 < theta < pi/4");
  const double overlap = std::cos(2 * theta);

  // Unitarity pins the probe overlap gamma = <Psi_theta|Psi_theta_bar>:
  //   image norms:  a^2 + b^2 + 2ab*overlap*gamma = 1
  //   image bracket: 2ab + (a^2 + b^2)*overlap*gamma = overlap
  double gamma;
  if (std::abs(a * b) < 1e-12) {
    if (std::abs(a * a + b * b - 1.0) > 1e-9)
      throw std::invalid_argument(
          "Gram condition violated: |a|^2 + |b|^2 must be 1 for an unentangled image");
    gamma = 1.0;
  } else {
    gamma = (1.0 - a * a - b * b) / (2 * a * b * overlap);
    if (!(gamma >= -1.0 - 1e-9 && gamma <= 1.0 + 1e-9))
      throw std::invalid_argument(
          "Gram condition violated: image norms admit no probe overlap in [-1, 1]");
    gamma = clamp(gamma, -1.0, 1.0);
    const double image_bracket = 2 * a * b + (a * a + b * b) * overlap * gamma;
    if (std::abs(image_bracket - overlap) > 1e-9)
      throw std::invalid_argument(
          "Gram condition violated: image bracket " + std::to_string(image_bracket) +
          " != carrier bracket " + std::to_string(overlap));
  }

  EveStrategy eve;
  eve.kind_ = EveStrategy::Kind::TranslucentEntangled;
  eve.theta_ = theta;
  eve.amp_keep_ = a;
  eve.amp_cross_ = b;
  eve.probe_init_ = vertical();

  const double chi = 0.5 * std::acos(gamma);
  eve.probe_for_1_ = linear(chi);
  eve.probe_for_0_ = linear(-chi);
  eve.carrier_out_1_ = linear(theta);
  eve.carrier_out_0_ = linear(-theta);
  eve.probe_informative_ = gamma < 1.0 - 1e-12;
  if (eve.probe_informative_) {
    // gamma < 1 only happens on the orthogonal-probe branch, where the
    // distinguishing basis is the probe pair itself.
    eve.probe_analysis_basis_ = {eve.probe_for_1_, eve.probe_for_0_};
  }

  const Ket2 theta_ket = linear(theta);
  const Ket2 theta_bar_ket = linear(-theta);
  const Ket4 x = tensor(theta_ket, eve.probe_for_1_);
  const Ket4 y = tensor(theta_bar_ket, eve.probe_for_0_);
  Ket4 image1, image2;
  for (int i = 0; i < 4; ++i) {
    image1.amp[i] = a * x.amp[i] + b * y.amp[i];
    image2.amp[i] = b * x.amp[i] + a * y.amp[i];
  }
  const std::array<Ket4, 2> from{tensor(theta_ket, eve.probe_init_),
                                 tensor(theta_bar_ket, eve.probe_init_)};
  const std::array<Ket4, 2> to{image1.normalized(), image2.normalized()};
  eve.interaction_ = unitary_from_pairs(from, to);
  if (!eve.interaction_.is_unitary(kAlgebraTol))
    throw std::invalid_argument("entangling coupling construction failed unitarity");
  return eve;
}

}  // namespace qkd
