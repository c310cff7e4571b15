#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qkdsim/alphabets.hpp"
#include "qkdsim/channel.hpp"
#include "qkdsim/hilbert.hpp"
#include "qkdsim/rng.hpp"

namespace qkd {

struct EveLedgerEntry {
  int slot = 0;
  std::string action;
  std::optional<int> guessed_bit;

  nlohmann::json to_json() const;
};

// Pluggable attack on the quantum channel plus Eve's private notebook.
// One instance per session; the ledger is scored against the true final key
// after the session, never consulted by Alice or Bob.
class EveStrategy {
 public:
  enum class Kind { None, Opaque, Translucent, TranslucentEntangled };

  struct Context {
    enum class Protocol { BB84, B92, EPR };
    Protocol protocol = Protocol::BB84;
    double theta = 0;  // b92 alphabet angle
    ReceiverStrategy::Kind b92_receiver = ReceiverStrategy::Kind::B92Projective;
  };

  EveStrategy();  // none

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double strength() const { return strength_; }
  const Op4& interaction() const { return interaction_; }
  const Ket2& probe_state_for_1() const { return probe_for_1_; }
  const Ket2& probe_state_for_0() const { return probe_for_0_; }
  const Ket2& carrier_out_for_1() const { return carrier_out_1_; }
  const Ket2& carrier_out_for_0() const { return carrier_out_0_; }
  cplx probe_overlap() const { return bracket(probe_for_1_, probe_for_0_); }

  void set_context(const Context& context) { context_ = context; }
  const Context& context() const { return context_; }

  // Acts on one carrier photon. Appends one ledger entry describing the
  // action taken on this slot.
  Ket2 act(const Ket2& state, int slot, SeededRng& rng);

  // Passive tap on the public channel.
  void observe(const TranscriptRecord& record);

  const std::vector<EveLedgerEntry>& ledger() const { return ledger_; }
  std::size_t observed_records() const { return observed_; }

  // Eve's best guess for the raw-key bit of a slot: her ledger entry when she
  // touched the photon, otherwise a deterministic private coin.
  int predict_bit(int slot) const;

  std::string describe() const;

  nlohmann::json ledger_json() const;

  static EveStrategy none();
  static EveStrategy opaque(double lambda);

  friend EveStrategy build_translucent(double theta, double strength);
  friend EveStrategy build_translucent_entangled(double theta, double a, double b);

 private:
  Kind kind_ = Kind::None;
  double lambda_ = 0;    // opaque intensity
  double theta_ = 0;     // translucent families
  double strength_ = 0;  // translucent (non-entangled)
  double amp_keep_ = 1;  // entangled: coefficient a
  double amp_cross_ = 0; // entangled: coefficient b
  Op4 interaction_ = Op4::identity();
  Ket2 probe_init_ = vertical();
  Ket2 probe_for_1_ = vertical();   // |Psi_theta>
  Ket2 probe_for_0_ = vertical();   // |Psi_theta_bar>
  Ket2 carrier_out_1_ = vertical();
  Ket2 carrier_out_0_ = vertical();
  std::array<Ket2, 2> probe_analysis_basis_{vertical(), horizontal()};
  bool probe_informative_ = false;
  Context context_;
  std::vector<EveLedgerEntry> ledger_;
  std::unordered_map<int, std::optional<int>> guesses_by_slot_;
  std::size_t observed_ = 0;

  Ket2 act_opaque(const Ket2& state, int slot, SeededRng& rng);
  Ket2 act_probe(const Ket2& state, int slot, SeededRng& rng);
};

// Probe coupling in the product form: |theta>|Psi> -> |theta'>|Psi_theta>,
// |theta_bar>|Psi> -> |theta_bar'>|Psi_theta_bar>. One-parameter family:
// at strength 0 the interaction is the identity (indistinguishable probes,
// untouched carriers); at strength 1 the probe states reach the smallest
// overlap the product form admits, cos(2*theta), while the carriers collapse
// onto the bisector.
EveStrategy build_translucent(double theta, double strength);

// Entangling probe coupling: |theta>|Psi> -> a|theta>|Psi_theta> +
// b|theta_bar>|Psi_theta_bar> and symmetrically for |theta_bar>. The probe
// overlap is forced by unitarity; parameter sets admitting no unitary
// extension are rejected with the violated Gram condition named.
EveStrategy build_translucent_entangled(double theta, double a, double b);

}  // namespace qkd
