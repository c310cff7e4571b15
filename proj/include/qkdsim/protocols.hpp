#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkdsim/alphabets.hpp"
#include "qkdsim/channel.hpp"
#include "qkdsim/eavesdrop.hpp"
#include "qkdsim/hilbert.hpp"
#include "qkdsim/rng.hpp"

namespace qkd {

enum class BobOutcome : std::uint8_t { Bit0, Bit1, Erasure, NoReception };

struct TransmissionRecord {
  int slot = 0;
  int alice_bit = 0;
  std::string alice_alphabet;
  std::string eve_action;
  std::string bob_strategy;
  BobOutcome outcome = BobOutcome::NoReception;

  std::optional<int> bob_bit() const {
    if (outcome == BobOutcome::Bit0) return 0;
    if (outcome == BobOutcome::Bit1) return 1;
    return std::nullopt;
  }
};

std::string outcome_label(BobOutcome o);

// CSV columns: slot, alice_bit, alice_alphabet, eve_action, bob_strategy, bob_outcome.
void write_records_csv(std::ostream& out, const std::vector<TransmissionRecord>& records);

enum class KeyStage : std::uint8_t { Raw, Estimated, Reconciled, Final };

std::string stage_label(KeyStage s);

// An ordered bit sequence with its originating slots. Stages only move
// forward and bits are only ever deleted, never flipped.
struct KeyMaterial {
  std::vector<std::uint8_t> bits;
  std::vector<std::uint32_t> slots;  // provenance, parallel to bits
  KeyStage stage = KeyStage::Raw;
  int leaked_parities = 0;

  std::size_t size() const { return bits.size(); }
};

struct SessionReport {
  std::uint64_t seed = 0;
  std::string protocol;
  std::string eve;
  int n_sent = 0;
  int n_received = 0;
  std::optional<double> pre_sift_accuracy;
  std::optional<double> raw_error_rate_estimate;  // R
  std::optional<double> erasure_rate;
  std::optional<double> bell_beta;
  std::optional<double> bell_beta_se;
  std::optional<bool> eve_detected;
  std::optional<double> p_false;
  std::optional<int> raw_key_length;
  std::optional<int> final_key_length;
  int leaked_parities = 0;
  std::optional<bool> keys_agree;            // ground-truth diagnostic
  std::optional<double> eve_prediction_rate;  // vs. the true final key
  // The eve-knowledge bound assumes opaque eavesdropping; flagged when the
  // session ran a probe strategy instead.
  std::optional<bool> k_model_mismatched;
  std::optional<std::string> aborted;

  nlohmann::json to_json() const;
};

// The three pair states and their swap antisymmetry.
struct EprSource {
  std::array<Ket4, 3> states;

  static EprSource standard();
};

// --- stage 1 ---------------------------------------------------------------

std::vector<TransmissionRecord> bb84_stage1(int n, const QuantumChannelConfig& channel,
                                            EveStrategy& eve, SeededRng& rng);

std::vector<TransmissionRecord> b92_stage1(int n, double theta, ReceiverStrategy::Kind receiver,
                                           const QuantumChannelConfig& channel, EveStrategy& eve,
                                           SeededRng& rng);

std::vector<TransmissionRecord> epr_stage1(int n, const EprSource& source, EveStrategy& eve,
                                           SeededRng& rng);

// --- stage 2 building blocks -------------------------------------------------

// BB84 sifting: keep slots where Bob's basis matched Alice's alphabet and a
// bit arrived. Bob announces his choices first, Alice confirms.
std::pair<KeyMaterial, KeyMaterial> sift(const std::vector<TransmissionRecord>& records,
                                         PublicTranscript& transcript);

// B92 sifting: Bob announces the non-erasure slots.
std::pair<KeyMaterial, KeyMaterial> b92_sift(const std::vector<TransmissionRecord>& records,
                                             PublicTranscript& transcript);

struct DetectResult {
  bool clean = false;
  double p_false = 1.0;  // escape probability for the configured intensity
  int mismatches = 0;
  int compared = 0;
  KeyMaterial alice_remnant;
  KeyMaterial bob_remnant;
};

// Noiseless eavesdropper check: compare m random raw-key bits in public and
// discard them. p_false = (1 - lambda/4)^m uses the configured ground-truth
// intensity, which only the simulation knows.
DetectResult detect_noiseless(const KeyMaterial& alice, const KeyMaterial& bob, int m,
                              double ground_truth_lambda, SeededRng& rng,
                              PublicTranscript& transcript);

struct EstimateResult {
  double error_rate = 0;  // R
  bool proceed = false;
  KeyMaterial alice_remnant;
  KeyMaterial bob_remnant;
};

EstimateResult estimate_error(const KeyMaterial& alice, const KeyMaterial& bob,
                              double sample_fraction, double r_max, SeededRng& rng,
                              PublicTranscript& transcript);

struct RejectedSlot {
  std::uint32_t slot = 0;
  int op_alice = 0;
  int op_bob = 0;
  int bit_alice = 0;
  int bit_bob = 0;
};

struct EprSplit {
  KeyMaterial alice_raw;
  KeyMaterial bob_raw;
  std::vector<RejectedSlot> rejected;
};

EprSplit epr_split(const std::vector<TransmissionRecord>& records, PublicTranscript& transcript);

struct BellResult {
  double beta = 0;
  double standard_error = 0;
  bool eve_detected = false;
  // delta[k] for operator pairs {1,2}, {0,1}, {0,2} in that order.
  std::array<double, 3> delta{};

  nlohmann::json to_json() const;
};

// Correlation test on rejected key; (i,j) and (j,i) slots pool together.
// Throws when some operator pair has no samples.
BellResult bell_test(const std::vector<RejectedSlot>& rejected);

}  // namespace qkd
