#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkdsim/channel.hpp"
#include "qkdsim/protocols.hpp"
#include "qkdsim/rng.hpp"

namespace qkd {

struct ReconcileConfig {
  std::optional<int> block_len;          // empty = choose from the error rate
  std::optional<double> error_rate_hint; // estimate R from the previous phase
  int step1_rounds = 2;
  // Consecutive clean probes that end step 2. The cleanup after two block
  // passes can still hold tens of paired errors, and the chance of a clean
  // run of length N somewhere inside a ~2*errors probe sequence scales as
  // probes/2^(N+1); 20 keeps that below 1e-4 where 10 loses a few percent of
  // sessions.
  int step2_stop_n = 20;
  std::uint64_t rng_seed = 0x7ec0;  // public-coin stream, published per round

  void validate() const;
};

// Block length making a block unlikely to hold two errors: round(0.73/R),
// clamped to [2, 64].
int choose_block_len(double error_rate);

struct ReconcileStats {
  int parity_comparisons = 0;
  int errors_deleted = 0;
  int bits_removed = 0;
  int step2_probes = 0;
  std::optional<std::string> aborted;
};

struct ReconcileResult {
  KeyMaterial alice;
  KeyMaterial bob;
  ReconcileStats stats;
};

// Two permuted block-parity passes followed by random-subset probes, with a
// bisective search localizing one error per mismatched parity. Every
// comparison discards the rightmost bit of the compared range and every
// located error is deleted; both parties always remove identical slot sets,
// and every removal is published.
ReconcileResult reconcile(const KeyMaterial& alice, const KeyMaterial& bob,
                          const ReconcileConfig& cfg, PublicTranscript& transcript);

// Count of removals implied by the reconciliation records of a transcript
// (distinct discarded or deleted slots).
int reconcile_removals_from_transcript(const PublicTranscript& transcript);

struct AmplifyConfig {
  int s = 30;                    // security parameter
  std::optional<int> k_override; // fixed bound instead of the estimator
  std::uint64_t rng_seed = 0xa3f1;  // subset-selection seed, published

  void validate() const;
};

// Opaque-model bound on Eve's known bits: ceil(2 R n), clamped to [0, n].
int estimate_eve_knowledge(double error_rate, int n);

struct AmplifyResult {
  KeyMaterial key;
  int k_used = 0;
  // Subset masks, one per final bit, packed 64 positions per word.
  std::vector<std::vector<std::uint64_t>> masks;
  std::optional<std::string> aborted;
};

// Final key of exactly n - k - s undisclosed random-subset parities. The
// subset choices are published; the parities never are.
AmplifyResult privacy_amplify(const KeyMaterial& key, const AmplifyConfig& cfg,
                              double error_rate, PublicTranscript& transcript);

// Expand the published subset seed into masks; what any transcript reader,
// Eve included, can reconstruct.
std::vector<std::vector<std::uint64_t>> expand_amplify_masks(std::uint64_t seed, std::size_t n_bits,
                                                             std::size_t n_subsets);

int subset_parity(const std::vector<std::uint8_t>& bits, const std::vector<std::uint64_t>& mask);

}  // namespace qkd
