#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qkdsim/hilbert.hpp"
#include "qkdsim/rng.hpp"

namespace qkd {

class EveStrategy;

struct QuantumChannelConfig {
  double p_flip = 0.0;  // polarization disturbance probability per photon
  double p_loss = 0.0;  // non-reception (loss / dark-count gap) probability
  std::uint64_t rng_seed = 0;

  void validate() const;  // throws when probabilities leave [0, 1]
};

struct TranscriptRecord {
  enum class Sender { Alice, Bob };

  Sender sender = Sender::Alice;
  std::string phase;
  nlohmann::json payload;

  nlohmann::json to_json() const;
};

// Authenticated two-way public channel. Append-only; every record is also
// handed to the registered passive readers (Eve taps the channel but cannot
// write to it).
class PublicTranscript {
 public:
  void publish(TranscriptRecord::Sender sender, std::string phase, nlohmann::json payload);

  const std::vector<TranscriptRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  void attach_reader(std::function<void(const TranscriptRecord&)> reader);

  // One JSON object per line, in publication order.
  void write_jsonl(std::ostream& out) const;

 private:
  std::vector<TranscriptRecord> records_;
  std::vector<std::function<void(const TranscriptRecord&)>> readers_;
};

// One photon through the channel: Eve first, then the polarization
// disturbance, then loss. Returns nothing when the photon never arrives.
std::optional<Ket2> transmit(const Ket2& state, const QuantumChannelConfig& cfg,
                             EveStrategy& eve, int slot, SeededRng& rng);

}  // namespace qkd
