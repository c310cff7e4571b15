#include "qkdsim/channel.hpp"

#include <stdexcept>
#include <utility>

#include "qkdsim/eavesdrop.hpp"

namespace qkd {

void QuantumChannelConfig::validate() const {
  if (!(p_flip >= 0.0 && p_flip <= 1.0))
    throw std::invalid_argument("p_flip must lie in [0, 1]");
  if (!(p_loss >= 0.0 && p_loss <= 1.0))
    throw std::invalid_argument("p_loss must lie in [0, 1]");
}

nlohmann::json TranscriptRecord::to_json() const {
  return nlohmann::json{{"sender", sender == Sender::Alice ? "alice" : "bob"},
                        {"phase", phase},
                        {"payload", payload}};
}

void PublicTranscript::publish(TranscriptRecord::Sender sender, std::string phase,
                               nlohmann::json payload) {
  records_.push_back(TranscriptRecord{sender, std::move(phase), std::move(payload)});
  for (const auto& reader : readers_) reader(records_.back());
}

void PublicTranscript::attach_reader(std::function<void(const TranscriptRecord&)> reader) {
  readers_.push_back(std::move(reader));
}

void PublicTranscript::write_jsonl(std::ostream& out) const {
  for (const auto& record : records_) out << record.to_json().dump() << '\n';
}

std::optional<Ket2> transmit(const Ket2& state, const QuantumChannelConfig& cfg,
                             EveStrategy& eve, int slot, SeededRng& rng) {
  cfg.validate();
  Ket2 current = eve.act(state, slot, rng);
  if (cfg.p_flip > 0.0 && rng.bernoulli(cfg.p_flip)) {
    // Disturbance replaces the photon with a random basis state of a random
    // basis: linear, diagonal or circular.
    const auto basis_choice = rng.next_below(3);
    const int which = static_cast<int>(rng.next_below(2));
    switch (basis_choice) {
      case 0:
        current = which == 0 ? vertical() : horizontal();
        break;
      case 1:
        current = which == 0 ? diagonal_pos() : diagonal_neg();
        break;
      default:
        current = which == 0 ? circular_right() : circular_left();
        break;
    }
  }
  if (cfg.p_loss > 0.0 && rng.bernoulli(cfg.p_loss)) return std::nullopt;
  return current;
}

}  // namespace qkd
