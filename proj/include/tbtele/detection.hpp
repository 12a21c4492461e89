#pragma once

// Instrument response on a discrete slot lattice: threshold detectors with
// efficiency and dark counts, the C1-driven trigger cascade and the
// coincidence classification done by the TAC electronics.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tbtele/rng.hpp"

namespace tbtele {

inline constexpr int kFrameSlots = 3;

enum class DetectorMode { free_running, gated };
enum class DetectorId { C1, C2, B };
enum class ClickOrigin { photon, dark };

std::string_view to_string(DetectorMode m);
DetectorMode detector_mode_from_string(std::string_view s);
std::string_view to_string(DetectorId d);
std::string_view to_string(ClickOrigin o);

struct TimingConfig {
  double bin_separation_ns = 1.2;
  double rep_rate_mhz = 76.0;
  double resolution_ns = 0.6;
  double bob_delay_us = 10.0;

  double frame_ns() const { return 1e3 / rep_rate_mhz; }
  void validate() const;
};

struct DetectorConfig {
  double efficiency = 0.1;
  DetectorMode mode = DetectorMode::free_running;
  double dark_rate_hz = 0.0;      // free-running only
  double dark_prob_per_ns = 0.0;  // gated only
  double gate_ns = 100.0;         // gated only

  void validate() const;
  // Sensitive window: the laser coincidence window (one frame) when
  // free-running, the gate when gated. It is cut into time-bin slots and the
  // window's dark probability is spread evenly over them.
  double window_ns(const TimingConfig& timing) const;
  int window_slots(const TimingConfig& timing) const;
  double window_dark_probability(const TimingConfig& timing) const;
  double slot_dark_probability(const TimingConfig& timing) const;

  static DetectorConfig germanium();  // Ge APD at C1
  static DetectorConfig ingaas();     // gated InGaAs APD at C2 and B
  static DetectorConfig ideal(DetectorMode mode);
};

struct ClickRecord {
  DetectorId detector = DetectorId::C1;
  std::int64_t pulse_index = 0;
  int slot = 0;
  ClickOrigin origin = ClickOrigin::photon;
};

struct DetectResult {
  std::optional<ClickRecord> click;
  bool gate_closed = false;
};

// Slot-by-slot threshold detection over the whole window; the earliest click
// wins. `presence` holds P(at least one photon in slot s) for the leading
// slots; a photon click fires with efficiency * presence.
DetectResult threshold_detect(std::span<const double> presence, const DetectorConfig& cfg,
                              const TimingConfig& timing, DetectorId id,
                              std::int64_t pulse_index, bool gate_open, Rng& rng);

// Same detector restricted to the slots given in `photons` (the coincidence
// window), driven by exact photon numbers: each photon is registered
// independently with the detector efficiency.
DetectResult threshold_detect_counts(std::span<const int> photons, double efficiency,
                                     double slot_dark_probability, bool gated,
                                     DetectorId id, std::int64_t pulse_index,
                                     bool gate_open, Rng& rng);

struct Gates {
  bool c2_open = false;
  bool b_open = false;
  double b_delay_us = 0.0;  // bookkeeping only; frames align by pulse index
};

Gates trigger_chain(const std::optional<ClickRecord>& c1, const TimingConfig& timing);

enum class CoincidenceKind { bsm_success, fourfold, control_c1b };
std::string_view to_string(CoincidenceKind k);

struct CoincidenceEvent {
  CoincidenceKind kind = CoincidenceKind::bsm_success;
  std::int64_t pulse_index = 0;
  // Participating slots and origins, indexed by DetectorId; -1 = absent.
  std::array<int, 3> slots{-1, -1, -1};
  std::array<std::optional<ClickOrigin>, 3> origins{};
};

// Clicks of one pulse frame (at most one per detector).
std::vector<CoincidenceEvent> classify_coincidences(std::span<const ClickRecord> frame_clicks);

// Tab-separated `pulse_index kind slots origin-flags`.
std::string format_event(const CoincidenceEvent& event);
void write_event_log(std::ostream& os, std::span<const CoincidenceEvent> events);

}  // namespace tbtele
