#pragma once

// Link budget of a QKD channel, direct or cut into sections by
// teleportation relays that herald the end detector's gate.

#include <vector>

#include "tbtele/detection.hpp"

namespace tbtele {

struct LinkConfig {
  double attenuation_db_per_km = 0.35;
  double pair_prob = 0.1;
  DetectorConfig detector{0.1, DetectorMode::free_running, 35e3, 0.0, 100.0};
  double gate_ns = 0.1;  // coincidence window at every detector
  double bsm_success_prob = 0.125;
  double source_visibility = 0.95;

  void validate() const;
  // Dark-count probability of one detector within one gate.
  double dark_per_gate() const;
};

struct QberPoint {
  double qber = 0.0;
  double rate = 0.0;  // detection probability per pulse, signal plus noise
};

struct QberCurve {
  int sections = 1;
  std::vector<double> distances_km;
  std::vector<double> qber;
  std::vector<double> rate_per_pulse;
};

QberPoint qber_direct(const LinkConfig& cfg, double d_km);

// Relays at every section boundary: a BSM on the incoming photon and one half
// of a local pair, whose other half travels on. The next stage is gated only
// when the BSM succeeds, so a stage fires on signal or on its own dark count.
QberPoint qber_relay(const LinkConfig& cfg, double d_km, int sections);

QberCurve qber_curve(const LinkConfig& cfg, int sections, const std::vector<double>& distances_km);

enum class RangeStatus { crossed, unbounded, no_crossing };

struct RangeResult {
  RangeStatus status = RangeStatus::crossed;
  double distance_km = 0.0;  // crossing point; +inf when unbounded, 0 on no_crossing
};

inline constexpr double kMaxRangeKm = 10'000.0;

RangeResult max_range(const LinkConfig& cfg, int sections, double qber_threshold = 0.11);

}  // namespace tbtele
