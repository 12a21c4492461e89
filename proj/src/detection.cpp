#include "tbtele/detection.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "tbtele/errors.hpp"

namespace tbtele {

std::string_view to_string(DetectorMode m) {
  return m == DetectorMode::gated ? "gated" : "free_running";
}

DetectorMode detector_mode_from_string(std::string_view s) {
  if (s == "gated") return DetectorMode::gated;
  if (s == "free_running") return DetectorMode::free_running;
  throw Error(ErrorKind::TypeMismatch, "unknown detector mode '" + std::string(s) + "'");
}

std::string_view to_string(DetectorId d) {
  switch (d) {
    case DetectorId::C1: return "c1";
    case DetectorId::C2: return "c2";
    case DetectorId::B: return "b";
  }
  return "?";
}

std::string_view to_string(ClickOrigin o) {
  return o == ClickOrigin::photon ? "photon" : "dark";
}

std::string_view to_string(CoincidenceKind k) {
  switch (k) {
    case CoincidenceKind::bsm_success: return "bsm_success";
    case CoincidenceKind::fourfold: return "fourfold";
    case CoincidenceKind::control_c1b: return "control_c1b";
  }
  return "?";
}

void TimingConfig::validate() const {
  if (!(bin_separation_ns > 0) || !(rep_rate_mhz > 0) || !(resolution_ns > 0))
    throw Error(ErrorKind::DomainError, "timing values must be positive");
  if (!(resolution_ns < bin_separation_ns))
    throw Error(ErrorKind::DomainError, "timing resolution does not resolve time bins");
  if (kFrameSlots * bin_separation_ns > frame_ns())
    throw Error(ErrorKind::DomainError, "time-bin frame longer than the pulse period");
}

void DetectorConfig::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0))
    throw Error(ErrorKind::DomainError, "detector efficiency outside [0,1]");
  if (mode == DetectorMode::free_running) {
    if (dark_prob_per_ns != 0.0)
      throw Error(ErrorKind::ConfigError, "free-running detector takes dark_rate_hz only");
    if (!(dark_rate_hz >= 0.0)) throw Error(ErrorKind::DomainError, "negative dark rate");
  } else {
    if (dark_rate_hz != 0.0)
      throw Error(ErrorKind::ConfigError, "gated detector takes dark_prob_per_ns only");
    if (!(dark_prob_per_ns >= 0.0 && dark_prob_per_ns <= 1.0))
      throw Error(ErrorKind::DomainError, "dark_prob_per_ns outside [0,1]");
    if (!(gate_ns > 0.0)) throw Error(ErrorKind::DomainError, "gate_ns must be > 0");
  }
}

double DetectorConfig::window_ns(const TimingConfig& timing) const {
  return mode == DetectorMode::free_running ? timing.frame_ns() : gate_ns;
}

int DetectorConfig::window_slots(const TimingConfig& timing) const {
  return std::max(1, static_cast<int>(std::ceil(window_ns(timing) / timing.bin_separation_ns - 1e-9)));
}

double DetectorConfig::window_dark_probability(const TimingConfig& timing) const {
  if (mode == DetectorMode::free_running)
    return -std::expm1(-dark_rate_hz * timing.frame_ns() * 1e-9);
  return -std::expm1(gate_ns * std::log1p(-dark_prob_per_ns));
}

double DetectorConfig::slot_dark_probability(const TimingConfig& timing) const {
  const double window = window_dark_probability(timing);
  return -std::expm1(std::log1p(-window) / window_slots(timing));
}

DetectorConfig DetectorConfig::germanium() {
  return {0.10, DetectorMode::free_running, 35e3, 0.0, 100.0};
}

DetectorConfig DetectorConfig::ingaas() {
  return {0.30, DetectorMode::gated, 0.0, 1e-4, 100.0};
}

DetectorConfig DetectorConfig::ideal(DetectorMode mode) {
  return {1.0, mode, 0.0, 0.0, 100.0};
}

namespace {

template <typename PhotonClick>
DetectResult scan_slots(int slots, double dark_q, DetectorId id, std::int64_t pulse,
                        Rng& rng, PhotonClick photon_click) {
  DetectResult r;
  for (int s = 0; s < slots; ++s) {
    const bool photon = photon_click(s);
    const bool dark = dark_q > 0.0 && rng.bernoulli(dark_q);
    if (photon || dark) {
      r.click = ClickRecord{id, pulse, s, photon ? ClickOrigin::photon : ClickOrigin::dark};
      return r;
    }
  }
  return r;
}

}  // namespace

DetectResult threshold_detect(std::span<const double> presence, const DetectorConfig& cfg,
                              const TimingConfig& timing, DetectorId id,
                              std::int64_t pulse_index, bool gate_open, Rng& rng) {
  for (double p : presence)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::DomainError, "slot probability outside [0,1]");
  if (cfg.mode == DetectorMode::gated && !gate_open) return {std::nullopt, true};
  const int slots = std::max(cfg.window_slots(timing), static_cast<int>(presence.size()));
  const double q = cfg.slot_dark_probability(timing);
  return scan_slots(slots, q, id, pulse_index, rng, [&](int s) {
    const double p = static_cast<std::size_t>(s) < presence.size() ? presence[s] : 0.0;
    return p > 0.0 && rng.bernoulli(cfg.efficiency * p);
  });
}

DetectResult threshold_detect_counts(std::span<const int> photons, double efficiency,
                                     double slot_dark_probability, bool gated,
                                     DetectorId id, std::int64_t pulse_index,
                                     bool gate_open, Rng& rng) {
  if (gated && !gate_open) return {std::nullopt, true};
  return scan_slots(static_cast<int>(photons.size()), slot_dark_probability, id, pulse_index,
                    rng, [&](int s) {
    const int n = photons[static_cast<std::size_t>(s)];
    bool seen = false;
    for (int k = 0; k < n; ++k) seen = rng.bernoulli(efficiency) || seen;
    return seen;
  });
}

Gates trigger_chain(const std::optional<ClickRecord>& c1, const TimingConfig& timing) {
  Gates g;
  if (!c1) return g;
  g.c2_open = true;
  g.b_open = true;
  g.b_delay_us = timing.bob_delay_us;
  return g;
}

std::vector<CoincidenceEvent> classify_coincidences(std::span<const ClickRecord> frame_clicks) {
  std::array<const ClickRecord*, 3> by{nullptr, nullptr, nullptr};
  for (const auto& c : frame_clicks) {
    auto& slot = by[static_cast<std::size_t>(c.detector)];
    if (slot) throw Error(ErrorKind::DomainError, "two clicks of one detector in a frame");
    if (c.slot < 0 || c.slot >= kFrameSlots)
      throw Error(ErrorKind::DomainError, "click slot outside frame");
    slot = &c;
  }
  const auto* c1 = by[0];
  const auto* c2 = by[1];
  const auto* b = by[2];
  std::vector<CoincidenceEvent> out;
  auto make = [&](CoincidenceKind kind, std::initializer_list<const ClickRecord*> parts) {
    CoincidenceEvent e;
    e.kind = kind;
    for (const auto* p : parts) {
      const auto i = static_cast<std::size_t>(p->detector);
      e.pulse_index = p->pulse_index;
      e.slots[i] = p->slot;
      e.origins[i] = p->origin;
    }
    out.push_back(e);
  };
  const bool bsm = c1 && c2 && c2->slot == c1->slot + 1;
  if (bsm) make(CoincidenceKind::bsm_success, {c1, c2});
  if (bsm && b) make(CoincidenceKind::fourfold, {c1, c2, b});
  if (c1 && b) make(CoincidenceKind::control_c1b, {c1, b});
  return out;
}

std::string format_event(const CoincidenceEvent& e) {
  std::ostringstream os;
  os << e.pulse_index << '\t' << to_string(e.kind) << '\t';
  bool first = true;
  for (std::size_t i = 0; i < 3; ++i) {
    if (e.slots[i] < 0) continue;
    os << (first ? "" : ",") << to_string(static_cast<DetectorId>(i)) << '=' << e.slots[i];
    first = false;
  }
  os << '\t';
  first = true;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!e.origins[i]) continue;
    os << (first ? "" : ",") << to_string(static_cast<DetectorId>(i)) << '='
       << to_string(*e.origins[i]);
    first = false;
  }
  return os.str();
}

void write_event_log(std::ostream& os, std::span<const CoincidenceEvent> events) {
  for (const auto& e : events) os << format_event(e) << '\n';
}

}  // namespace tbtele
