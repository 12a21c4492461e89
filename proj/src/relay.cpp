#include "tbtele/relay.hpp"

#include <cmath>
#include <limits>

#include "tbtele/errors.hpp"

namespace tbtele {

void LinkConfig::validate() const {
  if (!(attenuation_db_per_km > 0.0) || !std::isfinite(attenuation_db_per_km))
    throw Error(ErrorKind::DomainError, "attenuation must be > 0");
  if (!(pair_prob > 0.0 && pair_prob < 1.0))
    throw Error(ErrorKind::DomainError, "pair_prob outside (0,1)");
  detector.validate();
  if (!(gate_ns > 0.0) || !std::isfinite(gate_ns))
    throw Error(ErrorKind::DomainError, "gate_ns must be > 0");
  if (!(bsm_success_prob > 0.0 && bsm_success_prob <= 1.0))
    throw Error(ErrorKind::DomainError, "bsm_success_prob outside (0,1]");
  if (!(source_visibility >= 0.0 && source_visibility <= 1.0))
    throw Error(ErrorKind::DomainError, "source_visibility outside [0,1]");
}

double LinkConfig::dark_per_gate() const {
  if (detector.mode == DetectorMode::free_running)
    return -std::expm1(-detector.dark_rate_hz * gate_ns * 1e-9);
  return -std::expm1(gate_ns * std::log1p(-detector.dark_prob_per_ns));
}

namespace {

// C/T with the 0/0 limit (no noise at all) taken as fully genuine.
double genuine_share(double signal, double noise) {
  if (noise <= 0.0) return 1.0;
  return signal / (signal + noise);
}

void check_distance(double d_km) {
  if (!(d_km >= 0.0) || !std::isfinite(d_km))
    throw Error(ErrorKind::DomainError, "distance must be finite and >= 0");
}

}  // namespace

QberPoint qber_direct(const LinkConfig& cfg, double d_km) {
  cfg.validate();
  check_distance(d_km);
  const double s = cfg.pair_prob * cfg.detector.efficiency *
                   std::pow(10.0, -cfg.attenuation_db_per_km * d_km / 10.0);
  const double n = cfg.dark_per_gate();
  const double share = genuine_share(s, n);
  // noise bits are random; signal bits err with (1 - V)/2
  const double qber = (1.0 - share) / 2.0 + share * (1.0 - cfg.source_visibility) / 2.0;
  return {qber, s + n};
}

QberPoint qber_relay(const LinkConfig& cfg, double d_km, int sections) {
  if (sections < 1) throw Error(ErrorKind::DomainError, "sections must be >= 1");
  if (sections == 1) return qber_direct(cfg, d_km);
  cfg.validate();
  check_distance(d_km);
  const double t = std::pow(10.0, -cfg.attenuation_db_per_km * (d_km / sections) / 10.0);
  const double eta = cfg.detector.efficiency;
  const double dark = cfg.dark_per_gate();
  const double b = cfg.bsm_success_prob;

  // Stage j detects what section j delivered. The first section starts at
  // the emitting source; later ones start at a relay's pair, which a
  // heralded stage has already committed.
  double total = 1.0, share = 1.0;
  for (int j = 1; j <= sections; ++j) {
    const double source = j == 1 ? cfg.pair_prob : 1.0;
    const double relay = j < sections ? b : 1.0;
    const double g = source * t * eta * relay;
    const double n = dark * relay;
    total *= g + n;
    share *= genuine_share(g, n);
  }
  const double qber = (1.0 - share) / 2.0 + share * (1.0 - cfg.source_visibility) / 2.0;
  return {qber, total};
}

QberCurve qber_curve(const LinkConfig& cfg, int sections, const std::vector<double>& distances_km) {
  QberCurve c;
  c.sections = sections;
  c.distances_km = distances_km;
  for (double d : distances_km) {
    const QberPoint p = qber_relay(cfg, d, sections);
    c.qber.push_back(p.qber);
    c.rate_per_pulse.push_back(p.rate);
  }
  return c;
}

RangeResult max_range(const LinkConfig& cfg, int sections, double qber_threshold) {
  if (!(qber_threshold > 0.0 && qber_threshold < 0.5))
    throw Error(ErrorKind::DomainError, "qber threshold outside (0, 0.5)");
  auto q = [&](double d) { return qber_relay(cfg, d, sections).qber; };
  if (q(0.0) > qber_threshold) return {RangeStatus::no_crossing, 0.0};
  if (q(kMaxRangeKm) <= qber_threshold)
    return {RangeStatus::unbounded, std::numeric_limits<double>::infinity()};
  double lo = 0.0, hi = kMaxRangeKm;
  while (hi - lo > 0.01) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) <= qber_threshold ? lo : hi) = mid;
  }
  return {RangeStatus::crossed, 0.5 * (lo + hi)};
}

}  // namespace tbtele
