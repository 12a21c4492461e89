#include "tbtele/spdc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tbtele {

namespace {

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  c.back() = 1.0;
  return c;
}

int draw(const std::vector<double>& cdf, double u) {
  return static_cast<int>(std::upper_bound(cdf.begin(), cdf.end() - 1, u) - cdf.begin());
}

}  // namespace

std::string_view to_string(PairStatistics s) {
  switch (s) {
    case PairStatistics::thermal: return "thermal";
    case PairStatistics::poissonian: return "poissonian";
    case PairStatistics::single: return "single";
  }
  return "thermal";
}

PairStatistics pair_statistics_from_string(std::string_view s) {
  if (s == "thermal") return PairStatistics::thermal;
  if (s == "poissonian") return PairStatistics::poissonian;
  if (s == "single") return PairStatistics::single;
  throw Error(ErrorKind::TypeMismatch, "unknown pair statistics '" + std::string(s) + "'");
}

void SourceConfig::validate() const {
  if (!(p_alice >= 0.0 && p_alice < 1.0))
    throw Error(ErrorKind::DomainError, "source.p_alice outside [0,1)");
  if (!(ratio > 0.0)) throw Error(ErrorKind::DomainError, "source.ratio must be > 0");
  if (!(p_epr() < 1.0)) throw Error(ErrorKind::DomainError, "p_epr outside [0,1)");
  if (pair_cutoff < 1) throw Error(ErrorKind::DomainError, "source.pair_cutoff < 1");
}

void IndistinguishabilityConfig::validate() const {
  for (double t : {arrival_offset_fs, interferometer_mismatch_fs})
    if (!std::isfinite(t)) throw Error(ErrorKind::DomainError, "time offset not finite");
  if (!(coherence_time_fs > 0.0) || !std::isfinite(coherence_time_fs))
    throw Error(ErrorKind::DomainError, "coherence time must be > 0");
  for (double o : {spectral_overlap, polarization_overlap})
    if (!(o >= 0.0 && o <= 1.0)) throw Error(ErrorKind::DomainError, "overlap outside [0,1]");
}

std::vector<double> pair_number_dist(double p, PairStatistics statistics, int cutoff) {
  if (cutoff < 0) throw Error(ErrorKind::DomainError, "negative pair cutoff");
  std::vector<double> dist(static_cast<std::size_t>(cutoff) + 1, 0.0);
  if (statistics == PairStatistics::single) {
    if (cutoff < 1) throw Error(ErrorKind::DomainError, "single-pair source needs cutoff >= 1");
    dist[1] = 1.0;
    return dist;
  }
  if (!(p >= 0.0 && p < 1.0))
    throw Error(ErrorKind::DomainError, "pair probability outside [0,1)");
  if (statistics == PairStatistics::thermal) {
    // P(n) = (1-x) x^n, with P(n >= 1) = x.
    double pn = 1.0 - p;
    for (auto& d : dist) {
      d = pn;
      pn *= p;
    }
  } else {
    const double mean = -std::log1p(-p);
    double pn = std::exp(-mean);
    for (std::size_t n = 0; n < dist.size(); ++n) {
      dist[n] = pn;
      pn *= mean / static_cast<double>(n + 1);
    }
  }
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  for (auto& d : dist) d /= total;
  return dist;
}

double overlap_mu(const IndistinguishabilityConfig& cfg) {
  cfg.validate();
  const double dt = cfg.arrival_offset_fs / cfg.coherence_time_fs;
  const double dm = cfg.interferometer_mismatch_fs / cfg.coherence_time_fs;
  const double mu = std::exp(-dt * dt) * std::exp(-dm * dm) * cfg.spectral_overlap *
                    cfg.polarization_overlap;
  return std::clamp(mu, 0.0, 1.0);
}

PhotonicState emission_state(const EmissionOutcome& outcome, const QubitSpec& alice,
                             const EprConfig& epr, double mu, bool include_coupler_loss,
                             int cutoff) {
  if (outcome.n_alice < 0 || outcome.n_epr < 0)
    throw Error(ErrorKind::DomainError, "negative pair number");
  if (!(mu >= 0.0 && mu <= 1.0)) throw Error(ErrorKind::DomainError, "mu outside [0,1]");
  const int photons = 2 * (outcome.n_alice + outcome.n_epr);
  if (photons > cutoff)
    throw Error(ErrorKind::CutoffExceeded,
                "emission of " + std::to_string(photons) + " photons exceeds cutoff " +
                    std::to_string(cutoff));

  // Alice's crystal: signal photon into the interferometer, partner discarded.
  const Mode idler{Port::AliceIdler, 0, 0};
  std::vector<std::pair<Occupation, ComplexAmp>> alice_poly;
  const double overlap = std::sqrt(mu);
  const double distinct = std::sqrt(1.0 - mu);
  alice_poly.push_back(
      {make_occupation({{{Port::AliceSrc, 0, 0}, 1}, {idler, 1}}), overlap});
  if (distinct > 0.0)
    alice_poly.push_back(
        {make_occupation({{{Port::AliceSrc, 0, kAliceDistinguishableTag}, 1}, {idler, 1}}),
         distinct});
  PhotonicState alice_part = creation_power(alice_poly, outcome.n_alice, cutoff);
  if (outcome.n_alice > 0)
    alice_part = apply_transform(alice_part, preparation_transform(alice, include_coupler_loss));

  PhotonicState epr_part = creation_power(epr_pair_polynomial(epr), outcome.n_epr, cutoff);
  return tensor(alice_part, epr_part);
}

EmissionSampler::EmissionSampler(const SourceConfig& cfg) {
  cfg.validate();
  alice_ = pair_number_dist(cfg.p_alice, cfg.statistics, cfg.pair_cutoff);
  epr_ = pair_number_dist(cfg.p_epr(), cfg.statistics, cfg.pair_cutoff);
  alice_cdf_ = cumulative(alice_);
  epr_cdf_ = cumulative(epr_);
}

EmissionOutcome EmissionSampler::operator()(Rng& rng) const {
  EmissionOutcome o;
  o.n_alice = draw(alice_cdf_, rng.uniform());
  o.n_epr = draw(epr_cdf_, rng.uniform());
  return o;
}

double EmissionSampler::probability(const EmissionOutcome& o) const {
  if (o.n_alice < 0 || o.n_epr < 0 || o.n_alice >= static_cast<int>(alice_.size()) ||
      o.n_epr >= static_cast<int>(epr_.size()))
    return 0.0;
  return alice_[static_cast<std::size_t>(o.n_alice)] * epr_[static_cast<std::size_t>(o.n_epr)];
}

EmissionOutcome sample_emission(Rng& rng, const SourceConfig& cfg) {
  return EmissionSampler(cfg)(rng);
}

double wrong_event_fraction(const SourceConfig& cfg) {
  const EmissionSampler s(cfg);
  const double right = s.probability({1, 1});
  const double wrong = s.probability({2, 0}) + s.probability({0, 2});
  if (right + wrong <= 0.0) return 0.0;
  return wrong / (right + wrong);
}

}  // namespace tbtele
