#pragma once

// Pair emission of the two down-conversion crystals: pair-number statistics,
// the mode-overlap model for photon indistinguishability at Charlie's coupler
// and the joint multi-photon emission state.

#include <compare>
#include <string_view>
#include <vector>

#include "tbtele/optics.hpp"
#include "tbtele/qstate.hpp"
#include "tbtele/rng.hpp"

namespace tbtele {

// `single` is a deterministic one-pair source used for ideal references.
enum class PairStatistics { thermal, poissonian, single };

std::string_view to_string(PairStatistics s);
PairStatistics pair_statistics_from_string(std::string_view s);

struct SourceConfig {
  double p_alice = 0.10;  // P(at least one pair per pulse), Alice's crystal
  double ratio = 8.0;     // p_alice / p_epr
  PairStatistics statistics = PairStatistics::thermal;
  int pair_cutoff = 2;    // per crystal

  double p_epr() const { return p_alice / ratio; }
  void validate() const;
};

struct IndistinguishabilityConfig {
  double arrival_offset_fs = 0.0;
  double coherence_time_fs = 250.0;
  double interferometer_mismatch_fs = 0.0;
  double spectral_overlap = 1.0;
  double polarization_overlap = 1.0;

  void validate() const;
};

struct EmissionOutcome {
  int n_alice = 0;
  int n_epr = 0;

  friend auto operator<=>(const EmissionOutcome&, const EmissionOutcome&) = default;
};

// P(n) for n = 0..cutoff, parameterized by P(n >= 1) = p before truncation.
std::vector<double> pair_number_dist(double p, PairStatistics statistics, int cutoff);

double overlap_mu(const IndistinguishabilityConfig& cfg);

// Joint emission: n_alice photons through Alice's interferometer onto AliceIn
// (partners on AliceIdler) and n_epr entangled pairs on CharlieE/BobIn.
// Alice photons overlap the pair photons' wavepacket with amplitude sqrt(mu).
PhotonicState emission_state(const EmissionOutcome& outcome, const QubitSpec& alice,
                             const EprConfig& epr, double mu,
                             bool include_coupler_loss = true,
                             int cutoff = kDefaultPhotonCutoff);

// Product distribution of both crystals with precomputed cumulative tables.
class EmissionSampler {
 public:
  explicit EmissionSampler(const SourceConfig& cfg);

  EmissionOutcome operator()(Rng& rng) const;

  const std::vector<double>& alice_dist() const { return alice_; }
  const std::vector<double>& epr_dist() const { return epr_; }
  double probability(const EmissionOutcome& o) const;

 private:
  std::vector<double> alice_, epr_;
  std::vector<double> alice_cdf_, epr_cdf_;
};

EmissionOutcome sample_emission(Rng& rng, const SourceConfig& cfg);

// Among pulses putting exactly two 1310 nm photons towards Charlie, the
// fraction that is not one photon from each crystal.
double wrong_event_fraction(const SourceConfig& cfg);

}  // namespace tbtele
