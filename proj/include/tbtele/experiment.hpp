#pragma once

// Full teleportation setup: emission, Alice's preparation, the 2 km fiber to
// Bob, Charlie's coupler, Bob's analyzer and the detection chain.
//
// A CompiledExperiment holds, for every emission outcome, the photon numbers
// each detector sees per slot and their Born weights. Both the exact
// expectation engine and the Monte-Carlo sampler read from these tables.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "tbtele/detection.hpp"
#include "tbtele/optics.hpp"
#include "tbtele/qstate.hpp"
#include "tbtele/spdc.hpp"

namespace tbtele {

struct FiberConfig {
  double bob_km = 2.0;
  double db_per_km = 0.25;

  double transmission() const;
  void validate() const;
};

struct ExperimentConfig {
  SourceConfig source;
  IndistinguishabilityConfig indistinguishability;
  EprConfig epr;
  QubitSpec alice;
  bool alice_coupler_loss = true;
  AnalyzerSetting analyzer;
  DetectorConfig c1 = DetectorConfig::germanium();
  DetectorConfig c2 = DetectorConfig::ingaas();
  DetectorConfig b = DetectorConfig::ingaas();
  TimingConfig timing;
  FiberConfig fiber;
  int photon_cutoff = kDefaultPhotonCutoff;
  std::int64_t pulses_per_point = 10'000'000;  // each phase-scan point
  std::int64_t pulses_per_pole = 10'000'000;
  int scan_points = 12;

  void validate() const;

  // Lossless single-pair reference with perfect detectors and overlap.
  static ExperimentConfig ideal();
};

struct RunOptions {
  std::uint64_t seed = 1;
  int workers = 1;
  bool record_events = false;
  bool per_pulse = false;  // plain pulse-by-pulse sampling, no trigger skipping
};

// Coincidence window per detector, in slots from the frame start: Charlie's
// photons span the two input bins, Bob's analyzer spreads them over three.
// Dark counts later in a detector's window fall outside the TAC acceptance.
inline constexpr std::array<int, 3> kDetectorSlots{2, 2, 3};

// Photon numbers on the detectors, indexed [DetectorId][slot].
using SlotPhotons = std::array<std::array<int, kFrameSlots>, 3>;

struct FrameEntry {
  double probability = 0.0;  // Born weight within its emission outcome
  SlotPhotons photons{};
  // Exactly one Alice photon and one pair photon reached the coupler.
  bool genuine_pair = false;
};

struct OutcomeTable {
  EmissionOutcome outcome;
  double weight = 0.0;     // emission probability
  bool truncated = false;  // above the photon cutoff, treated as an empty frame
  std::vector<FrameEntry> entries;
  std::vector<double> cdf;
};

class CompiledExperiment {
 public:
  explicit CompiledExperiment(const ExperimentConfig& cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const std::vector<OutcomeTable>& outcomes() const { return outcomes_; }
  const EmissionSampler& sampler() const { return sampler_; }
  // nullptr when the outcome has zero emission probability
  const OutcomeTable* table_for(const EmissionOutcome& o) const;

  double efficiency(DetectorId d) const { return eff_[static_cast<std::size_t>(d)]; }
  double slot_dark(DetectorId d) const { return dark_[static_cast<std::size_t>(d)]; }
  bool gated(DetectorId d) const { return gated_[static_cast<std::size_t>(d)]; }
  double truncated_weight() const;

 private:
  ExperimentConfig cfg_;
  EmissionSampler sampler_;
  std::vector<OutcomeTable> outcomes_;
  std::array<double, 3> eff_{}, dark_{};
  std::array<bool, 3> gated_{};
};

// Final optical state of one emission outcome just before detection.
PhotonicState final_state(const ExperimentConfig& cfg, const EmissionOutcome& outcome);

struct FrameProbabilities {
  double c1 = 0.0;
  double bsm_success = 0.0;
  double bsm_genuine = 0.0;
  std::array<double, kFrameSlots> fourfold_by_slot{};
  std::array<double, kFrameSlots> fourfold_genuine_by_slot{};
  std::array<double, kFrameSlots> control_by_slot{};

  double fourfold() const;
  double fourfold_genuine() const;
};

// Exact per-pulse probabilities of each coincidence class.
FrameProbabilities analytic_frame_probabilities(const CompiledExperiment& exp);

struct FrameCounts {
  std::int64_t pulses = 0;
  std::int64_t c1 = 0;
  std::int64_t bsm_success = 0;
  std::int64_t bsm_genuine = 0;
  std::array<std::int64_t, kFrameSlots> fourfold_by_slot{};
  std::array<std::int64_t, kFrameSlots> fourfold_genuine_by_slot{};
  std::array<std::int64_t, kFrameSlots> control_by_slot{};

  std::int64_t fourfold() const;
  std::int64_t fourfold_genuine() const;
  FrameCounts& operator+=(const FrameCounts& o);
};

// Monte-Carlo over `pulses` laser pulses. Work is split into `workers`
// contiguous pulse ranges, range w drawing from Rng(seed, stream_base + w).
FrameCounts run_monte_carlo(const CompiledExperiment& exp, std::int64_t pulses,
                            const RunOptions& options, std::uint64_t stream_base = 0,
                            std::vector<CoincidenceEvent>* events = nullptr);

struct BobState {
  DensityOperator rho;
  double success_probability = 0.0;  // per pulse, before detector efficiencies
};

// Bob's photon conditioned on C1 in slot 0 and C2 in slot 1 registering
// exactly one photon each, nothing else at Charlie, mixed over emission
// outcomes and photon tags.
BobState analytic_bob_state(const ExperimentConfig& cfg);

// Ideal teleported state a1 e^{i alpha}|BobIn,0> - a0|BobIn,1>.
PhotonicState expected_bob_state(const QubitSpec& alice);

}  // namespace tbtele
