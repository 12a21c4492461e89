#pragma once

// Measurement pipeline on top of the experiment: Bob's phase scan, the pole
// measurements, the fringe fit and the fidelity bookkeeping.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tbtele/experiment.hpp"

namespace tbtele {

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
};

struct ScanPoint {
  double beta = 0.0;
  std::int64_t fourfold_count = 0;  // B in the interfering middle slot
  std::int64_t control_count = 0;   // C1-B, same B slot
  std::int64_t pulses = 0;
};

// Expected per-pulse rates for the same quantities.
struct ScanExpectation {
  double beta = 0.0;
  double fourfold = 0.0;
  double control = 0.0;
};

struct VisibilityFit {
  double visibility = 0.0;
  double sigma_visibility = 0.0;
  double phase = 0.0;  // alpha in (1 - V cos(alpha + beta)) / 2
  double sigma_phase = 0.0;
  bool clamped = false;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // c0 + c1 cos(beta) + c2 sin(beta)
};

enum class Pole { north, south };
std::string_view to_string(Pole p);

struct PoleResult {
  Pole pole = Pole::north;
  std::int64_t r_correct = 0;
  std::int64_t r_wrong = 0;
  std::int64_t pulses = 0;
  ValueWithError fidelity;
};

struct FidelityReport {
  ValueWithError visibility;
  ValueWithError phase;
  ValueWithError f_equator;
  ValueWithError f_pole_north;
  ValueWithError f_pole_south;
  ValueWithError f_poles;
  ValueWithError f_mean;
};

// `points` phases evenly spaced over [0, 2 pi).
std::vector<double> scan_betas(int points);

// Throws ConfigError unless Alice and the analyzer are at the 50 % settings.
std::vector<ScanPoint> run_phase_scan(const ExperimentConfig& cfg, std::span<const double> betas,
                                      const RunOptions& options,
                                      std::vector<std::vector<CoincidenceEvent>>* events = nullptr);
std::vector<ScanExpectation> expected_phase_scan(const ExperimentConfig& cfg,
                                                 std::span<const double> betas);

VisibilityFit fit_visibility(std::span<const ScanPoint> points);

double f_equator(double visibility);
ValueWithError f_equator(const ValueWithError& visibility);
double mean_fidelity(double f_eq, double f_poles);
ValueWithError mean_fidelity(const ValueWithError& f_eq, const ValueWithError& f_poles);

// Alice at the pole's coupler setting, analyzer on its short arm.
ExperimentConfig pole_config(const ExperimentConfig& cfg, Pole pole);
// Bob's slot for the bit-flipped pole state under the given analyzer.
int correct_slot(const AnalyzerSetting& analyzer, Pole pole);
int wrong_slot(const AnalyzerSetting& analyzer, Pole pole);

// Throws ConfigError unless cfg is at that pole's settings.
PoleResult run_poles(const ExperimentConfig& cfg, Pole pole, const RunOptions& options,
                     std::vector<CoincidenceEvent>* events = nullptr);
ValueWithError expected_pole_fidelity(const ExperimentConfig& cfg, Pole pole);

// Mean of both poles.
ValueWithError pole_average(const PoleResult& north, const PoleResult& south);

FidelityReport build_report(const VisibilityFit& fit, const PoleResult& north,
                            const PoleResult& south);

// Fraction of bsm_success frames whose Charlie photons are not exactly one
// from each crystal (dark-count participation also counts as spurious).
ValueWithError spurious_fraction(const ExperimentConfig& cfg, const RunOptions& options);
double expected_spurious_fraction(const ExperimentConfig& cfg);
// Same, restricted to frames that complete a fourfold coincidence.
ValueWithError spurious_fourfold_fraction(const ExperimentConfig& cfg, const RunOptions& options);
double expected_spurious_fourfold_fraction(const ExperimentConfig& cfg);

struct FullRun {
  std::vector<ScanPoint> scan;
  VisibilityFit fit;
  PoleResult north, south;
  FidelityReport report;
};

FullRun run_full(const ExperimentConfig& cfg, const RunOptions& options);

}  // namespace tbtele
