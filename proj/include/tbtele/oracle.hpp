#pragma once

// Self-validation run by `tbtele oracle-check`: exact teleportation on ideal
// settings, Monte-Carlo counts against the analytic frame probabilities, and
// stored reference states.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tbtele/experiment.hpp"

namespace tbtele {

struct OracleResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleOptions {
  std::uint64_t seed = 1;
  int workers = 1;
  std::int64_t pulses = 2'000'000;
  double sigmas = 5.0;  // allowed deviation of an MC count from its expectation
  std::filesystem::path golden_dir;
  bool update_golden = false;  // rewrite the reference files instead of comparing
};

// Named reference states and the recipe that produces them.
struct GoldenCase {
  std::string name;
  PhotonicState state;
};
std::vector<GoldenCase> golden_cases();

// True when both states have the same occupations and amplitudes within tol.
bool states_match(const PhotonicState& a, const PhotonicState& b, double tol = 1e-9);

std::vector<OracleResult> check_ideal_teleportation(std::uint64_t seed, int trials = 20);
// Every coincidence class, both in trigger-skipping and pulse-by-pulse mode.
std::vector<OracleResult> check_monte_carlo(const ExperimentConfig& cfg,
                                            const OracleOptions& options);
std::vector<OracleResult> check_golden(const OracleOptions& options);

std::vector<OracleResult> run_oracle_suite(const ExperimentConfig& cfg,
                                           const OracleOptions& options);

}  // namespace tbtele
