#include "tbtele/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tbtele/errors.hpp"
#include "tbtele/rng.hpp"

namespace tbtele {

namespace {

std::string fixed(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace

bool states_match(const PhotonicState& a, const PhotonicState& b, double tol) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].occupations != tb[i].occupations) return false;
    if (std::abs(ta[i].amplitude - tb[i].amplitude) > tol) return false;
  }
  return true;
}

std::vector<GoldenCase> golden_cases() {
  std::vector<GoldenCase> out;
  out.push_back({"prepared_qubit_equator", prepare_qubit(QubitSpec{}, true)});
  const ExperimentConfig ideal = ExperimentConfig::ideal();
  out.push_back({"ideal_final_1_1", final_state(ideal, {1, 1})});
  const ExperimentConfig lab;
  out.push_back({"lab_final_1_1", final_state(lab, {1, 1})});
  out.push_back({"lab_final_2_0", final_state(lab, {2, 0})});
  out.push_back({"lab_final_0_2", final_state(lab, {0, 2})});
  return out;
}

std::vector<OracleResult> check_ideal_teleportation(std::uint64_t seed, int trials) {
  Rng rng(seed, 0x0AC1E);
  double worst = 1.0, p_min = 1.0, p_max = 0.0;
  for (int i = 0; i < trials; ++i) {
    ExperimentConfig cfg = ExperimentConfig::ideal();
    cfg.alice.a0 = std::cos(std::acos(1.0 - 2.0 * rng.uniform()) / 2.0);
    cfg.alice.alpha = 2.0 * std::numbers::pi * rng.uniform();
    const BobState bob = analytic_bob_state(cfg);
    worst = std::min(worst, fidelity(bob.rho, expected_bob_state(cfg.alice)));
    p_min = std::min(p_min, bob.success_probability);
    p_max = std::max(p_max, bob.success_probability);
  }
  std::vector<OracleResult> r;
  r.push_back({"ideal_teleportation_fidelity", std::abs(1.0 - worst) < 1e-9,
               "min fidelity " + fixed(worst, 12) + " over " + std::to_string(trials)});
  r.push_back({"ideal_success_probability",
               std::abs(p_min - 0.125) < 1e-9 && std::abs(p_max - 0.125) < 1e-9,
               "range [" + fixed(p_min, 12) + ", " + fixed(p_max, 12) + "]"});
  return r;
}

std::vector<OracleResult> check_monte_carlo(const ExperimentConfig& cfg,
                                            const OracleOptions& options) {
  const CompiledExperiment exp(cfg);
  const FrameProbabilities p = analytic_frame_probabilities(exp);
  std::vector<OracleResult> out;
  for (bool per_pulse : {false, true}) {
    RunOptions run;
    run.seed = options.seed;
    run.workers = options.workers;
    run.per_pulse = per_pulse;
    const FrameCounts c = run_monte_carlo(exp, options.pulses, run, (per_pulse ? 7000ULL : 7001ULL) << 20);
    const double n = static_cast<double>(c.pulses);

    std::vector<std::pair<std::string, std::pair<std::int64_t, double>>> cats{
        {"c1", {c.c1, p.c1}},
        {"bsm", {c.bsm_success, p.bsm_success}},
        {"bsm_genuine", {c.bsm_genuine, p.bsm_genuine}}};
    for (int s = 0; s < kFrameSlots; ++s) {
      cats.push_back({"fourfold@" + std::to_string(s), {c.fourfold_by_slot[s], p.fourfold_by_slot[s]}});
      cats.push_back({"control@" + std::to_string(s), {c.control_by_slot[s], p.control_by_slot[s]}});
    }
    bool ok = true;
    double worst_z = 0.0;
    std::string worst = "-";
    for (const auto& [name, kp] : cats) {
      const auto [k, prob] = kp;
      const double mean = n * prob;
      const double sd = std::sqrt(n * prob * (1.0 - prob));
      if (prob <= 0.0) {
        if (k != 0) {
          ok = false;
          worst = name + " counted " + std::to_string(k) + " with zero probability";
        }
        continue;
      }
      const double z = (static_cast<double>(k) - mean) / sd;
      if (std::abs(z) > std::abs(worst_z)) {
        worst_z = z;
        worst = name;
      }
      if (std::abs(z) > options.sigmas) ok = false;
    }
    out.push_back({per_pulse ? "mc_vs_analytic_per_pulse" : "mc_vs_analytic_skipping", ok,
                   "worst " + worst + " z=" + fixed(worst_z) + " over " +
                       std::to_string(c.pulses) + " pulses"});
  }
  return out;
}

std::vector<OracleResult> check_golden(const OracleOptions& options) {
  std::vector<OracleResult> out;
  for (const auto& g : golden_cases()) {
    const auto path = options.golden_dir / (g.name + ".state");
    if (options.update_golden) {
      std::filesystem::create_directories(options.golden_dir);
      std::ofstream(path, std::ios::binary) << serialize_state(g.state);
      out.push_back({"golden:" + g.name, true, "written " + path.string()});
      continue;
    }
    std::ifstream in(path);
    if (!in) {
      out.push_back({"golden:" + g.name, false, "missing " + path.string()});
      continue;
    }
    std::ostringstream os;
    os << in.rdbuf();
    try {
      const PhotonicState ref = parse_state(os.str(), g.state.cutoff());
      const bool ok = states_match(ref, g.state);
      out.push_back({"golden:" + g.name, ok,
                     std::to_string(g.state.terms().size()) + " terms" + (ok ? "" : ", differs")});
    } catch (const Error& e) {
      out.push_back({"golden:" + g.name, false, std::string("unreadable: ") + e.what()});
    }
  }
  return out;
}

std::vector<OracleResult> run_oracle_suite(const ExperimentConfig& cfg,
                                           const OracleOptions& options) {
  std::vector<OracleResult> all = check_ideal_teleportation(options.seed);
  for (auto& r : check_monte_carlo(cfg, options)) all.push_back(std::move(r));
  for (auto& r : check_golden(options)) all.push_back(std::move(r));
  return all;
}

}  // namespace tbtele
