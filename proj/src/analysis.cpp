#include "tbtele/analysis.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "tbtele/errors.hpp"

namespace tbtele {

namespace {

// Substream blocks, one per measurement, so runs never share random numbers.
constexpr std::uint64_t kStreamBlock = 1ULL << 20;
constexpr std::uint64_t kNorthBlock = 4000;
constexpr std::uint64_t kSouthBlock = 4001;
constexpr std::uint64_t kSpuriousBlock = 4002;

constexpr int kMiddleSlot = 1;

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

ValueWithError binomial(std::int64_t k, std::int64_t n) {
  if (n <= 0) return {0.0, 0.0};
  const double f = static_cast<double>(k) / static_cast<double>(n);
  return {f, std::sqrt(f * (1.0 - f) / static_cast<double>(n))};
}

void require_equatorial(const ExperimentConfig& cfg) {
  if (!near(cfg.alice.a0, kInvSqrt2) || !near(cfg.analyzer.k0, kInvSqrt2))
    throw Error(ErrorKind::ConfigError, "phase scan needs Alice and Bob couplers at 50 %");
}

}  // namespace

std::string_view to_string(Pole p) { return p == Pole::north ? "north" : "south"; }

std::vector<double> scan_betas(int points) {
  if (points < 1) throw Error(ErrorKind::DomainError, "scan needs at least one point");
  std::vector<double> b(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) b[i] = 2.0 * std::numbers::pi * i / points;
  return b;
}

std::vector<ScanPoint> run_phase_scan(const ExperimentConfig& cfg, std::span<const double> betas,
                                      const RunOptions& options,
                                      std::vector<std::vector<CoincidenceEvent>>* events) {
  cfg.validate();
  require_equatorial(cfg);
  std::vector<ScanPoint> out;
  if (events) events->assign(betas.size(), {});
  for (std::size_t i = 0; i < betas.size(); ++i) {
    ExperimentConfig point = cfg;
    point.analyzer.beta = betas[i];
    const CompiledExperiment exp(point);
    const FrameCounts c =
        run_monte_carlo(exp, cfg.pulses_per_point, options, i * kStreamBlock,
                        events ? &(*events)[i] : nullptr);
    out.push_back({betas[i], c.fourfold_by_slot[kMiddleSlot], c.control_by_slot[kMiddleSlot],
                   c.pulses});
  }
  return out;
}

std::vector<ScanExpectation> expected_phase_scan(const ExperimentConfig& cfg,
                                                 std::span<const double> betas) {
  require_equatorial(cfg);
  std::vector<ScanExpectation> out;
  for (double beta : betas) {
    ExperimentConfig point = cfg;
    point.analyzer.beta = beta;
    const FrameProbabilities p = analytic_frame_probabilities(CompiledExperiment(point));
    out.push_back({beta, p.fourfold_by_slot[kMiddleSlot], p.control_by_slot[kMiddleSlot]});
  }
  return out;
}

VisibilityFit fit_visibility(std::span<const ScanPoint> points) {
  if (points.size() < 4) throw Error(ErrorKind::DegenerateFit, "fit needs at least 4 points");
  double lo = points.front().beta, hi = lo, total = 0.0;
  for (const auto& p : points) {
    lo = std::min(lo, p.beta);
    hi = std::max(hi, p.beta);
    total += static_cast<double>(p.fourfold_count);
  }
  if (hi - lo < std::numbers::pi - 1e-9)
    throw Error(ErrorKind::DegenerateFit, "scan spans less than half a period");
  if (total <= 0.0) throw Error(ErrorKind::DegenerateFit, "no counts to fit");

  // Poisson weights 1/max(n,1); the inverse normal matrix is then the
  // covariance of the coefficients.
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const auto& p : points) {
    const double n = static_cast<double>(p.fourfold_count);
    const double w = 1.0 / std::max(n, 1.0);
    const Eigen::Vector3d x(1.0, std::cos(p.beta), std::sin(p.beta));
    normal += w * x * x.transpose();
    rhs += w * n * x;
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (lu.rank() < 3) throw Error(ErrorKind::DegenerateFit, "design matrix rank-deficient");
  const Eigen::Vector3d c = lu.solve(rhs);
  const Eigen::Matrix3d cov = lu.inverse();
  if (!(c(0) > 0.0)) throw Error(ErrorKind::DegenerateFit, "non-positive fitted mean");

  VisibilityFit f;
  f.c0 = c(0);
  f.c1 = c(1);
  f.c2 = c(2);
  const double r = std::hypot(c(1), c(2));
  f.visibility = r / c(0);
  Eigen::Vector3d gv;
  if (r > 0.0) {
    gv << -f.visibility / c(0), c(1) / (c(0) * r), c(2) / (c(0) * r);
    f.phase = std::atan2(c(2), -c(1));
    const Eigen::Vector3d gp(0.0, c(2) / (r * r), -c(1) / (r * r));
    f.sigma_phase = std::sqrt(std::max(0.0, gp.dot(cov * gp)));
  } else {
    gv << 0.0, std::sqrt(0.5) / c(0), std::sqrt(0.5) / c(0);
    f.sigma_phase = std::numbers::pi;
  }
  f.sigma_visibility = std::sqrt(std::max(0.0, gv.dot(cov * gv)));
  const double cap = 1.0 + 3.0 * f.sigma_visibility;
  if (f.visibility > cap) {
    f.visibility = cap;
    f.clamped = true;
  }
  return f;
}

double f_equator(double visibility) {
  constexpr double tol = 1e-9;
  if (!(visibility >= -tol && visibility <= 1.0 + tol))
    throw Error(ErrorKind::DomainError, "visibility outside [0,1]");
  return (1.0 + visibility) / 2.0;
}

ValueWithError f_equator(const ValueWithError& visibility) {
  // A fitted V may exceed 1 within its error; the fidelity is capped at 1.
  const double v = std::clamp(visibility.value, 0.0, 1.0);
  return {f_equator(v), visibility.error / 2.0};
}

double mean_fidelity(double f_eq, double f_poles) {
  constexpr double tol = 1e-9;
  for (double f : {f_eq, f_poles})
    if (!(f >= -tol && f <= 1.0 + tol))
      throw Error(ErrorKind::DomainError, "fidelity outside [0,1]");
  return 2.0 / 3.0 * f_eq + 1.0 / 3.0 * f_poles;
}

ValueWithError mean_fidelity(const ValueWithError& f_eq, const ValueWithError& f_poles) {
  return {mean_fidelity(f_eq.value, f_poles.value),
          std::hypot(2.0 / 3.0 * f_eq.error, 1.0 / 3.0 * f_poles.error)};
}

ExperimentConfig pole_config(const ExperimentConfig& cfg, Pole pole) {
  ExperimentConfig out = cfg;
  out.alice.a0 = pole == Pole::north ? 1.0 : 0.0;
  out.alice.alpha = 0.0;
  out.analyzer.k0 = 1.0;
  out.analyzer.beta = 0.0;
  return out;
}

int correct_slot(const AnalyzerSetting& analyzer, Pole pole) {
  const int shift = analyzer.k0 < 0.5 ? 1 : 0;
  // north |1,0> arrives at Bob as |0,1>, south the other way round
  return (pole == Pole::north ? 1 : 0) + shift;
}

int wrong_slot(const AnalyzerSetting& analyzer, Pole pole) {
  const int shift = analyzer.k0 < 0.5 ? 1 : 0;
  return (pole == Pole::north ? 0 : 1) + shift;
}

namespace {

void require_pole(const ExperimentConfig& cfg, Pole pole) {
  const double a0 = pole == Pole::north ? 1.0 : 0.0;
  if (!near(cfg.alice.a0, a0))
    throw Error(ErrorKind::ConfigError,
                std::string("Alice not at the ") + std::string(to_string(pole)) + " pole setting");
  if (!cfg.analyzer.single_path())
    throw Error(ErrorKind::ConfigError, "pole measurement needs a single-path analyzer");
}

}  // namespace

PoleResult run_poles(const ExperimentConfig& cfg, Pole pole, const RunOptions& options,
                     std::vector<CoincidenceEvent>* events) {
  cfg.validate();
  require_pole(cfg, pole);
  const CompiledExperiment exp(cfg);
  const std::uint64_t block = pole == Pole::north ? kNorthBlock : kSouthBlock;
  const FrameCounts c =
      run_monte_carlo(exp, cfg.pulses_per_pole, options, block * kStreamBlock, events);
  PoleResult r;
  r.pole = pole;
  r.pulses = c.pulses;
  r.r_correct = c.fourfold_by_slot[correct_slot(cfg.analyzer, pole)];
  r.r_wrong = c.fourfold_by_slot[wrong_slot(cfg.analyzer, pole)];
  if (r.r_correct + r.r_wrong == 0)
    throw Error(ErrorKind::ZeroState, std::string("no fourfold coincidences at the ") +
                                          std::string(to_string(pole)) + " pole");
  r.fidelity = binomial(r.r_correct, r.r_correct + r.r_wrong);
  return r;
}

ValueWithError expected_pole_fidelity(const ExperimentConfig& cfg, Pole pole) {
  require_pole(cfg, pole);
  const FrameProbabilities p = analytic_frame_probabilities(CompiledExperiment(cfg));
  const double ok = p.fourfold_by_slot[correct_slot(cfg.analyzer, pole)];
  const double bad = p.fourfold_by_slot[wrong_slot(cfg.analyzer, pole)];
  if (ok + bad <= 0.0) throw Error(ErrorKind::ZeroState, "no fourfold coincidences expected");
  return {ok / (ok + bad), 0.0};
}

ValueWithError pole_average(const PoleResult& north, const PoleResult& south) {
  return {(north.fidelity.value + south.fidelity.value) / 2.0,
          std::hypot(north.fidelity.error, south.fidelity.error) / 2.0};
}

FidelityReport build_report(const VisibilityFit& fit, const PoleResult& north,
                            const PoleResult& south) {
  FidelityReport r;
  r.visibility = {fit.visibility, fit.sigma_visibility};
  r.phase = {fit.phase, fit.sigma_phase};
  r.f_equator = f_equator(r.visibility);
  r.f_pole_north = north.fidelity;
  r.f_pole_south = south.fidelity;
  r.f_poles = pole_average(north, south);
  r.f_mean = mean_fidelity(r.f_equator, r.f_poles);
  return r;
}

ValueWithError spurious_fraction(const ExperimentConfig& cfg, const RunOptions& options) {
  const FrameCounts c = run_monte_carlo(CompiledExperiment(cfg), cfg.pulses_per_point, options,
                                        kSpuriousBlock * kStreamBlock);
  return binomial(c.bsm_success - c.bsm_genuine, c.bsm_success);
}

double expected_spurious_fraction(const ExperimentConfig& cfg) {
  const FrameProbabilities p = analytic_frame_probabilities(CompiledExperiment(cfg));
  if (p.bsm_success <= 0.0) return 0.0;
  return 1.0 - p.bsm_genuine / p.bsm_success;
}

ValueWithError spurious_fourfold_fraction(const ExperimentConfig& cfg,
                                          const RunOptions& options) {
  const FrameCounts c = run_monte_carlo(CompiledExperiment(cfg), cfg.pulses_per_point, options,
                                        kSpuriousBlock * kStreamBlock);
  return binomial(c.fourfold() - c.fourfold_genuine(), c.fourfold());
}

double expected_spurious_fourfold_fraction(const ExperimentConfig& cfg) {
  const FrameProbabilities p = analytic_frame_probabilities(CompiledExperiment(cfg));
  if (p.fourfold() <= 0.0) return 0.0;
  return 1.0 - p.fourfold_genuine() / p.fourfold();
}

FullRun run_full(const ExperimentConfig& cfg, const RunOptions& options) {
  FullRun r;
  const auto betas = scan_betas(cfg.scan_points);
  r.scan = run_phase_scan(cfg, betas, options);
  r.fit = fit_visibility(r.scan);
  r.north = run_poles(pole_config(cfg, Pole::north), Pole::north, options);
  r.south = run_poles(pole_config(cfg, Pole::south), Pole::south, options);
  r.report = build_report(r.fit, r.north, r.south);
  return r;
}

}  // namespace tbtele
