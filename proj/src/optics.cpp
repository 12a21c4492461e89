#include "tbtele/optics.hpp"

#include <algorithm>
#include <cmath>

namespace tbtele {

namespace {

bool is_discrete_amplitude(double a) {
  constexpr double tol = 1e-12;
  return std::abs(a) < tol || std::abs(a - 1.0) < tol ||
         std::abs(a - kInvSqrt2) < tol;
}

void check_amplitude(double a, bool discrete, const char* what) {
  if (!(a >= 0.0 && a <= 1.0))
    throw Error(ErrorKind::DomainError, std::string(what) + " outside [0,1]");
  if (discrete && !is_discrete_amplitude(a))
    throw Error(ErrorKind::DomainError,
                std::string(what) + " must be 0, 1 or 1/sqrt(2) with a discrete coupler");
}

double complement(double a) { return std::sqrt(std::max(0.0, 1.0 - a * a)); }

double wrap_phase(double phi) {
  double w = std::remainder(phi, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

}  // namespace

double QubitSpec::a1() const { return complement(a0); }

void QubitSpec::validate() const {
  check_amplitude(a0, discrete_coupler, "a0");
  if (!std::isfinite(alpha)) throw Error(ErrorKind::DomainError, "alpha not finite");
}

double AnalyzerSetting::k1() const { return complement(k0); }

void AnalyzerSetting::validate() const {
  check_amplitude(k0, discrete_coupler, "k0");
  if (!std::isfinite(beta)) throw Error(ErrorKind::DomainError, "beta not finite");
}

bool AnalyzerSetting::single_path() const {
  return std::abs(k0) < 1e-12 || std::abs(k0 - 1.0) < 1e-12;
}

void EprConfig::validate() const {
  if (!(visibility_cap >= 0.0 && visibility_cap <= 1.0))
    throw Error(ErrorKind::DomainError, "visibility_cap outside [0,1]");
  if (!std::isfinite(phi)) throw Error(ErrorKind::DomainError, "phi not finite");
}

ModeTransform preparation_transform(const QubitSpec& spec, bool include_coupler_loss) {
  spec.validate();
  const ComplexAmp late = spec.a1() * std::polar(1.0, spec.alpha);
  if (!include_coupler_loss) {
    Eigen::MatrixXcd m(2, 1);
    m << spec.a0, late;
    return ModeTransform({{Port::AliceSrc, 0, 0}},
                         {{Port::AliceIn, 0, 0}, {Port::AliceIn, 1, 0}}, m, true);
  }
  // Second coupler: sum port continues to Charlie, difference port is lost.
  Eigen::MatrixXcd m(4, 1);
  m << spec.a0 * kInvSqrt2, late * kInvSqrt2, spec.a0 * kInvSqrt2, -late * kInvSqrt2;
  return ModeTransform({{Port::AliceSrc, 0, 0}},
                       {{Port::AliceIn, 0, 0},
                        {Port::AliceIn, 1, 0},
                        {Port::AliceLoss, 0, 0},
                        {Port::AliceLoss, 1, 0}},
                       m, true);
}

PhotonicState prepare_qubit(const QubitSpec& spec, bool include_coupler_loss) {
  return apply_transform(PhotonicState::single_photon({Port::AliceSrc, 0, 0}),
                         preparation_transform(spec, include_coupler_loss));
}

std::vector<std::pair<Occupation, ComplexAmp>> epr_pair_polynomial(const EprConfig& cfg) {
  cfg.validate();
  const ComplexAmp phase = std::polar(1.0, cfg.phi);
  const double coherent = cfg.visibility_cap;
  const double incoherent = complement(cfg.visibility_cap);
  std::vector<std::pair<Occupation, ComplexAmp>> poly;
  poly.push_back({make_occupation({{{Port::CharlieE, 0, 0}, 1}, {{Port::BobIn, 0, 0}, 1}}),
                  kInvSqrt2});
  poly.push_back({make_occupation({{{Port::CharlieE, 1, 0}, 1}, {{Port::BobIn, 1, 0}, 1}}),
                  kInvSqrt2 * phase * coherent});
  if (incoherent > 0.0) {
    poly.push_back({make_occupation({{{Port::CharlieE, 1, kEprIncoherentTag}, 1},
                                     {{Port::BobIn, 1, kEprIncoherentTag}, 1}}),
                    kInvSqrt2 * phase * incoherent});
  }
  return poly;
}

PhotonicState epr_state(const EprConfig& cfg) {
  return creation_power(epr_pair_polynomial(cfg), 1);
}

ModeTransform analyzer_transform(const AnalyzerSetting& setting, Port input,
                                 Port detector, Port loss, int input_bins) {
  setting.validate();
  std::vector<Mode> ins;
  for (int b = 0; b < input_bins; ++b) ins.push_back({input, b, 0});

  if (setting.single_path()) {
    const bool long_arm = setting.k0 < 0.5;
    const int shift = long_arm ? 1 : 0;
    const ComplexAmp phase = long_arm ? std::polar(1.0, setting.beta) : ComplexAmp{1.0};
    std::vector<Mode> outs;
    for (int b = 0; b < input_bins; ++b) outs.push_back({detector, b + shift, 0});
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(input_bins, input_bins) * phase;
    return ModeTransform(ins, outs, m);
  }

  const double s = setting.k1() * kInvSqrt2;
  const ComplexAmp l = setting.k0 * kInvSqrt2 * std::polar(1.0, setting.beta);
  const int out_bins = input_bins + 1;
  std::vector<Mode> outs;
  for (int b = 0; b < out_bins; ++b) outs.push_back({detector, b, 0});
  for (int b = 0; b < out_bins; ++b) outs.push_back({loss, b, 0});
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * out_bins, input_bins);
  for (int b = 0; b < input_bins; ++b) {
    m(b, b) = s;
    m(b + 1, b) = l;
    m(out_bins + b, b) = s;
    m(out_bins + b + 1, b) = -l;
  }
  return ModeTransform(ins, outs, m, true);
}

ModeTransform bsm_splitter(int bins) {
  std::vector<Mode> ins, outs;
  for (int b = 0; b < bins; ++b) {
    ins.push_back({Port::CharlieA, b, 0});
    ins.push_back({Port::CharlieE, b, 0});
    outs.push_back({Port::C1, b, 0});
    outs.push_back({Port::C2, b, 0});
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * bins, 2 * bins);
  for (int b = 0; b < bins; ++b) {
    const int a = 2 * b, e = 2 * b + 1;  // input columns
    const int c = 2 * b, d = 2 * b + 1;  // output rows
    m(c, a) = kInvSqrt2;
    m(d, a) = kInvSqrt2;
    m(c, e) = kInvSqrt2;
    m(d, e) = -kInvSqrt2;
  }
  return ModeTransform(ins, outs, m);
}

ModeTransform fiber_link(Port from, Port to, int bins) {
  std::vector<Mode> ins, outs;
  for (int b = 0; b < bins; ++b) {
    ins.push_back({from, b, 0});
    outs.push_back({to, b, 0});
  }
  return ModeTransform(ins, outs, Eigen::MatrixXcd::Identity(bins, bins));
}

PoincarePoint poincare_point(const QubitSpec& spec) {
  spec.validate();
  const double a0 = std::clamp(spec.a0, 0.0, 1.0);
  return {std::numbers::pi / 2.0 - 2.0 * std::acos(a0), wrap_phase(spec.alpha)};
}

}  // namespace tbtele
