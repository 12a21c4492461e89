#pragma once

// Time-bin optical elements compiled to ModeTransforms: Alice's preparation
// interferometer, Bob's analyzer, Charlie's 50/50 coupler, and the
// time-bin entangled pair produced behind the pump interferometer.

#include <numbers>
#include <utility>
#include <vector>

#include "tbtele/qstate.hpp"

namespace tbtele {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Tag assigned to the distinguishable part of Alice-crystal photons.
inline constexpr int kAliceDistinguishableTag = 1;
// Tag marking the incoherent part of the pair's second time bin.
inline constexpr int kEprIncoherentTag = 2;

struct QubitSpec {
  double a0 = kInvSqrt2;  // first-bin amplitude
  double alpha = 0.0;     // relative phase
  bool discrete_coupler = false;

  double a1() const;
  void validate() const;
};

struct AnalyzerSetting {
  double k0 = kInvSqrt2;
  double beta = 0.0;
  bool discrete_coupler = false;

  double k1() const;
  void validate() const;
  bool single_path() const;
};

struct EprConfig {
  double phi = 0.0;
  double visibility_cap = 0.95;

  void validate() const;
};

struct PoincarePoint {
  double latitude = 0.0;
  double longitude = 0.0;
};

// Passive-coupler unbalanced interferometer acting on the source mode
// (AliceSrc, bin 0). Without loss it is the ideal switch-based device.
ModeTransform preparation_transform(const QubitSpec& spec, bool include_coupler_loss);

// Single photon prepared on AliceIn (plus an AliceLoss branch when lossy).
PhotonicState prepare_qubit(const QubitSpec& spec, bool include_coupler_loss);

// Creation polynomial of one time-bin entangled pair on CharlieE and BobIn.
std::vector<std::pair<Occupation, ComplexAmp>> epr_pair_polynomial(const EprConfig& cfg);
PhotonicState epr_state(const EprConfig& cfg);

// Unbalanced analyzer. Single-path settings (k0 = 1 short arm, k0 = 0 long
// arm) are unitary and slot-resolved; otherwise passive couplers route half of
// the light to `loss`. Detection in the middle slot projects onto
// k0|1,0> + k1 e^{i beta}|0,1>.
ModeTransform analyzer_transform(const AnalyzerSetting& setting,
                                 Port input = Port::BobIn,
                                 Port detector = Port::BobDet,
                                 Port loss = Port::BobLoss, int input_bins = 2);

// 50/50 coupler {CharlieA, CharlieE} -> {C1, C2} per bin and tag.
ModeTransform bsm_splitter(int bins = 2);

// Identity relabeling of every bin of `from` onto `to`.
ModeTransform fiber_link(Port from, Port to, int bins = 2);

PoincarePoint poincare_point(const QubitSpec& spec);

}  // namespace tbtele
