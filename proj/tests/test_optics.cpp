#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tbtele/optics.hpp"

using namespace tbtele;

namespace {

constexpr double kPi = std::numbers::pi;

double weight_in(const PhotonicState& s, Port p, int bin) {
  double w = 0.0;
  for (const auto& t : s.terms())
    if (count_in_slot(t.occupations, p, bin) > 0) w += std::norm(t.amplitude);
  return w;
}

double both_in(const PhotonicState& s, Port p, int bp, Port q, int bq) {
  double w = 0.0;
  for (const auto& t : s.terms())
    if (count_in_slot(t.occupations, p, bp) == 1 && count_in_slot(t.occupations, q, bq) == 1)
      w += std::norm(t.amplitude);
  return w;
}

void expect_unitary(const ModeTransform& t) {
  const Eigen::MatrixXcd& m = t.matrix();
  EXPECT_TRUE((m.adjoint() * m).isIdentity(1e-12));
}

}  // namespace

TEST(Preparation, LosslessAmplitudes) {
  const QubitSpec q{0.6, 0.9, false};
  const PhotonicState s = prepare_qubit(q, false);
  const ComplexAmp a0 = s.amplitude_of(make_occupation({{{Port::AliceIn, 0, 0}, 1}}));
  const ComplexAmp a1 = s.amplitude_of(make_occupation({{{Port::AliceIn, 1, 0}, 1}}));
  EXPECT_NEAR(std::abs(a0 - 0.6), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(a1 - std::polar(0.8, 0.9)), 0.0, 1e-12);
}

TEST(Preparation, PassiveCouplerLosesHalf) {
  const PhotonicState s = prepare_qubit({0.3, 2.0, false}, true);
  EXPECT_NEAR(weight_in(s, Port::AliceIn, 0) + weight_in(s, Port::AliceIn, 1), 0.5, 1e-12);
  EXPECT_NEAR(weight_in(s, Port::AliceIn, 0), 0.5 * 0.09, 1e-12);
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
}

TEST(Preparation, DiscreteCouplerRestrictsAmplitude) {
  EXPECT_NO_THROW(prepare_qubit({kInvSqrt2, 0.0, true}, true));
  EXPECT_NO_THROW(prepare_qubit({1.0, 0.0, true}, true));
  EXPECT_THROW(prepare_qubit({0.5, 0.0, true}, true), Error);
  EXPECT_THROW(prepare_qubit({1.2, 0.0, false}, true), Error);
}

TEST(Poincare, PolesAndEquator) {
  EXPECT_NEAR(poincare_point({1.0, 0.0, false}).latitude, kPi / 2, 1e-12);
  EXPECT_NEAR(poincare_point({0.0, 0.0, false}).latitude, -kPi / 2, 1e-12);
  EXPECT_NEAR(poincare_point({kInvSqrt2, 0.0, false}).latitude, 0.0, 1e-9);
  EXPECT_NEAR(poincare_point({kInvSqrt2, 3 * kPi, false}).longitude, kPi, 1e-12);
}

TEST(Epr, PairIsAntiCorrelatedInNothingButTime) {
  const PhotonicState s = epr_state({0.4, 1.0});
  // same bin on both sides, either bin with weight 1/2
  EXPECT_NEAR(both_in(s, Port::CharlieE, 0, Port::BobIn, 0), 0.5, 1e-12);
  EXPECT_NEAR(both_in(s, Port::CharlieE, 1, Port::BobIn, 1), 0.5, 1e-12);
  EXPECT_NEAR(both_in(s, Port::CharlieE, 0, Port::BobIn, 1), 0.0, 1e-12);
}

TEST(Epr, CapBoundsCoherence) {
  const PhotonicState s = epr_state({0.0, 0.6});
  const DensityOperator rho = trace_to_density(s, {Port::CharlieE, Port::BobIn});
  // coherent share 0.6^2 of the late bin keeps tag 0, rest is tagged
  EXPECT_NEAR(rho.purity(), 1.0, 1e-12);
  double tagged = 0.0;
  for (const auto& t : s.terms())
    for (const auto& [m, n] : t.occupations)
      if (m.tag == kEprIncoherentTag && m.spatial == Port::BobIn) tagged += std::norm(t.amplitude);
  EXPECT_NEAR(tagged, 0.5 * (1 - 0.36), 1e-12);
}

// Both photons of the pair through their own 50/50 analyzers. Middle-slot
// coincidences: (1 + cap cos(phi - ba - bb)) / 16.
TEST(Epr, FransonFringe) {
  for (double cap : {1.0, 0.95, 0.5, 0.0}) {
    for (double phi : {0.0, 1.0}) {
      for (double ba : {0.0, 0.8, 2.5}) {
        const double bb = 0.3;
        PhotonicState s = epr_state({phi, cap});
        s = apply_transform(s, analyzer_transform({kInvSqrt2, ba, false}, Port::CharlieE, Port::C1,
                                                  Port::AliceLoss));
        s = apply_transform(s, analyzer_transform({kInvSqrt2, bb, false}));
        EXPECT_NEAR(both_in(s, Port::C1, 1, Port::BobDet, 1),
                    (1 + cap * std::cos(phi - ba - bb)) / 16.0, 1e-12)
            << cap << " " << phi << " " << ba;
      }
    }
  }
}

// One photon (|0> + e^{ia}|1>)/sqrt2 into the analyzer: middle slot
// (1 + cos(a - b)) / 4, side slots 1/8 each.
TEST(Analyzer, SinglePhotonSlots) {
  const double a = 1.3, b = 0.2;
  const PhotonicState in({{make_occupation({{{Port::BobIn, 0, 0}, 1}}), kInvSqrt2},
                          {make_occupation({{{Port::BobIn, 1, 0}, 1}}), std::polar(kInvSqrt2, a)}});
  const PhotonicState out = apply_transform(in, analyzer_transform({kInvSqrt2, b, false}));
  EXPECT_NEAR(weight_in(out, Port::BobDet, 1), (1 + std::cos(a - b)) / 4, 1e-12);
  EXPECT_NEAR(weight_in(out, Port::BobDet, 0), 1.0 / 8, 1e-12);
  EXPECT_NEAR(weight_in(out, Port::BobDet, 2), 1.0 / 8, 1e-12);
  EXPECT_NEAR(out.norm_squared(), 1.0, 1e-12);
}

TEST(Analyzer, SinglePathSettings) {
  const ModeTransform shortarm = analyzer_transform({1.0, 0.0, false});
  const ModeTransform longarm = analyzer_transform({0.0, 0.0, false});
  expect_unitary(shortarm);
  expect_unitary(longarm);
  EXPECT_FALSE(shortarm.lossy());
  const PhotonicState early = PhotonicState::single_photon({Port::BobIn, 0, 0});
  EXPECT_NEAR(weight_in(apply_transform(early, longarm), Port::BobDet, 1), 1.0, 1e-12);
  EXPECT_NEAR(weight_in(apply_transform(early, shortarm), Port::BobDet, 0), 1.0, 1e-12);
}

TEST(Bsm, SplitterIsUnitaryAndTagBlind) {
  const ModeTransform t = bsm_splitter();
  expect_unitary(t);
  EXPECT_TRUE(t.tag_blind());
  // tagged photon keeps its tag through the coupler
  const PhotonicState s = apply_transform(PhotonicState::single_photon({Port::CharlieA, 1, 3}), t);
  for (const auto& term : s.terms()) EXPECT_EQ(term.occupations.front().first.tag, 3);
}

TEST(FiberLink, Relabels) {
  const PhotonicState s =
      apply_transform(PhotonicState::single_photon({Port::AliceIn, 1, 0}), fiber_link(Port::AliceIn, Port::CharlieA));
  EXPECT_NEAR(weight_in(s, Port::CharlieA, 1), 1.0, 1e-12);
}
