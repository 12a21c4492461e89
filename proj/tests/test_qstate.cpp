#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tbtele/optics.hpp"
#include "tbtele/qstate.hpp"

using namespace tbtele;

namespace {

Mode M(Port p, int bin = 0, int tag = 0) { return {p, bin, tag}; }

PhotonicState photons(std::vector<std::pair<Mode, int>> occ, ComplexAmp a = 1.0) {
  return PhotonicState({{make_occupation(std::move(occ)), a}});
}

// plain 2x2 coupler on two ports, bin 0
ModeTransform coupler(Port a, Port b, double t) {
  Eigen::MatrixXcd m(2, 2);
  const double r = std::sqrt(1.0 - t * t);
  m << t, r, r, -t;
  return ModeTransform({M(a), M(b)}, {M(a), M(b)}, m);
}

}  // namespace

TEST(PhotonicState, MergesDuplicatesAndDropsZeros) {
  const auto occ = make_occupation({{M(Port::BobIn), 1}});
  const PhotonicState s({{occ, 0.5}, {occ, 0.5}, {make_occupation({{M(Port::C1), 1}}), 0.0}});
  ASSERT_EQ(s.terms().size(), 1u);
  EXPECT_NEAR(std::abs(s.amplitude_of(occ)), 1.0, 1e-12);
}

TEST(PhotonicState, CutoffEnforced) {
  try {
    PhotonicState({{make_occupation({{M(Port::C1), 3}}), 1.0}}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutoffExceeded);
  }
}

TEST(PhotonicState, NormalizeZeroThrows) {
  const PhotonicState z({}, 4, 1e-9);
  try {
    normalize(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroState);
  }
}

TEST(PhotonicState, SerializeRoundTrip) {
  const PhotonicState s = normalize(PhotonicState(
      {{make_occupation({{M(Port::BobIn, 0), 1}, {M(Port::C1, 1, 2), 1}}), {0.3, -0.1}},
       {make_occupation({{M(Port::BobIn, 1), 2}}), {-0.7, 0.2}}}));
  const PhotonicState back = parse_state(serialize_state(s));
  ASSERT_EQ(back.terms().size(), s.terms().size());
  for (std::size_t i = 0; i < s.terms().size(); ++i) {
    EXPECT_EQ(back.terms()[i].occupations, s.terms()[i].occupations);
    EXPECT_NEAR(std::abs(back.terms()[i].amplitude - s.terms()[i].amplitude), 0.0, 1e-15);
  }
}

TEST(PhotonicState, ParseRejectsGarbage) {
  EXPECT_THROW(parse_state("0.5 0 Nowhere.0.0:1\n"), Error);
  EXPECT_THROW(parse_state("abc\n"), Error);
}

TEST(Tensor, CollidingPortsRejected) {
  const PhotonicState a = PhotonicState::single_photon(M(Port::C1));
  try {
    tensor(a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModeCollision);
  }
}

TEST(ModeTransform, NonUnitaryRejectedUnlessLossy) {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 0, 0, 0.5;
  try {
    ModeTransform({M(Port::C1), M(Port::C2)}, {M(Port::C1), M(Port::C2)}, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonUnitary);
  }
  // an isometry into three outputs is fine when declared lossy
  Eigen::MatrixXcd iso(3, 1);
  iso << std::sqrt(0.5), std::sqrt(0.25), std::sqrt(0.25);
  EXPECT_NO_THROW(
      ModeTransform({M(Port::C1)}, {M(Port::C1), M(Port::C2), M(Port::BobLoss)}, iso, true));
}

TEST(ApplyTransform, UncoveredModeOfCoveredPort) {
  const auto t = coupler(Port::C1, Port::C2, kInvSqrt2);
  const PhotonicState s = PhotonicState::single_photon(M(Port::C1, 1));
  try {
    apply_transform(s, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UncoveredMode);
  }
}

TEST(ApplyTransform, UntouchedPortsPassThrough) {
  const auto t = coupler(Port::C1, Port::C2, kInvSqrt2);
  const PhotonicState s = photons({{M(Port::C1), 1}, {M(Port::BobIn, 1), 1}});
  const PhotonicState out = apply_transform(s, t);
  EXPECT_NEAR(std::norm(out.amplitude_of(make_occupation({{M(Port::C2), 1}, {M(Port::BobIn, 1), 1}}))),
              0.5, 1e-12);
}

// Two indistinguishable photons on a 50/50 coupler never leave by different
// ports; binomial bunching amplitudes are +-1/sqrt(2).
TEST(ApplyTransform, HongOuMandel) {
  const PhotonicState in = photons({{M(Port::C1), 1}, {M(Port::C2), 1}});
  const PhotonicState out = apply_transform(in, coupler(Port::C1, Port::C2, kInvSqrt2));
  EXPECT_NEAR(std::abs(out.amplitude_of(make_occupation({{M(Port::C1), 1}, {M(Port::C2), 1}}))),
              0.0, 1e-12);
  EXPECT_NEAR(std::norm(out.amplitude_of(make_occupation({{M(Port::C1), 2}}))), 0.5, 1e-12);
  EXPECT_NEAR(std::norm(out.amplitude_of(make_occupation({{M(Port::C2), 2}}))), 0.5, 1e-12);
}

// Distinct tags do not interfere: coincidence probability 1/2.
TEST(ApplyTransform, DistinguishablePhotonsSplitClassically) {
  const PhotonicState in = photons({{M(Port::C1, 0, 0), 1}, {M(Port::C2, 0, 1), 1}});
  const PhotonicState out = apply_transform(in, coupler(Port::C1, Port::C2, kInvSqrt2));
  double coinc = 0.0;
  for (const auto& t : out.terms())
    if (count_in_slot(t.occupations, Port::C1, 0) == 1 &&
        count_in_slot(t.occupations, Port::C2, 0) == 1)
      coinc += std::norm(t.amplitude);
  EXPECT_NEAR(coinc, 0.5, 1e-12);
}

// General beam splitter, two photons in: P(1,1) = (t^2 - r^2)^2.
TEST(ApplyTransform, CoincidenceAgainstClosedForm) {
  for (double t : {0.1, 0.4, 0.6, 0.9}) {
    const PhotonicState in = photons({{M(Port::C1), 1}, {M(Port::C2), 1}});
    const PhotonicState out = apply_transform(in, coupler(Port::C1, Port::C2, t));
    const double r2 = 1.0 - t * t;
    EXPECT_NEAR(std::norm(out.amplitude_of(make_occupation({{M(Port::C1), 1}, {M(Port::C2), 1}}))),
                std::pow(t * t - r2, 2), 1e-12);
    EXPECT_NEAR(out.norm_squared(), 1.0, 1e-12);
  }
}

TEST(ApplyTransform, InverseUndoesTransform) {
  Eigen::MatrixXcd m(2, 2);
  const ComplexAmp ph = std::polar(1.0, 0.7);
  m << 0.6, 0.8 * ph, 0.8, -0.6 * ph;
  const ModeTransform t({M(Port::C1), M(Port::C2)}, {M(Port::C1), M(Port::C2)}, m);
  const PhotonicState in = photons({{M(Port::C1), 2}, {M(Port::C2), 1}}, 1.0);
  const PhotonicState back = apply_transform(apply_transform(in, t), t.inverse());
  EXPECT_NEAR(std::abs(back.amplitude_of(in.terms()[0].occupations)), 1.0, 1e-12);
}

TEST(CreationPower, SquareOfSingleModeIsTwoPhotonFock) {
  const auto occ = make_occupation({{M(Port::C1), 1}});
  const PhotonicState s = creation_power({{occ, 1.0}}, 2);
  ASSERT_EQ(s.terms().size(), 1u);
  EXPECT_EQ(s.terms()[0].occupations, make_occupation({{M(Port::C1), 2}}));
  EXPECT_NEAR(std::abs(s.terms()[0].amplitude), 1.0, 1e-12);
}

// (a^+ + b^+)^2 / norm: |2,0>, |1,1>, |0,2> with weights 1/4, 1/2, 1/4.
TEST(CreationPower, BinomialWeights) {
  const PhotonicState s = creation_power(
      {{make_occupation({{M(Port::C1), 1}}), kInvSqrt2}, {make_occupation({{M(Port::C2), 1}}), kInvSqrt2}},
      2);
  EXPECT_NEAR(std::norm(s.amplitude_of(make_occupation({{M(Port::C1), 2}}))), 0.25, 1e-12);
  EXPECT_NEAR(std::norm(s.amplitude_of(make_occupation({{M(Port::C1), 1}, {M(Port::C2), 1}}))), 0.5,
              1e-12);
}

TEST(Condition, ProjectsAndRenormalizes) {
  const PhotonicState s = normalize(PhotonicState(
      {{make_occupation({{M(Port::C1), 1}, {M(Port::BobIn, 0), 1}}), 1.0},
       {make_occupation({{M(Port::C1), 1}, {M(Port::BobIn, 1), 1}}), ComplexAmp(0.0, 1.0)},
       {make_occupation({{M(Port::C2), 1}, {M(Port::BobIn, 1), 1}}), std::sqrt(2.0)}}));
  const ConditionResult r = condition_on_pattern(s, {make_occupation({{M(Port::C1), 1}}), {Port::C2}});
  EXPECT_NEAR(r.probability, 0.5, 1e-12);
  ASSERT_TRUE(r.state);
  EXPECT_NEAR(std::norm(r.state->amplitude_of(make_occupation({{M(Port::BobIn, 1), 1}}))), 0.5, 1e-12);
}

TEST(Condition, NoMatchIsEmpty) {
  const PhotonicState s = PhotonicState::single_photon(M(Port::C1));
  const ConditionResult r = condition_on_pattern(s, {make_occupation({{M(Port::C2), 1}}), {}});
  EXPECT_TRUE(r.empty_conditional());
  EXPECT_EQ(r.probability, 0.0);
}

TEST(Density, PartialTraceOfEntangledPairIsMixed) {
  const PhotonicState bell = normalize(PhotonicState(
      {{make_occupation({{M(Port::CharlieE, 0), 1}, {M(Port::BobIn, 1), 1}}), 1.0},
       {make_occupation({{M(Port::CharlieE, 1), 1}, {M(Port::BobIn, 0), 1}}), -1.0}}));
  const DensityOperator rho = trace_to_density(bell, {Port::BobIn});
  rho.validate();
  EXPECT_NEAR(rho.purity(), 0.5, 1e-12);
  const DensityOperator full = trace_to_density(bell, {Port::BobIn, Port::CharlieE});
  EXPECT_NEAR(full.purity(), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(full, bell), 1.0, 1e-12);
}

TEST(Density, EmptyKeepSet) {
  const PhotonicState s = PhotonicState::single_photon(M(Port::C1));
  try {
    trace_to_density(s, {Port::BobIn});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyKeepSet);
  }
}

TEST(Density, FidelityBasisMismatch) {
  const DensityOperator rho = trace_to_density(PhotonicState::single_photon(M(Port::BobIn, 0)), {Port::BobIn});
  try {
    fidelity(rho, PhotonicState::single_photon(M(Port::BobIn, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BasisMismatch);
  }
}

TEST(Density, OverlapOfTwoQubitsIsCosineSquared) {
  // |<psi|phi>|^2 for real qubits at angles a and b
  const double a = 0.3, b = 1.1;
  auto qubit = [](double th) {
    return PhotonicState({{make_occupation({{M(Port::BobIn, 0), 1}}), std::cos(th)},
                          {make_occupation({{M(Port::BobIn, 1), 1}}), std::sin(th)}});
  };
  const DensityOperator rho = trace_to_density(qubit(a), {Port::BobIn});
  EXPECT_NEAR(fidelity(rho, qubit(b)), std::pow(std::cos(a - b), 2), 1e-12);
}
