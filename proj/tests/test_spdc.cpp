#include <cmath>

#include <gtest/gtest.h>

#include "tbtele/spdc.hpp"

using namespace tbtele;

TEST(PairNumbers, ThermalIsGeometric) {
  const auto d = pair_number_dist(0.1, PairStatistics::thermal, 4);
  ASSERT_EQ(d.size(), 5u);
  for (std::size_t n = 1; n < d.size(); ++n) EXPECT_NEAR(d[n] / d[n - 1], 0.1, 1e-12);
  EXPECT_NEAR(d[0] * d[2] / (d[1] * d[1]), 1.0, 1e-12);
  double s = 0;
  for (double x : d) s += x;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(PairNumbers, PoissonRatioIsHalf) {
  const auto d = pair_number_dist(0.1, PairStatistics::poissonian, 3);
  EXPECT_NEAR(d[0] * d[2] / (d[1] * d[1]), 0.5, 1e-12);
  // mean fixed by P(n >= 1) = p before truncation
  const double mean = -std::log(0.9);
  EXPECT_NEAR(d[1] / d[0], mean, 1e-12);
}

TEST(PairNumbers, SingleAndDomain) {
  const auto d = pair_number_dist(0.3, PairStatistics::single, 2);
  EXPECT_EQ(d, (std::vector<double>{0.0, 1.0, 0.0}));
  EXPECT_THROW(pair_number_dist(1.0, PairStatistics::thermal, 2), Error);
  EXPECT_THROW(pair_number_dist(0.1, PairStatistics::thermal, -1), Error);
  EXPECT_THROW(pair_statistics_from_string("laser"), Error);
  EXPECT_EQ(pair_statistics_from_string("poissonian"), PairStatistics::poissonian);
}

TEST(WrongEvents, BalancedCrystals) {
  SourceConfig s{0.01, 1.0, PairStatistics::thermal, 2};
  EXPECT_NEAR(wrong_event_fraction(s), 2.0 / 3.0, 1e-12);
  s.statistics = PairStatistics::poissonian;
  EXPECT_NEAR(wrong_event_fraction(s), 0.5, 1e-12);
}

TEST(WrongEvents, LabRatio) {
  // P(2,0) : P(1,1) : P(0,2) = 8 : 1 : 1/8 for geometric statistics
  const SourceConfig s{0.1, 8.0, PairStatistics::thermal, 2};
  EXPECT_NEAR(wrong_event_fraction(s), 8.125 / 9.125, 1e-12);
}

TEST(Source, Validation) {
  EXPECT_THROW((SourceConfig{1.5, 8, PairStatistics::thermal, 2}.validate()), Error);
  EXPECT_THROW((SourceConfig{0.5, 0.2, PairStatistics::thermal, 2}.validate()), Error);
  EXPECT_THROW((SourceConfig{0.1, 8, PairStatistics::thermal, 0}.validate()), Error);
  EXPECT_NEAR((SourceConfig{}.p_epr()), 0.0125, 1e-15);
}

TEST(Overlap, Model) {
  IndistinguishabilityConfig c;
  EXPECT_NEAR(overlap_mu(c), 1.0, 1e-15);
  c.spectral_overlap = 0.98;
  EXPECT_NEAR(overlap_mu(c), 0.98, 1e-15);
  c.spectral_overlap = 1.0;
  c.arrival_offset_fs = c.coherence_time_fs;
  EXPECT_NEAR(overlap_mu(c), std::exp(-1.0), 1e-12);
  c.polarization_overlap = 1.2;
  EXPECT_THROW(overlap_mu(c), Error);
}

TEST(Emission, PartialOverlapTagsAlicePhoton) {
  const PhotonicState s = emission_state({1, 0}, {}, {}, 0.3, false);
  double tagged = 0.0;
  for (const auto& t : s.terms())
    for (const auto& [m, n] : t.occupations)
      if (m.spatial == Port::AliceIn && m.tag == kAliceDistinguishableTag) tagged += std::norm(t.amplitude);
  EXPECT_NEAR(tagged, 0.7, 1e-12);
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
}

TEST(Emission, CutoffCountsIdlers) {
  EXPECT_NO_THROW(emission_state({1, 1}, {}, {}, 1.0, true, 4));
  try {
    emission_state({2, 1}, {}, {}, 1.0, true, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutoffExceeded);
  }
}

// Two pairs from one crystal: (A + B)^2 |0> puts both pairs in one time bin
// with probability 2/3 (stimulated emission), not 1/2.
TEST(Emission, DoublePairBunchesInTime) {
  const PhotonicState s = emission_state({0, 2}, {}, {0.0, 1.0}, 1.0, false);
  double same = 0.0;
  for (const auto& t : s.terms())
    if (count_in_slot(t.occupations, Port::BobIn, 0) == 2 ||
        count_in_slot(t.occupations, Port::BobIn, 1) == 2)
      same += std::norm(t.amplitude);
  EXPECT_NEAR(same, 2.0 / 3.0, 1e-12);
}

TEST(Sampler, FrequenciesMatchDistribution) {
  const SourceConfig cfg{0.2, 2.0, PairStatistics::thermal, 2};
  const EmissionSampler s(cfg);
  Rng rng(5);
  const int n = 1'000'000;
  std::vector<int> counts(9, 0);
  for (int i = 0; i < n; ++i) {
    const auto o = s(rng);
    ++counts[static_cast<std::size_t>(o.n_alice * 3 + o.n_epr)];
  }
  for (int a = 0; a < 3; ++a)
    for (int e = 0; e < 3; ++e) {
      const double p = s.probability({a, e});
      const double sd = std::sqrt(n * p * (1 - p));
      EXPECT_NEAR(counts[static_cast<std::size_t>(a * 3 + e)], n * p, 5 * sd + 1) << a << e;
    }
}
