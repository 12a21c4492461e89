#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "tbtele/detection.hpp"
#include "tbtele/errors.hpp"

using namespace tbtele;

namespace {

ClickRecord click(DetectorId d, int slot, ClickOrigin o = ClickOrigin::photon) {
  return {d, 7, slot, o};
}

}  // namespace

TEST(Timing, FrameAndValidation) {
  const TimingConfig t;
  EXPECT_NEAR(t.frame_ns(), 1000.0 / 76.0, 1e-12);
  EXPECT_NO_THROW(t.validate());
  TimingConfig blur = t;
  blur.resolution_ns = 1.5;
  EXPECT_THROW(blur.validate(), Error);
  TimingConfig fast = t;
  fast.rep_rate_mhz = 400;
  EXPECT_THROW(fast.validate(), Error);
}

TEST(Detector, ModeSpecificFields) {
  DetectorConfig d = DetectorConfig::germanium();
  d.dark_prob_per_ns = 1e-4;
  try {
    d.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
  EXPECT_THROW((DetectorConfig{1.5, DetectorMode::gated, 0, 0, 100}.validate()), Error);
  EXPECT_EQ(detector_mode_from_string("gated"), DetectorMode::gated);
  EXPECT_THROW(detector_mode_from_string("burst"), Error);
}

// Free-running Ge at 35 kHz sees a dark count in a 1/76 MHz frame with
// probability 1 - exp(-35e3 * 13.158e-9) = 4.605e-4.
TEST(Detector, WindowDarkProbabilities) {
  const TimingConfig t;
  const DetectorConfig ge = DetectorConfig::germanium();
  EXPECT_NEAR(ge.window_dark_probability(t), 4.6042e-4, 1e-7);
  EXPECT_EQ(ge.window_slots(t), 11);
  const double q = ge.slot_dark_probability(t);
  EXPECT_NEAR(1.0 - std::pow(1.0 - q, 11), ge.window_dark_probability(t), 1e-15);

  const DetectorConfig ingaas = DetectorConfig::ingaas();
  EXPECT_EQ(ingaas.window_slots(t), 84);
  EXPECT_NEAR(ingaas.window_dark_probability(t), 1.0 - std::pow(1.0 - 1e-4, 100), 1e-13);
  // per-slot rate set by the dark rate per ns, not by the gate length
  DetectorConfig shorter = ingaas;
  shorter.gate_ns = 50;
  EXPECT_NEAR(shorter.slot_dark_probability(t), ingaas.slot_dark_probability(t), 1e-15);
  EXPECT_NEAR(ingaas.slot_dark_probability(t), 1.0 - std::pow(1.0 - 1e-4, 100.0 / 84), 1e-15);
}

TEST(ThresholdDetect, DarkFractionOfEmptyFrames) {
  const TimingConfig t;
  const DetectorConfig ge = DetectorConfig::germanium();
  Rng rng(11);
  const int frames = 10'000'000;
  int darks = 0;
  for (int i = 0; i < frames; ++i) {
    const auto r = threshold_detect({}, ge, t, DetectorId::C1, i, true, rng);
    if (r.click) {
      EXPECT_EQ(r.click->origin, ClickOrigin::dark);
      ++darks;
    }
  }
  EXPECT_NEAR(static_cast<double>(darks) / frames, 4.6e-4, 0.05 * 4.6e-4);
}

TEST(ThresholdDetect, EfficiencyAndGate) {
  const TimingConfig t;
  DetectorConfig d = DetectorConfig::ideal(DetectorMode::gated);
  d.efficiency = 0.3;
  Rng rng(3);
  const std::vector<double> presence{1.0, 0.0, 0.0};
  int hits = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) hits += threshold_detect(presence, d, t, DetectorId::B, i, true, rng).click.has_value();
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.3, 5 * std::sqrt(0.21 / n));

  const auto closed = threshold_detect(presence, d, t, DetectorId::B, 0, false, rng);
  EXPECT_TRUE(closed.gate_closed);
  EXPECT_FALSE(closed.click);
  EXPECT_THROW(threshold_detect(std::vector<double>{1.5}, d, t, DetectorId::B, 0, true, rng), Error);
}

TEST(ThresholdDetect, NonResolvingCounts) {
  Rng rng(9);
  const std::vector<int> three{3, 0, 0};
  int hits = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i)
    hits += threshold_detect_counts(three, 0.3, 0.0, false, DetectorId::C2, i, true, rng).click.has_value();
  const double p = 1.0 - std::pow(0.7, 3);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 5 * std::sqrt(p * (1 - p) / n));
}

TEST(ThresholdDetect, EarliestSlotAndPhotonPrecedence) {
  Rng rng(1);
  // certain dark counts everywhere, photon in slot 0: photon wins slot 0
  auto r = threshold_detect_counts(std::vector<int>{1, 0}, 1.0, 1.0, false, DetectorId::C1, 0, true, rng);
  ASSERT_TRUE(r.click);
  EXPECT_EQ(r.click->slot, 0);
  EXPECT_EQ(r.click->origin, ClickOrigin::photon);
  // photon only in slot 1, dark certain: the dark in slot 0 comes first
  r = threshold_detect_counts(std::vector<int>{0, 1}, 1.0, 1.0, false, DetectorId::C1, 0, true, rng);
  ASSERT_TRUE(r.click);
  EXPECT_EQ(r.click->slot, 0);
  EXPECT_EQ(r.click->origin, ClickOrigin::dark);
}

TEST(TriggerChain, OpensGatesOnlyOnTrigger) {
  const TimingConfig t;
  EXPECT_FALSE(trigger_chain(std::nullopt, t).c2_open);
  const Gates g = trigger_chain(click(DetectorId::C1, 0), t);
  EXPECT_TRUE(g.c2_open && g.b_open);
  EXPECT_DOUBLE_EQ(g.b_delay_us, 10.0);
}

TEST(Coincidences, Classification) {
  const std::vector<ClickRecord> all{click(DetectorId::C1, 0), click(DetectorId::C2, 1),
                                     click(DetectorId::B, 1, ClickOrigin::dark)};
  const auto ev = classify_coincidences(all);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_EQ(ev[0].kind, CoincidenceKind::bsm_success);
  EXPECT_EQ(ev[1].kind, CoincidenceKind::fourfold);
  EXPECT_EQ(ev[2].kind, CoincidenceKind::control_c1b);
  EXPECT_EQ(ev[1].slots[2], 1);
  EXPECT_EQ(ev[1].origins[2], ClickOrigin::dark);

  // same-bin clicks are not a projection onto the singlet
  const std::vector<ClickRecord> same{click(DetectorId::C1, 0), click(DetectorId::C2, 0),
                                      click(DetectorId::B, 2)};
  const auto ev2 = classify_coincidences(same);
  ASSERT_EQ(ev2.size(), 1u);
  EXPECT_EQ(ev2[0].kind, CoincidenceKind::control_c1b);

  const std::vector<ClickRecord> twice{click(DetectorId::C1, 0), click(DetectorId::C1, 1)};
  EXPECT_THROW(classify_coincidences(twice), Error);
}

TEST(Coincidences, EventLogLine) {
  const std::vector<ClickRecord> all{click(DetectorId::C1, 0), click(DetectorId::C2, 1),
                                     click(DetectorId::B, 2, ClickOrigin::dark)};
  const auto ev = classify_coincidences(all);
  EXPECT_EQ(format_event(ev[1]), "7\tfourfold\tc1=0,c2=1,b=2\tc1=photon,c2=photon,b=dark");
  EXPECT_EQ(format_event(ev[2]), "7\tcontrol_c1b\tc1=0,b=2\tc1=photon,b=dark");
}
