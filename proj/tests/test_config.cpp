#include <gtest/gtest.h>

#include "tbtele/config.hpp"
#include "tbtele/errors.hpp"
#include "tbtele/report.hpp"

using namespace tbtele;

namespace {

ErrorKind parse_error_kind(const std::string& text, std::string* what = nullptr) {
  try {
    parse_config(text, "t.cfg");
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorKind::ZeroState;
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const ConfigFile c = parse_config("");
  EXPECT_EQ(canonical_dump(c), canonical_dump(ConfigFile{}));
  EXPECT_EQ(c.experiment.source.ratio, 8.0);
  EXPECT_EQ(c.experiment.photon_cutoff, 4);
  EXPECT_EQ(c.relay.sections, (std::vector<int>{1, 3}));
}

TEST(Config, ValuesCommentsAndWhitespace) {
  const ConfigFile c = parse_config(
      "# header\n\n  source.ratio = 4   # inline\nsource.statistics=poissonian\n"
      "detector.b.mode = gated\nalice.coupler_loss = no\nrelay.sections = 1, 2 ,5\n"
      "experiment.pulses_per_pole = 20000000000\n");
  EXPECT_EQ(c.experiment.source.ratio, 4.0);
  EXPECT_EQ(c.experiment.source.statistics, PairStatistics::poissonian);
  EXPECT_FALSE(c.experiment.alice_coupler_loss);
  EXPECT_EQ(c.relay.sections, (std::vector<int>{1, 2, 5}));
  EXPECT_EQ(c.experiment.pulses_per_pole, 20'000'000'000LL);
}

TEST(Config, Errors) {
  std::string what;
  EXPECT_EQ(parse_error_kind("source.ratio = 8\n\nnot a pair\n", &what), ErrorKind::ParseError);
  EXPECT_NE(what.find("t.cfg:3:"), std::string::npos) << what;
  EXPECT_EQ(parse_error_kind("source.colour = red\n", &what), ErrorKind::UnknownKey);
  EXPECT_NE(what.find("t.cfg:1:"), std::string::npos);
  EXPECT_EQ(parse_error_kind("source.ratio = eight\n"), ErrorKind::TypeMismatch);
  EXPECT_EQ(parse_error_kind("experiment.scan_points = 12.5\n"), ErrorKind::TypeMismatch);
  EXPECT_EQ(parse_error_kind("alice.coupler_loss = maybe\n"), ErrorKind::TypeMismatch);
  EXPECT_EQ(parse_error_kind("detector.c1.mode = burst\n"), ErrorKind::TypeMismatch);
  EXPECT_EQ(parse_error_kind("relay.sections = 1,,3\n"), ErrorKind::TypeMismatch);
  EXPECT_EQ(parse_error_kind(" = 3\n"), ErrorKind::ParseError);
  EXPECT_EQ(parse_error_kind("source.ratio = 8\nsource.ratio = 7\n"), ErrorKind::ParseError);
  EXPECT_EQ(parse_error_kind("source.p_alice = 1.5\n"), ErrorKind::DomainError);
  EXPECT_EQ(parse_error_kind("detector.c1.dark_prob_per_ns = 1e-4\n"), ErrorKind::ConfigError);
  EXPECT_EQ(parse_error_kind("relay.sections = 0\n"), ErrorKind::DomainError);
}

TEST(Config, OverridesComeLast) {
  ConfigFile c = parse_config("source.ratio = 8\n");
  apply_override(c, "source.ratio=2.5");
  EXPECT_EQ(c.experiment.source.ratio, 2.5);
  try {
    apply_override(c, "source.ratio");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
  EXPECT_THROW(apply_override(c, "nope.key=1"), Error);
}

TEST(Config, DumpRoundTripsEveryKey) {
  ConfigFile c;
  c.experiment.source.p_alice = 0.1 + 0.2;  // not representable in short decimal
  c.experiment.indistinguishability.spectral_overlap = 0.98;
  c.relay.sections = {1, 4};
  c.run.seed = 18446744073709551615ULL;
  const std::string dump = canonical_dump(c);
  const ConfigFile back = parse_config(dump);
  EXPECT_EQ(canonical_dump(back), dump);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(back.experiment.source.p_alice, 0.1 + 0.2);
  for (const auto& k : config_keys()) {
    ConfigFile d;
    set_value(d, k, get_value(c, k));
    EXPECT_EQ(get_value(d, k), get_value(c, k)) << k;
  }
  EXPECT_GT(config_keys().size(), 50u);
}

TEST(Config, HashChangesWithValues) {
  ConfigFile a, b;
  b.experiment.fiber.bob_km = 2.0000001;
  EXPECT_NE(config_hash(a), config_hash(b));
}

// Reference values of 64-bit FNV-1a.
TEST(Config, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Report, HeaderCarriesHash) {
  const OutputHeader h{0x0123456789abcdefULL, 42, 3, "full"};
  const std::string t = header_text(h);
  EXPECT_NE(t.find("# config_hash = 0123456789abcdef\n"), std::string::npos);
  EXPECT_NE(t.find("# seed = 42\n"), std::string::npos);
  EXPECT_NE(t.find("# workers = 3\n"), std::string::npos);
  EXPECT_NE(t.find("# tbtele " + version()), std::string::npos);
  EXPECT_EQ(header_hash(t), h.config_hash);
  EXPECT_FALSE(header_hash("beta,fourfold\n"));
}

TEST(Report, Bodies) {
  const std::vector<ScanPoint> pts{{0.0, 12, 30, 1000}, {1.5, 7, 31, 1000}};
  EXPECT_EQ(scan_csv(pts),
            "beta,fourfold,control,pulses\n0.0000000000,12,30,1000\n1.5000000000,7,31,1000\n");
  QberCurve c;
  c.distances_km = {0, 10};
  c.qber = {0.025, 0.03};
  c.rate_per_pulse = {1e-6, 5e-7};
  EXPECT_EQ(relay_csv(c), "distance_km,qber,rate\n0.0000,0.025,1e-06\n10.0000,0.03,5e-07\n");
  EXPECT_EQ(format_value({0.85, 0.0125}), "0.850000 ± 0.012500");
  EXPECT_EQ(range_text(3, {RangeStatus::unbounded, 0}), "max_range_km.sections_3 = inf\n");
  EXPECT_EQ(range_text(1, {RangeStatus::crossed, 79.844}), "max_range_km.sections_1 = 79.84\n");
}
