#include "tbtele/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tbtele/errors.hpp"

namespace tbtele {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void mismatch(std::string_view value, const char* type) {
  throw Error(ErrorKind::TypeMismatch,
              "'" + std::string(value) + "' is not a valid " + type);
}

double to_real(std::string_view v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) mismatch(v, "number");
  return x;
}

template <typename Int>
Int to_integer(std::string_view v) {
  Int x{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) mismatch(v, "integer");
  return x;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  mismatch(v, "boolean");
}

std::string real_text(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct Field {
  std::function<std::string(ConfigFile&)> get;
  std::function<void(ConfigFile&, std::string_view)> set;
};

using Registry = std::map<std::string, Field, std::less<>>;

template <typename Acc>
void real(Registry& r, const std::string& key, Acc acc) {
  r[key] = {[acc](ConfigFile& c) { return real_text(acc(c)); },
            [acc](ConfigFile& c, std::string_view v) { acc(c) = to_real(v); }};
}

template <typename Int, typename Acc>
void integer(Registry& r, const std::string& key, Acc acc) {
  r[key] = {[acc](ConfigFile& c) { return std::to_string(acc(c)); },
            [acc](ConfigFile& c, std::string_view v) { acc(c) = to_integer<Int>(v); }};
}

template <typename Acc>
void boolean(Registry& r, const std::string& key, Acc acc) {
  r[key] = {[acc](ConfigFile& c) { return std::string(acc(c) ? "true" : "false"); },
            [acc](ConfigFile& c, std::string_view v) { acc(c) = to_bool(v); }};
}

void detector(Registry& r, const std::string& prefix,
              std::function<DetectorConfig&(ConfigFile&)> acc) {
  real(r, prefix + ".efficiency", [acc](ConfigFile& c) -> double& { return acc(c).efficiency; });
  real(r, prefix + ".dark_rate_hz",
       [acc](ConfigFile& c) -> double& { return acc(c).dark_rate_hz; });
  real(r, prefix + ".dark_prob_per_ns",
       [acc](ConfigFile& c) -> double& { return acc(c).dark_prob_per_ns; });
  real(r, prefix + ".gate_ns", [acc](ConfigFile& c) -> double& { return acc(c).gate_ns; });
  r[prefix + ".mode"] = {
      [acc](ConfigFile& c) { return std::string(to_string(acc(c).mode)); },
      [acc](ConfigFile& c, std::string_view v) { acc(c).mode = detector_mode_from_string(v); }};
}

Registry build_registry() {
  Registry r;
  using C = ConfigFile;
  real(r, "source.p_alice", [](C& c) -> double& { return c.experiment.source.p_alice; });
  real(r, "source.ratio", [](C& c) -> double& { return c.experiment.source.ratio; });
  integer<int>(r, "source.pair_cutoff",
               [](C& c) -> int& { return c.experiment.source.pair_cutoff; });
  r["source.statistics"] = {
      [](C& c) { return std::string(to_string(c.experiment.source.statistics)); },
      [](C& c, std::string_view v) {
        c.experiment.source.statistics = pair_statistics_from_string(v);
      }};

  real(r, "indist.arrival_offset_fs",
       [](C& c) -> double& { return c.experiment.indistinguishability.arrival_offset_fs; });
  real(r, "indist.coherence_time_fs",
       [](C& c) -> double& { return c.experiment.indistinguishability.coherence_time_fs; });
  real(r, "indist.interferometer_mismatch_fs", [](C& c) -> double& {
    return c.experiment.indistinguishability.interferometer_mismatch_fs;
  });
  real(r, "indist.spectral_overlap",
       [](C& c) -> double& { return c.experiment.indistinguishability.spectral_overlap; });
  real(r, "indist.polarization_overlap",
       [](C& c) -> double& { return c.experiment.indistinguishability.polarization_overlap; });

  real(r, "epr.phi", [](C& c) -> double& { return c.experiment.epr.phi; });
  real(r, "epr.visibility_cap", [](C& c) -> double& { return c.experiment.epr.visibility_cap; });

  real(r, "alice.a0", [](C& c) -> double& { return c.experiment.alice.a0; });
  real(r, "alice.alpha", [](C& c) -> double& { return c.experiment.alice.alpha; });
  boolean(r, "alice.discrete_coupler",
          [](C& c) -> bool& { return c.experiment.alice.discrete_coupler; });
  boolean(r, "alice.coupler_loss", [](C& c) -> bool& { return c.experiment.alice_coupler_loss; });

  real(r, "analyzer.k0", [](C& c) -> double& { return c.experiment.analyzer.k0; });
  real(r, "analyzer.beta", [](C& c) -> double& { return c.experiment.analyzer.beta; });
  boolean(r, "analyzer.discrete_coupler",
          [](C& c) -> bool& { return c.experiment.analyzer.discrete_coupler; });

  detector(r, "detector.c1", [](C& c) -> DetectorConfig& { return c.experiment.c1; });
  detector(r, "detector.c2", [](C& c) -> DetectorConfig& { return c.experiment.c2; });
  detector(r, "detector.b", [](C& c) -> DetectorConfig& { return c.experiment.b; });

  real(r, "timing.bin_separation_ns",
       [](C& c) -> double& { return c.experiment.timing.bin_separation_ns; });
  real(r, "timing.rep_rate_mhz", [](C& c) -> double& { return c.experiment.timing.rep_rate_mhz; });
  real(r, "timing.resolution_ns",
       [](C& c) -> double& { return c.experiment.timing.resolution_ns; });
  real(r, "timing.bob_delay_us", [](C& c) -> double& { return c.experiment.timing.bob_delay_us; });

  real(r, "fiber.bob_km", [](C& c) -> double& { return c.experiment.fiber.bob_km; });
  real(r, "fiber.db_per_km", [](C& c) -> double& { return c.experiment.fiber.db_per_km; });

  integer<int>(r, "experiment.photon_cutoff",
               [](C& c) -> int& { return c.experiment.photon_cutoff; });
  integer<std::int64_t>(r, "experiment.pulses_per_point",
                        [](C& c) -> std::int64_t& { return c.experiment.pulses_per_point; });
  integer<std::int64_t>(r, "experiment.pulses_per_pole",
                        [](C& c) -> std::int64_t& { return c.experiment.pulses_per_pole; });
  integer<int>(r, "experiment.scan_points", [](C& c) -> int& { return c.experiment.scan_points; });

  real(r, "link.attenuation_db_per_km",
       [](C& c) -> double& { return c.relay.link.attenuation_db_per_km; });
  real(r, "link.pair_prob", [](C& c) -> double& { return c.relay.link.pair_prob; });
  real(r, "link.gate_ns", [](C& c) -> double& { return c.relay.link.gate_ns; });
  real(r, "link.bsm_success_prob", [](C& c) -> double& { return c.relay.link.bsm_success_prob; });
  real(r, "link.source_visibility",
       [](C& c) -> double& { return c.relay.link.source_visibility; });
  detector(r, "link.detector", [](C& c) -> DetectorConfig& { return c.relay.link.detector; });

  r["relay.sections"] = {
      [](C& c) {
        std::string s;
        for (std::size_t i = 0; i < c.relay.sections.size(); ++i)
          s += (i ? "," : "") + std::to_string(c.relay.sections[i]);
        return s;
      },
      [](C& c, std::string_view v) {
        std::vector<int> out;
        std::size_t start = 0;
        while (start <= v.size()) {
          const auto comma = v.find(',', start);
          const auto item = trim(v.substr(start, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - start));
          out.push_back(to_integer<int>(item));
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
        c.relay.sections = std::move(out);
      }};
  real(r, "relay.max_km", [](C& c) -> double& { return c.relay.max_km; });
  real(r, "relay.step_km", [](C& c) -> double& { return c.relay.step_km; });
  real(r, "relay.qber_threshold", [](C& c) -> double& { return c.relay.qber_threshold; });

  integer<std::uint64_t>(r, "run.seed", [](C& c) -> std::uint64_t& { return c.run.seed; });
  integer<int>(r, "run.workers", [](C& c) -> int& { return c.run.workers; });
  boolean(r, "run.event_log", [](C& c) -> bool& { return c.run.event_log; });
  return r;
}

const Registry& registry() {
  static const Registry r = build_registry();
  return r;
}

const Field& field(std::string_view key) {
  const auto& r = registry();
  const auto it = r.find(key);
  if (it == r.end()) throw Error(ErrorKind::UnknownKey, "unknown key '" + std::string(key) + "'");
  return it->second;
}

}  // namespace

void set_value(ConfigFile& cfg, std::string_view key, std::string_view value) {
  const Field& f = field(key);
  try {
    f.set(cfg, trim(value));
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(key) + ": " + e.what());
  }
}

std::string get_value(const ConfigFile& cfg, std::string_view key) {
  return field(key).get(const_cast<ConfigFile&>(cfg));
}

void apply_override(ConfigFile& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw Error(ErrorKind::ParseError,
                "override '" + std::string(assignment) + "' is not key=value");
  set_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ConfigFile parse_config(std::string_view text, std::string_view source) {
  ConfigFile cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::ParseError, where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::ParseError, where + "empty key");
    if (!seen.insert(std::string(key)).second)
      throw Error(ErrorKind::ParseError, where + "duplicate key '" + std::string(key) + "'");
    try {
      set_value(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

void validate(const ConfigFile& cfg) {
  cfg.experiment.validate();
  cfg.relay.link.validate();
  if (cfg.relay.sections.empty())
    throw Error(ErrorKind::ConfigError, "relay.sections is empty");
  for (int k : cfg.relay.sections)
    if (k < 1) throw Error(ErrorKind::DomainError, "relay.sections entries must be >= 1");
  if (!(cfg.relay.max_km > 0.0) || !(cfg.relay.step_km > 0.0))
    throw Error(ErrorKind::DomainError, "relay.max_km and relay.step_km must be > 0");
  if (!(cfg.relay.qber_threshold > 0.0 && cfg.relay.qber_threshold < 0.5))
    throw Error(ErrorKind::DomainError, "relay.qber_threshold outside (0, 0.5)");
  if (cfg.run.workers < 1) throw Error(ErrorKind::DomainError, "run.workers must be >= 1");
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.string());
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : registry()) keys.push_back(k);
  return keys;
}

std::string canonical_dump(const ConfigFile& cfg) {
  std::string out;
  for (const auto& [k, f] : registry()) out += k + " = " + get_value(cfg, k) + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const ConfigFile& cfg) { return fnv1a64(canonical_dump(cfg)); }

}  // namespace tbtele
