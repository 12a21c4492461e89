#include "tbtele/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "tbtele/errors.hpp"

namespace tbtele {

namespace {

std::string printf_string(const char* fmt, auto... args) {
  const int n = std::snprintf(nullptr, 0, fmt, args...);
  std::string s(static_cast<std::size_t>(n), '\0');
  std::snprintf(s.data(), s.size() + 1, fmt, args...);
  return s;
}

std::string line(std::string_view key, const ValueWithError& v) {
  return std::string(key) + " = " + format_value(v) + "\n";
}

}  // namespace

std::string version() { return TBTELE_VERSION; }

std::string header_text(const OutputHeader& h) {
  std::string s;
  s += "# tbtele " + version() + "\n";
  s += printf_string("# config_hash = %016" PRIx64 "\n", h.config_hash);
  s += "# seed = " + std::to_string(h.seed) + "\n";
  s += "# workers = " + std::to_string(h.workers) + "\n";
  s += "# command = " + h.command + "\n";
  return s;
}

std::optional<std::uint64_t> header_hash(std::string_view text) {
  constexpr std::string_view tag = "# config_hash = ";
  const auto at = text.find(tag);
  if (at == std::string_view::npos) return std::nullopt;
  const std::string hex(text.substr(at + tag.size(), 16));
  char* end = nullptr;
  const std::uint64_t h = std::strtoull(hex.c_str(), &end, 16);
  if (end != hex.c_str() + hex.size()) return std::nullopt;
  return h;
}

std::string scan_csv(std::span<const ScanPoint> points) {
  std::string s = "beta,fourfold,control,pulses\n";
  for (const auto& p : points)
    s += printf_string("%.10f,%" PRId64 ",%" PRId64 ",%" PRId64 "\n", p.beta, p.fourfold_count,
                       p.control_count, p.pulses);
  return s;
}

std::string relay_csv(const QberCurve& curve) {
  std::string s = "distance_km,qber,rate\n";
  for (std::size_t i = 0; i < curve.distances_km.size(); ++i)
    s += printf_string("%.4f,%.10g,%.10g\n", curve.distances_km[i], curve.qber[i],
                       curve.rate_per_pulse[i]);
  return s;
}

std::string format_value(const ValueWithError& v) {
  return printf_string("%.6f ± %.6f", v.value, v.error);
}

std::string scan_summary_text(const VisibilityFit& fit) {
  const ValueWithError v{fit.visibility, fit.sigma_visibility};
  std::string s;
  s += line("visibility", v);
  s += line("phase", {fit.phase, fit.sigma_phase});
  s += std::string("visibility_clamped = ") + (fit.clamped ? "true" : "false") + "\n";
  s += line("f_equator", f_equator(v));
  return s;
}

std::string summary_text(const VisibilityFit& fit, const FidelityReport& r) {
  std::string s = scan_summary_text(fit);
  s += line("f_pole_north", r.f_pole_north);
  s += line("f_pole_south", r.f_pole_south);
  s += line("f_poles", r.f_poles);
  s += line("f_mean", r.f_mean);
  return s;
}

std::string pole_text(const PoleResult& north, const PoleResult& south) {
  std::string s;
  for (const PoleResult* p : {&north, &south}) {
    const std::string name(to_string(p->pole));
    s += name + ".correct = " + std::to_string(p->r_correct) + "\n";
    s += name + ".wrong = " + std::to_string(p->r_wrong) + "\n";
    s += name + ".pulses = " + std::to_string(p->pulses) + "\n";
    s += line("f_pole_" + name, p->fidelity);
  }
  s += line("f_poles", pole_average(north, south));
  return s;
}

std::string range_text(int sections, const RangeResult& range) {
  const std::string key = "max_range_km.sections_" + std::to_string(sections);
  switch (range.status) {
    case RangeStatus::crossed:
      return key + printf_string(" = %.2f\n", range.distance_km);
    case RangeStatus::unbounded:
      return key + " = inf\n";
    case RangeStatus::no_crossing:
      return key + " = none\n";
  }
  return key + "\n";
}

void write_artifact(const std::filesystem::path& path, const OutputHeader& h,
                    std::string_view body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  out << header_text(h) << body;
  if (!out) throw Error(ErrorKind::ConfigError, "write failed for " + path.string());
}

}  // namespace tbtele
