#pragma once

// Text artifacts: scan and relay CSVs, `key = value ± error` summaries and
// the `#` reproducibility header placed on top of each of them.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tbtele/analysis.hpp"
#include "tbtele/relay.hpp"

namespace tbtele {

struct OutputHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string command;
};

std::string version();

std::string header_text(const OutputHeader& h);
// Hash from a `# config_hash = ...` line, if the text has one.
std::optional<std::uint64_t> header_hash(std::string_view text);

std::string scan_csv(std::span<const ScanPoint> points);
std::string relay_csv(const QberCurve& curve);

std::string format_value(const ValueWithError& v);
std::string scan_summary_text(const VisibilityFit& fit);
std::string summary_text(const VisibilityFit& fit, const FidelityReport& report);
std::string pole_text(const PoleResult& north, const PoleResult& south);
std::string range_text(int sections, const RangeResult& range);

// Writes header + body; creates parent directories.
void write_artifact(const std::filesystem::path& path, const OutputHeader& h,
                    std::string_view body);

}  // namespace tbtele
