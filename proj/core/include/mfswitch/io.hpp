#pragma once

// Text output: round-trip doubles, RFC-4180 CSV fields, atomic file writes,
// and the measure / path / trajectory CSV layouts.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mfswitch/chain.hpp"
#include "mfswitch/dynamics.hpp"
#include "mfswitch/measure.hpp"

namespace mfswitch {

/// Shortest text that parses back to the same double; "nan", "inf", "-inf"
/// for non-finite values.
[[nodiscard]] std::string format_double(double v);

/// Quotes the field when it holds a comma, quote or line break.
[[nodiscard]] std::string csv_field(std::string_view s);

/// Splits one CSV line (no embedded line breaks).
[[nodiscard]] std::vector<std::string> split_csv_line(std::string_view line);

/// Writes to a sibling temporary and renames it over `path`; creates parent
/// directories. Throws Io.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Throws Io.
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// Header "weight,x0,...,x{d-1}", one atom per row.
[[nodiscard]] std::string measure_csv(const EmpiricalMeasure& mu);

/// Inverse of measure_csv; a missing weight column means uniform weights.
/// Throws ParseError naming the line.
[[nodiscard]] EmpiricalMeasure parse_measure_csv(std::string_view text);

/// Header "jump_time,state"; the first row is time 0 with the initial state.
[[nodiscard]] std::string path_csv(const SwitchingPath& path);

/// Header "time,regime,particle,x0,...": every snapshot, every particle.
[[nodiscard]] std::string trajectory_csv(const TrajectoryRecord& rec);

}  // namespace mfswitch
