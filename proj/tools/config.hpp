#pragma once

// Strict JSON config reader for the mfsw tool. Every problem in a document is
// collected before failing, so one run reports all of them.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <mfswitch/aggregation.hpp>
#include <mfswitch/chain.hpp>
#include <mfswitch/dynamics.hpp>
#include <mfswitch/error.hpp>
#include <mfswitch/harness.hpp>

namespace mfswitch::cli {

struct SchemaIssue {
  std::string key;  ///< dotted path, e.g. "sim.dt"
  std::string reason;
};

/// ParseError (with line and column) or SchemaViolation (with every issue).
class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, const std::string& detail, std::vector<SchemaIssue> issues = {})
      : Error(kind, detail), issues_(std::move(issues)) {}
  [[nodiscard]] const std::vector<SchemaIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<SchemaIssue> issues_;
};

enum class Command { Simulate, Lln, Martingale, TwoScale, ChainCheck };

struct ParsedConfig {
  StudySpec study;  ///< kind follows the command
  SimConfig sim;
  GeneratorMatrix q;
  int initial_regime = 0;
  bool has_chain = false;
  bool has_twoscale = false;
  TwoScaleSpec twoscale;
  std::string format = "csv";
  std::filesystem::path out = "mfsw-out";
};

/// Throws ConfigError.
[[nodiscard]] ParsedConfig parse_config(std::string_view text, Command command);
[[nodiscard]] ParsedConfig parse_config_file(const std::filesystem::path& path, Command command);

/// Levenshtein distance, used for "did you mean" hints.
[[nodiscard]] std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace mfswitch::cli
