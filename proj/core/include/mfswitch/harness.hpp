#pragma once

// Study orchestration. Every study reduces each replica to a flat list of
// records (metric, n, epsilon, time, value); all aggregates, fits and
// assertion flags are computed from those records alone, so a report can be
// rebuilt from its replica files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfswitch/chain.hpp"
#include "mfswitch/dynamics.hpp"
#include "mfswitch/limit.hpp"
#include "mfswitch/stats.hpp"
#include "mfswitch/test_functions.hpp"
#include "mfswitch/twoscale.hpp"

namespace mfswitch {

enum class StudyKind { Lln, Martingale, TwoScale, ChainChecks };

[[nodiscard]] std::string_view to_string(StudyKind kind) noexcept;

struct MartingaleStudySpec {
  SimConfig base;  ///< particles ignored
  GeneratorMatrix q;
  int initial_regime = 0;
  TestFunctionBundle f;           ///< bump when id is empty
  std::vector<std::size_t> sizes = {256, 1024};
  std::vector<double> moment_times;
};

struct ChainCheckSpec {
  GeneratorMatrix q;
  int initial = 0;
  double time = 1.0;                     ///< marginal compared with exp(Qt) here
  std::size_t marginal_paths = 5000;     ///< per replica
  double martingale_time = 2.0;
  std::size_t martingale_paths = 500;    ///< per replica
  bool occupation = false;               ///< also run the occupation study below
  OccupationSpec occupation_spec;        ///< replicas field ignored
  std::size_t occupation_samples = 10;   ///< per replica and epsilon
};

/// Thresholds of the configured assertions.
struct AssertionSettings {
  double se_window = 3.0;
  double lln_slope_low = -0.7, lln_slope_high = -0.3;
  double qv_ratio_low = 0.7, qv_ratio_high = 1.3;
  double variance_ratio_low = 2.8, variance_ratio_high = 5.7;
  double tv_threshold = 0.02;
  double ks_level = 0.01;
  double occupation_slope_low = 0.3, occupation_slope_high = 0.7;
  double moment_factor = 10.0;  ///< sup_t E<mu(t), psi> <= factor * E<mu(0), psi>
};

struct StudySpec {
  std::string id = "study";
  StudyKind kind = StudyKind::Lln;
  std::size_t replicas = 20;
  std::uint64_t seed = 0;
  std::filesystem::path out;  ///< nothing is written when empty
  std::size_t threads = 0;    ///< 0 means the TBB default
  std::string config_text;    ///< hashed into the provenance block

  LlnSpec lln;
  MartingaleStudySpec martingale;
  TwoScaleExperimentSpec twoscale;
  ChainCheckSpec chain;
  AssertionSettings assertions;

  /// Throws ConfigInvalid (and whatever the sub-spec's validation throws).
  void validate() const;
};

struct Record {
  std::string metric;
  long long n = -1;
  double epsilon = 0.0;
  double time = 0.0;
  double value = 0.0;

  friend bool operator==(const Record&, const Record&) = default;
};

struct ReplicaResult {
  std::size_t replica = 0;
  bool ok = true;
  std::string error;  ///< "Kind: detail" of a failed replica
  std::vector<Record> records;
};

struct Statistic {
  std::string name;
  long long n = -1;
  double epsilon = 0.0;
  double time = 0.0;
  std::size_t count = 0;
  double value = 0.0;  ///< a mean, ratio or test statistic
  double se = 0.0;     ///< 0 when not applicable
};

struct FitResult {
  std::string name;
  RateFit fit;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
};

struct StudyReport {
  std::string id;
  StudyKind kind = StudyKind::Lln;
  std::vector<ReplicaResult> replicas;
  std::vector<Statistic> statistics;
  std::vector<FitResult> fits;
  std::vector<Assertion> assertions;
  Provenance provenance;
  bool degraded = false;  ///< at least one replica failed

  [[nodiscard]] bool passed() const;
  [[nodiscard]] const Statistic* find(std::string_view name, long long n = -1, double epsilon = 0.0) const;
  [[nodiscard]] const Assertion* assertion(std::string_view name) const;
};

[[nodiscard]] std::string version_string();

/// Records of one replica; throws whatever the pipeline throws.
[[nodiscard]] std::vector<Record> run_replica(const StudySpec& spec, std::size_t replica);

/// Statistics, fits and assertions from the stored replica results.
void summarize_report(const StudySpec& spec, StudyReport& report);

/// Validates, runs every replica in parallel (failures are kept and mark
/// the report degraded), summarizes and, when spec.out is set, writes
/// <out>/<id>/replica-<k>.csv, summary.json and report.txt.
[[nodiscard]] StudyReport run_study(const StudySpec& spec);

[[nodiscard]] std::string replica_csv(const ReplicaResult& r);
[[nodiscard]] std::vector<Record> parse_replica_csv(std::string_view text);
[[nodiscard]] std::string summary_json(const StudyReport& report);
[[nodiscard]] std::string report_text(const StudyReport& report);
void write_report(const StudyReport& report, const std::filesystem::path& dir);

}  // namespace mfswitch
