#include "mfswitch/harness.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "mfswitch/error.hpp"
#include "mfswitch/io.hpp"
#include "mfswitch/random.hpp"

#ifndef MFSWITCH_VERSION
#define MFSWITCH_VERSION "0.0.0"
#endif

namespace mfswitch {

std::string_view to_string(StudyKind kind) noexcept {
  switch (kind) {
    case StudyKind::Lln: return "lln";
    case StudyKind::Martingale: return "martingale";
    case StudyKind::TwoScale: return "twoscale";
    case StudyKind::ChainChecks: return "chain-checks";
  }
  return "unknown";
}

std::string version_string() { return "mfswitch " MFSWITCH_VERSION; }

void StudySpec::validate() const {
  if (replicas == 0) throw Error(ErrorKind::ConfigInvalid, "replica count must be at least 1");
  if (id.empty() || id.find_first_of("/\\") != std::string::npos) {
    throw Error(ErrorKind::ConfigInvalid, "study id must be a non-empty plain name");
  }
  switch (kind) {
    case StudyKind::Lln: {
      LlnSpec s = lln;
      s.replicas = replicas;
      s.validate();
      break;
    }
    case StudyKind::Martingale: {
      const auto& m = martingale;
      if (!m.base.model) throw Error(ErrorKind::ConfigInvalid, "martingale study needs a model");
      if (m.sizes.empty()) throw Error(ErrorKind::ConfigInvalid, "martingale study needs at least one size");
      if (m.q.size() != m.base.model->regimes()) {
        throw Error(ErrorKind::DimensionMismatch, "generator size differs from the model's regime count");
      }
      if (m.initial_regime < 0 || static_cast<std::size_t>(m.initial_regime) >= m.q.size()) {
        throw Error(ErrorKind::ConfigInvalid, "initial regime outside the chain");
      }
      if (!m.f.id.empty() && m.f.dim != m.base.model->dim()) {
        throw Error(ErrorKind::DimensionMismatch, "test function has the wrong dimension");
      }
      for (const std::size_t n : m.sizes) {
        SimConfig probe = m.base;
        probe.particles = n;
        probe.stream_ids.clear();
        probe.validate();
      }
      break;
    }
    case StudyKind::TwoScale: {
      TwoScaleExperimentSpec s = twoscale;
      s.replicas = replicas;
      s.validate();
      break;
    }
    case StudyKind::ChainChecks: {
      const auto& c = chain;
      if (c.initial < 0 || static_cast<std::size_t>(c.initial) >= c.q.size()) {
        throw Error(ErrorKind::ConfigInvalid, "initial state outside the chain");
      }
      if (!(c.time >= 0.0) || !(c.martingale_time >= 0.0)) throw Error(ErrorKind::ConfigInvalid, "negative time");
      if (c.occupation) {
        OccupationSpec o = c.occupation_spec;
        o.replicas = std::max<std::size_t>(1, c.occupation_samples);
        o.validate();
        if (c.occupation_samples == 0) throw Error(ErrorKind::ConfigInvalid, "occupation samples must be positive");
      }
      break;
    }
  }
}

bool StudyReport::passed() const {
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return true;
}

const Statistic* StudyReport::find(std::string_view name, long long n, double epsilon) const {
  for (const auto& s : statistics) {
    if (s.name == name && s.n == n && s.epsilon == epsilon) return &s;
  }
  return nullptr;
}

const Assertion* StudyReport::assertion(std::string_view name) const {
  for (const auto& a : assertions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

StudyReport run_study(const StudySpec& spec) {
  spec.validate();
  StudyReport report;
  report.id = spec.id;
  report.kind = spec.kind;
  report.provenance = {hex64(hash_label(spec.config_text)), spec.seed, version_string()};
  report.replicas.resize(spec.replicas);

  auto body = [&] {
    tbb::parallel_for(std::size_t{0}, spec.replicas, [&](std::size_t r) {
      ReplicaResult& out = report.replicas[r];
      out.replica = r;
      try {
        out.records = run_replica(spec, r);
      } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
        out.records.clear();
      }
    });
  };
  if (spec.threads > 0) {
    tbb::task_arena arena(static_cast<int>(spec.threads));
    arena.execute(body);
  } else {
    body();
  }

  summarize_report(spec, report);
  if (!spec.out.empty()) write_report(report, spec.out / spec.id);
  return report;
}

std::string replica_csv(const ReplicaResult& r) {
  std::string out = "replica,metric,n,epsilon,time,value\n";
  const std::string id = std::to_string(r.replica);
  for (const auto& rec : r.records) {
    out += id + ',' + csv_field(rec.metric) + ',' + std::to_string(rec.n) + ',' + format_double(rec.epsilon) + ',' +
           format_double(rec.time) + ',' + format_double(rec.value) + '\n';
  }
  return out;
}

std::vector<Record> parse_replica_csv(std::string_view text) {
  std::vector<Record> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": expected 6 fields");
    }
    try {
      out.push_back({cells[1], std::stoll(cells[2]), std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5])});
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string summary_json(const StudyReport& report) {
  using nlohmann::json;
  json j;
  j["study"] = report.id;
  j["kind"] = std::string(to_string(report.kind));
  j["provenance"] = {{"config_hash", report.provenance.config_hash},
                     {"seed", report.provenance.seed},
                     {"version", report.provenance.version}};
  j["degraded"] = report.degraded;
  j["passed"] = report.passed();
  json replicas = json::array();
  for (const auto& r : report.replicas) {
    json e = {{"replica", r.replica}, {"ok", r.ok}, {"records", r.records.size()}};
    if (!r.ok) e["error"] = r.error;
    replicas.push_back(e);
  }
  j["replicas"] = replicas;
  json stats = json::array();
  for (const auto& s : report.statistics) {
    stats.push_back({{"name", s.name},
                     {"n", s.n},
                     {"epsilon", number(s.epsilon)},
                     {"time", number(s.time)},
                     {"count", s.count},
                     {"value", number(s.value)},
                     {"se", number(s.se)}});
  }
  j["statistics"] = stats;
  json fits = json::array();
  for (const auto& f : report.fits) {
    fits.push_back({{"name", f.name},
                    {"slope", number(f.fit.slope)},
                    {"intercept", number(f.fit.intercept)},
                    {"slope_se", number(f.fit.slope_se)},
                    {"ci95", {number(f.fit.ci_low), number(f.fit.ci_high)}},
                    {"points", f.fit.points}});
  }
  j["fits"] = fits;
  json asserts = json::array();
  for (const auto& a : report.assertions) {
    asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  }
  j["assertions"] = asserts;
  return j.dump(2) + '\n';
}

std::string report_text(const StudyReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << "study " << report.id << " (" << to_string(report.kind) << ")\n";
  os << "seed " << report.provenance.seed << "  config " << report.provenance.config_hash << "  "
     << report.provenance.version << '\n';
  std::size_t ok = 0;
  for (const auto& r : report.replicas) ok += r.ok ? 1 : 0;
  os << "replicas " << ok << "/" << report.replicas.size() << (report.degraded ? "  DEGRADED" : "") << "\n\n";
  for (const auto& s : report.statistics) {
    os << "  " << s.name;
    if (s.n >= 0) os << " n=" << s.n;
    if (s.epsilon != 0.0) os << " eps=" << s.epsilon;
    os << "  " << s.value;
    if (s.se > 0.0) os << " +- " << s.se;
    os << '\n';
  }
  for (const auto& f : report.fits) {
    os << "  fit " << f.name << ": slope " << f.fit.slope << " [" << f.fit.ci_low << ", " << f.fit.ci_high << "]\n";
  }
  os << '\n';
  for (const auto& a : report.assertions) {
    os << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << '\n';
  }
  return os.str();
}

void write_report(const StudyReport& report, const std::filesystem::path& dir) {
  for (const auto& r : report.replicas) {
    write_file_atomic(dir / ("replica-" + std::to_string(r.replica) + ".csv"), replica_csv(r));
  }
  write_file_atomic(dir / "summary.json", summary_json(report));
  write_file_atomic(dir / "report.txt", report_text(report));
}

}  // namespace mfswitch
