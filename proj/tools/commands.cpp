#include "commands.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <mfswitch/io.hpp>
#include <mfswitch/random.hpp>

#include "config.hpp"

namespace mfswitch::cli {

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> threads;
  std::optional<std::string> format;
};

bool config_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError:
    case ErrorKind::SchemaViolation:
    case ErrorKind::ConfigInvalid:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::RefTooSmall:
    case ErrorKind::Io:
      return true;
    default:
      return false;
  }
}

ParsedConfig load(const Flags& f, Command c) {
  ParsedConfig cfg = parse_config_file(f.config, c);
  if (f.seed) cfg.study.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.replicas) cfg.study.replicas = *f.replicas;
  if (f.threads) cfg.study.threads = *f.threads;
  if (f.format) cfg.format = *f.format;
  cfg.study.out = cfg.out;
  return cfg;
}

std::string statistics_csv(const StudyReport& report) {
  std::string out = "name,n,epsilon,time,count,value,se\n";
  for (const auto& s : report.statistics) {
    out += csv_field(s.name) + ',' + std::to_string(s.n) + ',' + format_double(s.epsilon) + ',' +
           format_double(s.time) + ',' + std::to_string(s.count) + ',' + format_double(s.value) + ',' +
           format_double(s.se) + '\n';
  }
  return out;
}

int study(const Flags& f, Command c, std::ostream& out, std::ostream& err) {
  const ParsedConfig cfg = load(f, c);
  const StudyReport report = run_study(cfg.study);
  if (!cfg.study.out.empty()) write_file_atomic(cfg.study.out / cfg.study.id / "statistics.csv", statistics_csv(report));
  if (cfg.format == "json") {
    out << summary_json(report);
  } else {
    out << report_text(report);
  }
  for (const auto& r : report.replicas) {
    if (!r.ok) err << "warning: replica " << r.replica << " failed: " << r.error << '\n';
  }
  for (const auto& a : report.assertions) {
    if (!a.passed) err << "warning: assertion " << a.name << " failed: " << a.detail << '\n';
  }
  err << "wrote " << (cfg.study.out / cfg.study.id).string() << '\n';
  return report.passed() ? kOk : kAssertionFailed;
}

int simulate_cmd(const Flags& f, std::ostream& out, std::ostream& err) {
  const ParsedConfig cfg = load(f, Command::Simulate);
  const std::uint64_t seed = cfg.study.seed;
  const ChainSeeds seeds{derive_seed(seed, 0, "chain"), derive_seed(seed, 0, "particles")};
  const ChainRun run = simulate_with_chain(cfg.sim, cfg.q, cfg.initial_regime, seeds);
  const std::filesystem::path dir = cfg.out / cfg.study.id;

  nlohmann::json snaps = nlohmann::json::array();
  std::string table = "time,regime,phi,psi\n";
  for (const auto& s : run.record.snapshots) {
    const double phi = moment(s.measure, MomentKind::Phi);
    const double psi = moment(s.measure, MomentKind::Psi);
    snaps.push_back({{"time", s.time}, {"regime", s.regime}, {"phi", phi}, {"psi", psi}});
    table += format_double(s.time) + ',' + std::to_string(s.regime) + ',' + format_double(phi) + ',' +
             format_double(psi) + '\n';
  }
  nlohmann::json summary = {
      {"command", "simulate"},
      {"provenance",
       {{"config_hash", [&] {
          char buf[17];
          std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_label(cfg.study.config_text)));
          return std::string(buf);
        }()},
        {"seed", seed},
        {"version", version_string()}}},
      {"particles", cfg.sim.particles},
      {"dt", cfg.sim.dt},
      {"horizon", cfg.sim.horizon},
      {"jumps", run.path.jump_count()},
      {"snapshots", snaps}};

  if (cfg.format == "json") {
    nlohmann::json traj = nlohmann::json::array();
    for (const auto& s : run.record.snapshots) {
      traj.push_back({{"time", s.time}, {"regime", s.regime}, {"coords", std::vector<double>(s.measure.coords().begin(), s.measure.coords().end())}});
    }
    write_file_atomic(dir / "trajectory.json", traj.dump() + '\n');
    out << summary.dump(2) << '\n';
  } else {
    write_file_atomic(dir / "trajectory.csv", trajectory_csv(run.record));
    out << table;
  }
  write_file_atomic(dir / "path.csv", path_csv(run.path));
  write_file_atomic(dir / "summary.json", summary.dump(2) + '\n');
  err << "wrote " << dir.string() << '\n';
  return kOk;
}

int metrics_cmd(const std::string& a, const std::string& b, const std::string& format, std::ostream& out,
                std::ostream& err) {
  const EmpiricalMeasure mu = parse_measure_csv(read_file(a));
  const EmpiricalMeasure eta = parse_measure_csv(read_file(b));
  const BlDistance bl = bl_distance(mu, eta);
  if (!bl.exact) err << "warning: support too large for the exact solver; BL value is a lower bound\n";
  std::optional<double> w1;
  if (mu.dim() == 1 && eta.dim() == 1) w1 = wasserstein1_1d(mu, eta);
  if (format == "json") {
    nlohmann::json j = {{"bl", bl.value}, {"bl_exact", bl.exact}};
    if (w1) j["w1"] = *w1;
    out << j.dump(2) << '\n';
  } else {
    out << "metric,value\nbl," << format_double(bl.value) << '\n';
    if (w1) out << "w1," << format_double(*w1) << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mfsw: mean-field particle systems with Markovian switching"};
  app.require_subcommand(1);
  Flags flags;
  std::string metric_a, metric_b, metric_format = "csv";

  struct Sub {
    const char* name;
    const char* help;
    std::optional<Command> command;
  };
  const Sub subs[] = {
      {"simulate", "one trajectory of the N-particle system", Command::Simulate},
      {"lln", "coupled law-of-large-numbers study", Command::Lln},
      {"martingale", "martingale-problem residual study", Command::Martingale},
      {"twoscale", "fast switching versus the averaged system", Command::TwoScale},
      {"chain-check", "Markov chain checks against exp(Qt)", Command::ChainCheck},
  };
  std::vector<std::pair<CLI::App*, Command>> commands;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", flags.config, "JSON config file")->required();
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--replicas", flags.replicas, "replica count")->check(CLI::PositiveNumber);
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::NonNegativeNumber);
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    commands.emplace_back(sub, *s.command);
  }
  CLI::App* metrics = app.add_subcommand("metrics", "BL and W1 distance between two measure CSV files");
  metrics->add_option("a", metric_a, "first measure")->required();
  metrics->add_option("b", metric_b, "second measure")->required();
  metrics->add_option("--format", metric_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (metrics->parsed()) return metrics_cmd(metric_a, metric_b, metric_format, out, err);
    for (const auto& [sub, cmd] : commands) {
      if (!sub->parsed()) continue;
      if (cmd == Command::Simulate) return simulate_cmd(flags, out, err);
      return study(flags, cmd, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return config_kind(e.kind()) ? kConfigError : kAssertionFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kAssertionFailed;
  }
  return kConfigError;
}

}  // namespace mfswitch::cli
