// Runs the acceptance criteria end to end and prints one PASS/FAIL line per
// criterion. Exit status is 0 only when every selected criterion passes.
//
//   acceptance --data <dir with lln.json, martingale.json, twoscale.json, chain.json>
//              [--out <dir>] [--only AC1,AC6] [--threads 8]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mfswitch/aggregation.hpp>
#include <mfswitch/error.hpp>
#include <mfswitch/harness.hpp>
#include <mfswitch/io.hpp>
#include <mfswitch/measure.hpp>
#include <mfswitch/random.hpp>

#include "bl_oracle.hpp"
#include "config.hpp"
#include "expm_oracle.hpp"

namespace fs = std::filesystem;
using namespace mfswitch;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

bool ok(const StudyReport& r, const char* name) {
  const Assertion* a = r.assertion(name);
  return a != nullptr && a->passed;
}

std::string said(const StudyReport& r, const char* name) {
  const Assertion* a = r.assertion(name);
  if (a == nullptr) return std::string(name) + ": missing";
  return std::string(a->passed ? "" : "FAILED ") + name + ": " + a->detail;
}

struct Study {
  StudySpec spec;
  StudyReport report;
  double seconds = 0.0;
};

Study run(const fs::path& config, cli::Command cmd, const fs::path& out, std::size_t threads) {
  Study s;
  s.spec = cli::parse_config_file(config, cmd).study;
  s.spec.out = out;
  s.spec.threads = threads;
  const auto t0 = std::chrono::steady_clock::now();
  s.report = run_study(s.spec);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "  " << s.spec.id << ": " << s.report.replicas.size() << " replicas in " << fmt(s.seconds) << " s\n";
  return s;
}

// -- AC1

oracle::Atoms random_atoms(RandomStream& rng, std::size_t dim, std::size_t n) {
  oracle::Atoms a;
  a.dim = dim;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    // quarter-lattice points in [-1.5, 1.5] so supports overlap now and then
    for (std::size_t c = 0; c < dim; ++c) a.x.push_back(std::round(rng.uniform() * 12.0 - 6.0) / 4.0);
    a.w.push_back(0.05 + rng.uniform());
    total += a.w.back();
  }
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) head += (a.w[k] /= total);
  a.w.back() = 1.0 - head;
  return a;
}

Outcome bl_exactness() {
  RandomStream rng(derive_seed(1, 0, "bl-instances"));
  double worst = 0.0;
  int below_grid = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t dim = 1 + static_cast<std::size_t>(k % 2);
    const std::size_t total = 2 + rng.next_u64() % 5;  // 2..6 atoms before merging
    const std::size_t n = 1 + rng.next_u64() % (total - 1);
    const auto a = random_atoms(rng, dim, n);
    const auto b = random_atoms(rng, dim, total - n);
    // reference values first, then the solver
    const double ref = oracle::bl_transport_enumeration(a, b);
    const double grid = oracle::bl_grid_lower_bound(a, b, 0.25);
    const EmpiricalMeasure mu(dim, a.x, a.w), eta(dim, b.x, b.w);
    const double got = bl_distance_exact(mu, eta);
    worst = std::max(worst, std::abs(got - ref));
    if (dim == 1) worst = std::max(worst, std::abs(bl_distance_exact(mu, eta, {BlMethod::Simplex}) - ref));
    if (grid > ref + 1e-9) ++below_grid;
  }
  return {worst <= 1e-6 && below_grid == 0,
          "200 instances, max |exact - oracle| = " + fmt(worst) + ", grid bound violations " + std::to_string(below_grid)};
}

// -- AC2, AC3, AC7

Outcome ctmc_correctness(const Study& s) {
  const auto& r = s.report;
  const auto& c = s.spec.chain;
  const Statistic* tv = r.find("tv_distance");
  if (tv == nullptr) return {false, "no tv_distance statistic"};
  // independent check of the reported marginal against a Pade exponential
  const Eigen::MatrixXd p = oracle::expm(c.q.rates(), c.time);
  double tv_oracle = 0.0;
  for (std::size_t k = 0; k < c.q.size(); ++k) {
    const Statistic* m = r.find("marginal", static_cast<long long>(k));
    if (m == nullptr) return {false, "missing marginal"};
    tv_oracle += std::abs(m->value - p(c.initial, static_cast<Eigen::Index>(k)));
  }
  tv_oracle *= 0.5;
  bool rates_ok = c.q.size() == 3;
  for (std::size_t i = 0; i < c.q.size(); ++i) {
    for (std::size_t j = 0; j < c.q.size(); ++j) {
      if (i != j) rates_ok = rates_ok && c.q.rate(i, j) >= 0.5 && c.q.rate(i, j) <= 3.0;
    }
  }
  const bool pass = ok(r, "tv_distance") && ok(r, "holding_ks") && tv_oracle <= 0.02 && tv->count >= 100000 && rates_ok;
  return {pass, std::to_string(tv->count) + " paths, TV " + fmt(tv->value) + " (oracle " + fmt(tv_oracle) + "), " +
                    said(r, "holding_ks")};
}

Outcome jump_martingales(const Study& s) {
  const auto& r = s.report;
  const Statistic* m = r.find("martingale_mean", 1);
  const std::size_t paths = m ? m->count : 0;
  const bool pass = ok(r, "martingale_mean_zero") && ok(r, "martingale_square_compensated") && paths >= 10000 &&
                    s.spec.chain.martingale_time == 2.0;
  return {pass, std::to_string(paths) + " paths at T = 2; " + said(r, "martingale_mean_zero") + "; " +
                    said(r, "martingale_square_compensated")};
}

Outcome occupation(const Study& s) {
  const auto& r = s.report;
  const Statistic* st = r.find("occupation_abs", s.spec.chain.occupation_spec.flat_state, 0.1);
  const std::size_t n = st ? st->count : 0;
  return {ok(r, "occupation_decreasing") && ok(r, "occupation_slope") && n >= 200,
          std::to_string(n) + " replicas; " + said(r, "occupation_decreasing") + "; " + said(r, "occupation_slope")};
}

// -- AC4, AC5

Outcome coupled_lln(const Study& s) {
  const auto& r = s.report;
  const auto& l = s.spec.lln;
  const bool shape = l.sizes == std::vector<std::size_t>{64, 256, 1024} && l.reference == 8192 &&
                     s.spec.replicas == 20 && l.base.dt == 1e-3 && l.base.horizon == 1.0;
  return {shape && ok(r, "bl_distance_decreasing") && ok(r, "lln_slope"),
          said(r, "bl_distance_decreasing") + "; " + said(r, "lln_slope")};
}

Outcome martingale_problem(const Study& s) {
  const auto& r = s.report;
  const Statistic* q = r.find("qv_ratio", 256);
  const Statistic* v = r.find("variance_ratio", 256);
  const bool shape = s.spec.replicas == 500 && s.spec.martingale.sizes == std::vector<std::size_t>{256, 1024} &&
                     std::isfinite(s.spec.martingale.f.bound);
  return {shape && ok(r, "martingale_mean_zero") && ok(r, "qv_ratio") && ok(r, "variance_ratio"),
          said(r, "martingale_mean_zero") + "; qv ratio at 256 " + (q ? fmt(q->value) : "?") + "; variance ratio " +
              (v ? fmt(v->value) : "?") + (ok(r, "qv_ratio") && ok(r, "variance_ratio") ? "" : "; " + said(r, "qv_ratio") + "; " + said(r, "variance_ratio"))};
}

// -- AC6

Outcome aggregation_algebra() {
  auto gen = [](double r) {
    Eigen::MatrixXd m(2, 2);
    m << -r, r, r, -r;
    return validate_generator(m);
  };
  Eigen::MatrixXd slow(4, 4);
  slow << -1, 0, 1, 0, 0, -1, 0, 1, 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::MatrixXd want(2, 2);
  want << -1, 1, 1, -1;
  const auto worked = aggregate(TwoScaleSpec({gen(1), gen(2)}, slow, 0.1)).q_bar.rates();
  const auto zero = aggregate(TwoScaleSpec({gen(1), gen(2)}, Eigen::MatrixXd::Zero(4, 4), 0.1)).q_bar.rates();
  Eigen::MatrixXd q3(3, 3);
  q3 << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  const auto single = aggregate(TwoScaleSpec({validate_generator(q3)}, Eigen::MatrixXd::Zero(3, 3), 0.5)).q_bar.rates();
  const bool a = worked == want;
  const bool b = zero.rows() == 2 && zero.cols() == 2 && zero.isZero(0.0);
  const bool c = single.rows() == 1 && single(0, 0) == 0.0;
  return {a && b && c, std::string("worked example ") + (a ? "exact" : "differs") + ", zero slow part " +
                           (b ? "gives 0" : "nonzero") + ", single block " + (c ? "gives [0]" : "wrong")};
}

// -- AC8, AC9

Outcome operator_residual(const Study& s) {
  const auto& t = s.spec.twoscale;
  const bool shape = t.particles == 512 && t.epsilons == std::vector<double>{0.1, 0.01, 0.001};
  return {shape && ok(s.report, "operator_residual_decreasing"), said(s.report, "operator_residual_decreasing")};
}

Outcome two_scale_limit(const Study& s) {
  const auto& r = s.report;
  const auto& t = s.spec.twoscale;
  const bool shape = t.particles == 512 && s.spec.replicas == 200 && t.functions.empty() && t.control &&
                     t.epsilons == std::vector<double>{0.1, 0.01, 0.001};
  return {shape && ok(r, "difference_nonincreasing") && ok(r, "difference_within_se") && ok(r, "control_detected"),
          said(r, "difference_nonincreasing") + "; " + said(r, "difference_within_se") + "; " +
              said(r, "control_detected")};
}

// -- AC10, AC11

Outcome moment_stability(const std::vector<const Study*>& studies) {
  std::size_t nonfinite = 0, checked = 0;
  std::string detail;
  bool bounded = true;
  for (const Study* s : studies) {
    for (const auto& rep : s->report.replicas) {
      if (!rep.ok && rep.error.rfind("NonFiniteState", 0) == 0) ++nonfinite;
    }
    if (s->spec.kind == StudyKind::ChainChecks) continue;
    ++checked;
    if (!ok(s->report, "moments_bounded")) {
      bounded = false;
      detail += " " + said(s->report, "moments_bounded") + ";";
    }
  }
  return {nonfinite == 0 && bounded && checked > 0,
          std::to_string(nonfinite) + " NonFiniteState replicas; moment bound holds in " +
              (bounded ? "all " : "not all ") + std::to_string(checked) + " particle studies" + detail};
}

Outcome determinism(const std::vector<const Study*>& studies, std::size_t threads) {
  std::size_t compared = 0;
  std::string bad;
  for (const Study* s : studies) {
    StudySpec again = s->spec;
    again.out.clear();
    again.threads = 1;
    const auto t0 = std::chrono::steady_clock::now();
    const StudyReport rerun = run_study(again);
    std::cerr << "  rerun " << again.id << " at 1 thread in "
              << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) << " s\n";
    bool same = rerun.replicas.size() == s->report.replicas.size();
    for (std::size_t k = 0; same && k < rerun.replicas.size(); ++k) {
      same = replica_csv(rerun.replicas[k]) == replica_csv(s->report.replicas[k]);
    }
    // the stored files must hold the same bytes as well
    if (same && !s->spec.out.empty()) {
      for (std::size_t k = 0; same && k < rerun.replicas.size(); ++k) {
        const fs::path f = s->spec.out / s->spec.id / ("replica-" + std::to_string(k) + ".csv");
        same = read_file(f) == replica_csv(rerun.replicas[k]);
      }
    }
    compared += rerun.replicas.size();
    if (!same) bad += " " + s->spec.id;
  }
  return {bad.empty() && !studies.empty(),
          std::to_string(studies.size()) + " studies, " + std::to_string(compared) + " replica files identical at " +
              std::to_string(threads) + " and 1 threads" + (bad.empty() ? "" : "; differs:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string data = MFSWITCH_ACCEPTANCE_DATA;
  std::string out = "acceptance-out";
  std::string only;
  std::size_t threads = 8;
  app.add_option("--data", data, "directory with the study configs");
  app.add_option("--out", out, "where study outputs are written");
  app.add_option("--only", only, "comma-separated subset, e.g. AC1,AC6");
  app.add_option("--threads", threads, "worker threads of the first run");
  CLI11_PARSE(app, argc, argv);

  auto selected = [&](const std::string& id) {
    if (only.empty()) return true;
    std::stringstream ss(only);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == id) return true;
    }
    return false;
  };
  auto any = [&](std::initializer_list<const char*> ids) {
    for (const char* id : ids) {
      if (selected(id)) return true;
    }
    return false;
  };

  std::map<std::string, Outcome> results;
  auto guard = [&](const std::string& id, const std::function<Outcome()>& f) {
    if (!selected(id)) return;
    try {
      results[id] = f();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("threw ") + e.what()};
    }
  };

  const fs::path dir(data);
  std::optional<Study> chain, lln, mart, ts;
  try {
    if (any({"AC2", "AC3", "AC7", "AC10", "AC11"})) chain = run(dir / "chain.json", cli::Command::ChainCheck, out, threads);
    if (any({"AC4", "AC10", "AC11"})) lln = run(dir / "lln.json", cli::Command::Lln, out, threads);
    if (any({"AC5", "AC10", "AC11"})) mart = run(dir / "martingale.json", cli::Command::Martingale, out, threads);
    if (any({"AC8", "AC9", "AC10", "AC11"})) ts = run(dir / "twoscale.json", cli::Command::TwoScale, out, threads);
  } catch (const std::exception& e) {
    std::cerr << "study setup failed: " << e.what() << '\n';
    return 2;
  }

  guard("AC1", bl_exactness);
  guard("AC2", [&] { return ctmc_correctness(*chain); });
  guard("AC3", [&] { return jump_martingales(*chain); });
  guard("AC4", [&] { return coupled_lln(*lln); });
  guard("AC5", [&] { return martingale_problem(*mart); });
  guard("AC6", aggregation_algebra);
  guard("AC7", [&] { return occupation(*chain); });
  guard("AC8", [&] { return operator_residual(*ts); });
  guard("AC9", [&] { return two_scale_limit(*ts); });

  std::vector<const Study*> all;
  for (const auto* s : {&chain, &lln, &mart, &ts}) {
    if (s->has_value()) all.push_back(&**s);
  }
  guard("AC10", [&] { return moment_stability(all); });
  guard("AC11", [&] { return determinism(all, threads); });

  const char* names[] = {"AC1 BL metric exactness",        "AC2 CTMC correctness",
                         "AC3 jump martingale decomposition", "AC4 coupled LLN",
                         "AC5 martingale-problem residual", "AC6 aggregation algebra",
                         "AC7 occupation-time averaging",   "AC8 operator-averaging residual",
                         "AC9 two-scale weak limit",        "AC10 moment stability",
                         "AC11 determinism"};
  bool all_pass = true;
  for (int k = 0; k < 11; ++k) {
    const std::string id = "AC" + std::to_string(k + 1);
    if (!selected(id)) continue;
    const Outcome& o = results[id];
    all_pass = all_pass && o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << names[k] << " | " << o.detail << '\n';
  }
  return all_pass ? 0 : 1;
}
