// Per-kind replica pipelines and their summaries.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mfswitch/error.hpp"
#include "mfswitch/harness.hpp"
#include "mfswitch/random.hpp"

namespace mfswitch {

namespace {

using Records = std::vector<Record>;

TestFunctionBundle martingale_function(const MartingaleStudySpec& m) {
  if (!m.f.id.empty()) return m.f;
  return bump_function(m.base.model->dim(), std::vector<double>(m.base.model->dim(), 0.0), 2.0);
}

void push_moments(Records& out, const std::string& metric, long long n, double eps,
                  const std::vector<double>& times, const std::vector<double>& values) {
  const std::size_t k = std::min(times.size(), values.size());
  for (std::size_t j = 0; j < k; ++j) out.push_back({metric, n, eps, times[j], values[j]});
}

Records lln_records(const StudySpec& spec, std::size_t r) {
  LlnSpec s = spec.lln;
  s.seed = spec.seed;
  s.replicas = spec.replicas;
  const LlnReplica rep = lln_replica(s, r);
  Records out;
  for (std::size_t k = 0; k < s.sizes.size(); ++k) {
    const auto n = static_cast<long long>(s.sizes[k]);
    out.push_back({"bl_distance", n, 0.0, s.time, rep.distances[k]});
    out.push_back({"bl_exact", n, 0.0, s.time, rep.exact[k] ? 1.0 : 0.0});
  }
  out.push_back({"jumps", -1, 0.0, s.base.horizon, static_cast<double>(rep.jumps)});
  for (std::size_t k = 0; k < rep.moments.size(); ++k) {
    const auto n = static_cast<long long>(k < s.sizes.size() ? s.sizes[k] : s.reference);
    push_moments(out, "moment_psi", n, 0.0, s.moment_times, rep.moments[k]);
  }
  return out;
}

Records martingale_records(const StudySpec& spec, std::size_t r) {
  const MartingaleStudySpec& m = spec.martingale;
  const TestFunctionBundle f = martingale_function(m);
  RandomStream chain_rng(derive_seed(spec.seed, r, "chain"));
  const SwitchingPath path = sample_path(m.q, m.initial_regime, m.base.horizon, chain_rng);
  Records out;
  out.push_back({"jumps", -1, 0.0, m.base.horizon, static_cast<double>(path.jump_count())});
  for (const std::size_t n : m.sizes) {
    SimConfig cfg = m.base;
    cfg.particles = n;
    cfg.checkpoints = {0.0, cfg.horizon};
    cfg.record_every_step = false;
    cfg.stream_ids.clear();
    MartingaleAccumulator acc(*cfg.model, m.q, f);
    MomentTracker moments(m.moment_times, 1e-9 * cfg.dt);
    ObserverList observers{&acc, &moments};
    (void)simulate(cfg, path, derive_seed(spec.seed, r, "particles-" + std::to_string(n)), &observers);
    const auto nn = static_cast<long long>(n);
    out.push_back({"martingale_residual", nn, 0.0, cfg.horizon, acc.residual()});
    out.push_back({"quadratic_variation", nn, 0.0, cfg.horizon, acc.quadratic_variation()});
    push_moments(out, "moment_psi", nn, 0.0, m.moment_times, moments.values());
  }
  return out;
}

Records twoscale_records(const StudySpec& spec, std::size_t r) {
  TwoScaleExperimentSpec s = spec.twoscale;
  s.seed = spec.seed;
  s.replicas = spec.replicas;
  const TwoScaleReplica rep = two_scale_replica(s, r);
  Records out;
  for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
    const double eps = s.epsilons[k];
    for (std::size_t f = 0; f < rep.fast[k].size(); ++f) {
      out.push_back({"fast_value", static_cast<long long>(f), eps, s.horizon, rep.fast[k][f]});
    }
    out.push_back({"operator_residual", -1, eps, s.horizon, rep.operator_residual[k]});
    push_moments(out, "moment_fast", -1, eps, s.moment_times, rep.moments[k]);
  }
  for (std::size_t f = 0; f < rep.averaged.size(); ++f) {
    out.push_back({"averaged_value", static_cast<long long>(f), 0.0, s.horizon, rep.averaged[f]});
  }
  for (std::size_t f = 0; f < rep.control.size(); ++f) {
    out.push_back({"control_value", static_cast<long long>(f), 0.0, s.horizon, rep.control[f]});
  }
  const std::size_t e = s.epsilons.size();
  if (rep.moments.size() > e) push_moments(out, "moment_averaged", -1, 0.0, s.moment_times, rep.moments[e]);
  if (rep.moments.size() > e + 1) push_moments(out, "moment_control", -1, 0.0, s.moment_times, rep.moments[e + 1]);
  return out;
}

double holding_horizon(const ChainCheckSpec& c) {
  const double rate = c.q.exit_rate(static_cast<std::size_t>(c.initial));
  return rate > 0.0 ? std::max(c.time, 60.0 / rate) : c.time;
}

Records chain_records(const StudySpec& spec, std::size_t r) {
  const ChainCheckSpec& c = spec.chain;
  const std::size_t m = c.q.size();
  Records out;

  std::vector<double> counts(m, 0.0);
  RandomStream rng(derive_seed(spec.seed, r, "marginal"));
  const double horizon = holding_horizon(c);
  const bool holds = c.q.exit_rate(static_cast<std::size_t>(c.initial)) > 0.0;
  for (std::size_t p = 0; p < c.marginal_paths; ++p) {
    const SwitchingPath path = sample_path(c.q, c.initial, horizon, rng);
    counts[static_cast<std::size_t>(path.value_at(c.time))] += 1.0;
    if (holds && path.jump_count() > 0) {
      out.push_back({"holding_time", static_cast<long long>(r * c.marginal_paths + p), 0.0, 0.0,
                     path.jump_times().front()});
    }
  }
  for (std::size_t s = 0; s < m; ++s) out.push_back({"marginal_count", static_cast<long long>(s), 0.0, c.time, counts[s]});

  if (c.martingale_paths > 0) {
    RandomStream mrng(derive_seed(spec.seed, r, "martingale"));
    std::vector<double> sum(m * m, 0.0), sumsq(m * m, 0.0), gap(m * m, 0.0), gapsq(m * m, 0.0);
    for (std::size_t p = 0; p < c.martingale_paths; ++p) {
      const SwitchingPath path = sample_path(c.q, c.initial, c.martingale_time, mrng);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          if (i == j) continue;
          const auto d = martingale_decomposition(path, c.q, static_cast<int>(i), static_cast<int>(j), c.martingale_time);
          const double g = d.martingale * d.martingale - d.compensator;
          sum[i * m + j] += d.martingale;
          sumsq[i * m + j] += d.martingale * d.martingale;
          gap[i * m + j] += g;
          gapsq[i * m + j] += g * g;
        }
      }
    }
    const double t = c.martingale_time;
    out.push_back({"martingale_paths", -1, 0.0, t, static_cast<double>(c.martingale_paths)});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        const auto pair = static_cast<long long>(i * m + j);
        out.push_back({"martingale_sum", pair, 0.0, t, sum[i * m + j]});
        out.push_back({"martingale_sumsq", pair, 0.0, t, sumsq[i * m + j]});
        out.push_back({"gap_sum", pair, 0.0, t, gap[i * m + j]});
        out.push_back({"gap_sumsq", pair, 0.0, t, gapsq[i * m + j]});
      }
    }
  }

  if (c.occupation) {
    OccupationSpec o = c.occupation_spec;
    o.seed = spec.seed;
    for (std::size_t s = 0; s < c.occupation_samples; ++s) {
      const std::size_t g = r * c.occupation_samples + s;
      const auto res = occupation_replica(o, g);
      for (std::size_t k = 0; k < res.size(); ++k) {
        out.push_back({"occupation_residual", static_cast<long long>(g), o.epsilons[k], o.horizon, res[k]});
      }
    }
  }
  return out;
}

// ---- summaries

// Values of `metric` across the ok replicas, grouped by (n, epsilon, time).
struct Key {
  long long n;
  double epsilon;
  double time;
  bool operator<(const Key& o) const {
    if (n != o.n) return n < o.n;
    if (epsilon != o.epsilon) return epsilon < o.epsilon;
    return time < o.time;
  }
};

std::map<Key, std::vector<double>> collect(const StudyReport& report, std::string_view metric) {
  std::map<Key, std::vector<double>> out;
  for (const auto& r : report.replicas) {
    if (!r.ok) continue;
    for (const auto& rec : r.records) {
      if (rec.metric == metric) out[{rec.n, rec.epsilon, rec.time}].push_back(rec.value);
    }
  }
  return out;
}

std::vector<double> values_of(const StudyReport& report, std::string_view metric, long long n = -1,
                              double eps = 0.0) {
  std::vector<double> v;
  for (const auto& r : report.replicas) {
    if (!r.ok) continue;
    for (const auto& rec : r.records) {
      if (rec.metric == metric && rec.n == n && rec.epsilon == eps) v.push_back(rec.value);
    }
  }
  return v;
}

double sum_of(const StudyReport& report, std::string_view metric, long long n = -1) {
  double s = 0.0;
  for (const auto& r : report.replicas) {
    if (!r.ok) continue;
    for (const auto& rec : r.records) {
      if (rec.metric == metric && rec.n == n) s += rec.value;
    }
  }
  return s;
}

Statistic stat_of(std::string name, long long n, double eps, double time, std::span<const double> v) {
  const SampleSummary s = summarize(v);
  return {std::move(name), n, eps, time, s.count, s.mean, s.se};
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void add(StudyReport& report, std::string name, bool passed, std::string detail) {
  report.assertions.push_back({std::move(name), passed, std::move(detail)});
}

// sup over recorded times of the replica-mean moment, divided by its value at t = 0.
void moment_check(const StudySpec& spec, StudyReport& report, const std::vector<std::string>& metrics) {
  bool any = false;
  bool ok = true;
  std::string detail;
  for (const auto& metric : metrics) {
    std::map<std::pair<long long, double>, std::map<double, double>> curves;
    for (const auto& [key, v] : collect(report, metric)) {
      curves[{key.n, key.epsilon}][key.time] = summarize(v).mean;
    }
    for (const auto& [id, curve] : curves) {
      if (curve.empty() || curve.begin()->first != 0.0) continue;
      const double start = curve.begin()->second;
      double sup = 0.0;
      for (const auto& [t, v] : curve) sup = std::max(sup, std::isfinite(v) ? v : INFINITY);
      const double ratio = start > 0.0 ? sup / start : (sup > 0.0 ? INFINITY : 1.0);
      report.statistics.push_back({metric + "_sup_ratio", id.first, id.second, 0.0, curve.size(), ratio, 0.0});
      any = true;
      if (!(ratio <= spec.assertions.moment_factor)) {
        ok = false;
        detail += metric + " n=" + std::to_string(id.first) + " eps=" + num(id.second) + " ratio " + num(ratio) + "; ";
      }
    }
  }
  if (any) add(report, "moments_bounded", ok, ok ? "sup E<mu,psi> within " + num(spec.assertions.moment_factor) + "x start" : detail);
}

void summarize_lln_report(const StudySpec& spec, StudyReport& report) {
  const auto& s = spec.lln;
  std::vector<double> scales, means;
  bool decreasing = true;
  double prev = INFINITY;
  for (const std::size_t n : s.sizes) {
    const auto v = values_of(report, "bl_distance", static_cast<long long>(n));
    const Statistic st = stat_of("bl_distance", static_cast<long long>(n), 0.0, s.time, v);
    report.statistics.push_back(st);
    if (!(st.value < prev)) decreasing = false;
    prev = st.value;
    if (st.value > 0.0) {
      scales.push_back(static_cast<double>(n));
      means.push_back(st.value);
    }
  }
  add(report, "bl_distance_decreasing", decreasing && !scales.empty(), "mean BL distance strictly decreasing in N");
  if (scales.size() >= 3) {
    const RateFit fit = fit_rate(scales, means);
    report.fits.push_back({"bl_distance_vs_n", fit});
    const bool in = fit.slope >= spec.assertions.lln_slope_low && fit.slope <= spec.assertions.lln_slope_high;
    add(report, "lln_slope", in,
        "slope " + num(fit.slope) + " in [" + num(spec.assertions.lln_slope_low) + ", " +
            num(spec.assertions.lln_slope_high) + "]");
  }
  moment_check(spec, report, {"moment_psi"});
}

void summarize_martingale_report(const StudySpec& spec, StudyReport& report) {
  const auto& m = spec.martingale;
  const double w = spec.assertions.se_window;
  const double t = m.base.horizon;
  bool mean_ok = true, ratio_ok = true, var_ok = true;
  std::string mean_detail, ratio_detail, var_detail;
  std::vector<double> variances;
  for (const std::size_t n : m.sizes) {
    const auto nn = static_cast<long long>(n);
    const auto res = values_of(report, "martingale_residual", nn);
    const auto qv = values_of(report, "quadratic_variation", nn);
    const SampleSummary rs = summarize(res);
    const SampleSummary qs = summarize(qv);
    const double var = rs.sd * rs.sd;
    variances.push_back(var);
    report.statistics.push_back({"martingale_mean", nn, 0.0, t, rs.count, rs.mean, rs.se});
    report.statistics.push_back({"martingale_variance", nn, 0.0, t, rs.count, var, 0.0});
    report.statistics.push_back({"quadratic_variation_mean", nn, 0.0, t, qs.count, qs.mean, qs.se});
    const double ratio = qs.mean > 0.0 ? var / qs.mean : INFINITY;
    report.statistics.push_back({"qv_ratio", nn, 0.0, t, rs.count, ratio, 0.0});
    if (!(std::abs(rs.mean) <= w * rs.se)) {
      mean_ok = false;
      mean_detail += "N=" + std::to_string(n) + " mean " + num(rs.mean) + " se " + num(rs.se) + "; ";
    }
    if (!(ratio >= spec.assertions.qv_ratio_low && ratio <= spec.assertions.qv_ratio_high)) {
      ratio_ok = false;
      ratio_detail += "N=" + std::to_string(n) + " ratio " + num(ratio) + "; ";
    }
  }
  add(report, "martingale_mean_zero", mean_ok, mean_ok ? "|mean M_f(T)| within " + num(w) + " SE" : mean_detail);
  add(report, "qv_ratio", ratio_ok, ratio_ok ? "Var M_f(T) / E [M_f]_N(T) within range" : ratio_detail);
  if (m.sizes.size() >= 2) {
    for (std::size_t k = 0; k + 1 < m.sizes.size(); ++k) {
      const double scale = static_cast<double>(m.sizes[k + 1]) / static_cast<double>(m.sizes[k]) / 4.0;
      const double ratio = variances[k + 1] > 0.0 ? variances[k] / variances[k + 1] : INFINITY;
      report.statistics.push_back({"variance_ratio", static_cast<long long>(m.sizes[k]), 0.0, t, 0, ratio, 0.0});
      const double lo = spec.assertions.variance_ratio_low * scale;
      const double hi = spec.assertions.variance_ratio_high * scale;
      if (!(ratio >= lo && ratio <= hi)) {
        var_ok = false;
        var_detail += std::to_string(m.sizes[k]) + "/" + std::to_string(m.sizes[k + 1]) + " ratio " + num(ratio) +
                      " outside [" + num(lo) + ", " + num(hi) + "]; ";
      }
    }
    add(report, "variance_ratio", var_ok, var_ok ? "variance scales like 1/N" : var_detail);
  }
  moment_check(spec, report, {"moment_psi"});
}

void summarize_twoscale_report(const StudySpec& spec, StudyReport& report) {
  const auto& s = spec.twoscale;
  const double w = spec.assertions.se_window;
  const std::size_t nf = s.functions.empty() ? 1 : s.functions.size();
  std::vector<double> residual_means, diffs, diff_se, gaps, gap_se;
  for (const double eps : s.epsilons) {
    std::vector<double> absr;
    for (const double v : values_of(report, "operator_residual", -1, eps)) absr.push_back(std::abs(v));
    const Statistic r = stat_of("operator_residual_abs", -1, eps, s.horizon, absr);
    report.statistics.push_back(r);
    residual_means.push_back(r.value);
    for (std::size_t f = 0; f < nf; ++f) {
      const auto fl = static_cast<long long>(f);
      const Statistic fast = stat_of("fast_mean", fl, eps, s.horizon, values_of(report, "fast_value", fl, eps));
      const Statistic avg = stat_of("averaged_mean", fl, 0.0, s.horizon, values_of(report, "averaged_value", fl));
      report.statistics.push_back(fast);
      const double d = std::abs(fast.value - avg.value);
      const double dse = std::hypot(fast.se, avg.se);
      report.statistics.push_back({"difference", fl, eps, s.horizon, fast.count, d, dse});
      if (f == 0) {
        diffs.push_back(d);
        diff_se.push_back(dse);
      }
      if (s.control) {
        const Statistic ctl = stat_of("control_mean", fl, 0.0, s.horizon, values_of(report, "control_value", fl));
        const double g = std::abs(fast.value - ctl.value);
        const double gse = std::hypot(fast.se, ctl.se);
        report.statistics.push_back({"control_gap", fl, eps, s.horizon, fast.count, g, gse});
        if (f == 0) {
          gaps.push_back(g);
          gap_se.push_back(gse);
        }
      }
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const auto fl = static_cast<long long>(f);
    report.statistics.push_back(stat_of("averaged_mean", fl, 0.0, s.horizon, values_of(report, "averaged_value", fl)));
    if (s.control) {
      report.statistics.push_back(stat_of("control_mean", fl, 0.0, s.horizon, values_of(report, "control_value", fl)));
    }
  }

  bool dec = true;
  for (std::size_t k = 1; k < residual_means.size(); ++k) dec = dec && residual_means[k] < residual_means[k - 1];
  std::string series;
  for (const double v : residual_means) series += num(v) + " ";
  add(report, "operator_residual_decreasing", dec, "E|residual(T)| per eps: " + series);

  // nonincreasing up to the statistical resolution of each comparison
  bool nonincreasing = true;
  std::string dseries;
  for (std::size_t k = 0; k < diffs.size(); ++k) {
    dseries += num(diffs[k]) + "(" + num(diff_se[k]) + ") ";
    if (k > 0 && diffs[k] > diffs[k - 1] + w * std::hypot(diff_se[k], diff_se[k - 1])) nonincreasing = false;
  }
  add(report, "difference_nonincreasing", nonincreasing, "|fast - averaged| (se) per eps: " + dseries);
  if (!diffs.empty()) {
    const bool small = diffs.back() <= w * diff_se.back();
    add(report, "difference_within_se", small,
        "smallest eps: " + num(diffs.back()) + " vs " + num(w) + " SE = " + num(w * diff_se.back()));
  }
  if (!gaps.empty()) {
    const bool detected = gaps.back() > w * gap_se.back();
    add(report, "control_detected", detected,
        "sigma-averaged control gap " + num(gaps.back()) + " vs " + num(w) + " SE = " + num(w * gap_se.back()));
  }
  moment_check(spec, report, {"moment_fast", "moment_averaged", "moment_control"});
}

void summarize_chain_report(const StudySpec& spec, StudyReport& report) {
  const auto& c = spec.chain;
  const double w = spec.assertions.se_window;
  const std::size_t m = c.q.size();

  double total = 0.0;
  std::vector<double> counts(m);
  for (std::size_t s = 0; s < m; ++s) {
    counts[s] = sum_of(report, "marginal_count", static_cast<long long>(s));
    total += counts[s];
  }
  if (total > 0.0) {
    const Eigen::MatrixXd p = transition_matrix(c.q, c.time);
    double tv = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      const double exact = p(c.initial, static_cast<Eigen::Index>(s));
      report.statistics.push_back({"marginal", static_cast<long long>(s), 0.0, c.time,
                                   static_cast<std::size_t>(total), counts[s] / total, 0.0});
      tv += std::abs(counts[s] / total - exact);
    }
    tv *= 0.5;
    report.statistics.push_back({"tv_distance", -1, 0.0, c.time, static_cast<std::size_t>(total), tv, 0.0});
    add(report, "tv_distance", tv <= spec.assertions.tv_threshold,
        "TV " + num(tv) + " vs threshold " + num(spec.assertions.tv_threshold));
  }

  std::vector<double> holding;
  for (const auto& r : report.replicas) {
    if (!r.ok) continue;
    for (const auto& rec : r.records) {
      if (rec.metric == "holding_time") holding.push_back(rec.value);
    }
  }
  if (!holding.empty()) {
    const double rate = c.q.exit_rate(static_cast<std::size_t>(c.initial));
    const std::size_t n = holding.size();
    const double d = ks_statistic(std::move(holding), [rate](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x); });
    const double p = ks_pvalue(d, n);
    report.statistics.push_back({"ks_statistic", -1, 0.0, 0.0, n, d, 0.0});
    report.statistics.push_back({"ks_pvalue", -1, 0.0, 0.0, n, p, 0.0});
    add(report, "holding_ks", p >= spec.assertions.ks_level,
        "KS p-value " + num(p) + " vs level " + num(spec.assertions.ks_level));
  }

  const double paths = sum_of(report, "martingale_paths");
  if (paths > 1.0) {
    bool mean_ok = true, gap_ok = true;
    std::string detail;
    auto pooled = [&](const char* s1, const char* s2, long long pair) {
      const double s = sum_of(report, s1, pair);
      const double ss = sum_of(report, s2, pair);
      const double mean = s / paths;
      const double var = std::max(0.0, (ss - paths * mean * mean) / (paths - 1.0));
      return std::pair{mean, std::sqrt(var / paths)};
    };
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        const auto pair = static_cast<long long>(i * m + j);
        const auto [mm, mse] = pooled("martingale_sum", "martingale_sumsq", pair);
        const auto [gm, gse] = pooled("gap_sum", "gap_sumsq", pair);
        const auto cnt = static_cast<std::size_t>(paths);
        report.statistics.push_back({"martingale_mean", pair, 0.0, c.martingale_time, cnt, mm, mse});
        report.statistics.push_back({"martingale_gap", pair, 0.0, c.martingale_time, cnt, gm, gse});
        if (!(std::abs(mm) <= w * mse)) {
          mean_ok = false;
          detail += "M" + std::to_string(i) + std::to_string(j) + " mean " + num(mm) + " se " + num(mse) + "; ";
        }
        if (!(std::abs(gm) <= w * gse)) {
          gap_ok = false;
          detail += "M" + std::to_string(i) + std::to_string(j) + " gap " + num(gm) + " se " + num(gse) + "; ";
        }
      }
    }
    add(report, "martingale_mean_zero", mean_ok, mean_ok ? "every pair within " + num(w) + " SE" : detail);
    add(report, "martingale_square_compensated", gap_ok, gap_ok ? "every pair within " + num(w) + " SE" : detail);
  }

  if (c.occupation) {
    std::vector<double> eps, means;
    for (const double e : c.occupation_spec.epsilons) {
      std::vector<double> v;
      for (const auto& r : report.replicas) {
        if (!r.ok) continue;
        for (const auto& rec : r.records) {
          if (rec.metric == "occupation_residual" && rec.epsilon == e) v.push_back(std::abs(rec.value));
        }
      }
      const Statistic st = stat_of("occupation_abs", c.occupation_spec.flat_state, e, c.occupation_spec.horizon, v);
      report.statistics.push_back(st);
      eps.push_back(e);
      means.push_back(st.value);
    }
    bool dec = true;
    for (std::size_t k = 1; k < means.size(); ++k) dec = dec && means[k] < means[k - 1];
    std::string series;
    for (const double v : means) series += num(v) + " ";
    add(report, "occupation_decreasing", dec, "E|residual(T)| per eps: " + series);
    if (means.size() >= 3 && std::all_of(means.begin(), means.end(), [](double v) { return v > 0.0; })) {
      const RateFit fit = fit_rate(eps, means);
      report.fits.push_back({"occupation_vs_epsilon", fit});
      add(report, "occupation_slope",
          fit.slope >= spec.assertions.occupation_slope_low && fit.slope <= spec.assertions.occupation_slope_high,
          "slope " + num(fit.slope) + " in [" + num(spec.assertions.occupation_slope_low) + ", " +
              num(spec.assertions.occupation_slope_high) + "]");
    }
  }
}

}  // namespace

std::vector<Record> run_replica(const StudySpec& spec, std::size_t replica) {
  switch (spec.kind) {
    case StudyKind::Lln: return lln_records(spec, replica);
    case StudyKind::Martingale: return martingale_records(spec, replica);
    case StudyKind::TwoScale: return twoscale_records(spec, replica);
    case StudyKind::ChainChecks: return chain_records(spec, replica);
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown study kind");
}

void summarize_report(const StudySpec& spec, StudyReport& report) {
  report.statistics.clear();
  report.fits.clear();
  report.assertions.clear();
  switch (spec.kind) {
    case StudyKind::Lln: summarize_lln_report(spec, report); break;
    case StudyKind::Martingale: summarize_martingale_report(spec, report); break;
    case StudyKind::TwoScale: summarize_twoscale_report(spec, report); break;
    case StudyKind::ChainChecks: summarize_chain_report(spec, report); break;
  }
  std::size_t failed = 0;
  std::string first;
  for (const auto& r : report.replicas) {
    if (!r.ok && failed++ == 0) first = r.error;
  }
  report.degraded = failed > 0;
  add(report, "replicas_ok", failed == 0,
      failed == 0 ? "all " + std::to_string(report.replicas.size()) + " replicas completed"
                  : std::to_string(failed) + " replicas failed, first: " + first);
}

}  // namespace mfswitch
