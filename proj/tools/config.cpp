#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include <mfswitch/io.hpp>
#include <mfswitch/models.hpp>
#include <mfswitch/test_functions.hpp>

namespace mfswitch::cli {

using nlohmann::json;

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

class Reader {
 public:
  std::vector<SchemaIssue> issues;

  void issue(std::string key, std::string reason) { issues.push_back({std::move(key), std::move(reason)}); }

  void allow(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    for (const auto& [k, v] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) != keys.end()) continue;
      std::string_view best;
      std::size_t dist = std::numeric_limits<std::size_t>::max();
      for (const auto cand : keys) {
        const std::size_t d = edit_distance(k, cand);
        if (d < dist) {
          dist = d;
          best = cand;
        }
      }
      std::string reason = "unknown key";
      if (!best.empty() && dist <= std::max<std::size_t>(2, best.size() / 3)) {
        reason += "; did you mean '" + join(path, best) + "'?";
      }
      issue(join(path, k), reason);
    }
  }

  const json* object(const json& parent, const std::string& path, std::string_view key, bool required) {
    const std::string k(key);
    if (!parent.contains(k)) {
      if (required) issue(join(path, key), "required section is missing");
      return nullptr;
    }
    const json& v = parent.at(k);
    if (!v.is_object()) {
      issue(join(path, key), "must be an object");
      return nullptr;
    }
    return &v;
  }

  double number(const json& obj, const std::string& path, std::string_view key, double def, double lo = -kInf,
                double hi = kInf, bool open_low = false) {
    const std::string k(key);
    if (!obj.contains(k)) return def;
    const json& v = obj.at(k);
    if (!v.is_number()) {
      issue(join(path, key), "must be a number");
      return def;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi || (open_low && x == lo)) {
      std::ostringstream os;
      os << "value " << x << " outside " << (open_low ? "(" : "[") << lo << ", " << hi << "]";
      issue(join(path, key), os.str());
      return def;
    }
    return x;
  }

  std::uint64_t unsigned_number(const json& obj, const std::string& path, std::string_view key, std::uint64_t def,
                                std::uint64_t min = 0) {
    const std::string k(key);
    if (!obj.contains(k)) return def;
    const json& v = obj.at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      issue(join(path, key), "must be a nonnegative integer");
      return def;
    }
    const auto x = v.get<std::uint64_t>();
    if (x < min) {
      issue(join(path, key), "must be at least " + std::to_string(min));
      return def;
    }
    return x;
  }

  int integer(const json& obj, const std::string& path, std::string_view key, int def) {
    return static_cast<int>(unsigned_number(obj, path, key, static_cast<std::uint64_t>(def)));
  }

  bool boolean(const json& obj, const std::string& path, std::string_view key, bool def) {
    const std::string k(key);
    if (!obj.contains(k)) return def;
    if (!obj.at(k).is_boolean()) {
      issue(join(path, key), "must be true or false");
      return def;
    }
    return obj.at(k).get<bool>();
  }

  std::string text(const json& obj, const std::string& path, std::string_view key, std::string def,
                   std::initializer_list<std::string_view> allowed = {}) {
    const std::string k(key);
    if (!obj.contains(k)) return def;
    if (!obj.at(k).is_string()) {
      issue(join(path, key), "must be a string");
      return def;
    }
    std::string s = obj.at(k).get<std::string>();
    if (allowed.size() > 0 && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      issue(join(path, key), "'" + s + "' is not one of: " + list);
      return def;
    }
    return s;
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& path, std::string_view key) {
    const std::string k(key);
    if (!obj.contains(k)) return std::nullopt;
    const json& v = obj.at(k);
    if (!v.is_array()) {
      issue(join(path, key), "must be an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        issue(join(path, key), "must be an array of finite numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<std::vector<std::size_t>> counts(const json& obj, const std::string& path, std::string_view key) {
    const auto v = numbers(obj, path, key);
    if (!v) return std::nullopt;
    std::vector<std::size_t> out;
    for (const double x : *v) {
      if (x < 1 || x != std::floor(x)) {
        issue(join(path, key), "must hold positive integers");
        return std::nullopt;
      }
      out.push_back(static_cast<std::size_t>(x));
    }
    return out;
  }

  std::optional<Eigen::MatrixXd> matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) {
      issue(where, "must be a non-empty array of rows");
      return std::nullopt;
    }
    const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_array() || v[i].size() != cols || cols == 0) {
        issue(where, "rows must be arrays of equal length");
        return std::nullopt;
      }
      for (std::size_t j = 0; j < cols; ++j) {
        if (!v[i][j].is_number()) {
          issue(where, "entries must be numbers");
          return std::nullopt;
        }
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
      }
    }
    return m;
  }

  std::optional<Eigen::MatrixXd> matrix(const json& obj, const std::string& path, std::string_view key,
                                        bool required) {
    const std::string k(key);
    if (!obj.contains(k)) {
      if (required) issue(join(path, key), "required matrix is missing");
      return std::nullopt;
    }
    return matrix(obj.at(k), join(path, key));
  }

  std::optional<GeneratorMatrix> generator(const Eigen::MatrixXd& m, const std::string& where) {
    try {
      return validate_generator(m);
    } catch (const Error& e) {
      issue(where, std::string("generator rule violated (off-diagonal rates >= 0, rows sum to 0): ") + e.what());
      return std::nullopt;
    }
  }
};

ModelPtr read_model(Reader& r, const json& m) {
  const std::string p = "model";
  r.allow(m, p, {"name", "dim", "interaction", "confinement", "shift", "noise", "strength"});
  const std::string name = r.text(m, p, "name", "", {"mean-reverting-switch", "kernel-interaction"});
  if (!m.contains("name")) r.issue("model.name", "required; one of mean-reverting-switch, kernel-interaction");
  const auto dim = static_cast<std::size_t>(r.unsigned_number(m, p, "dim", 1, 1));
  try {
    if (name == "mean-reverting-switch") {
      MeanRevertingParams params;
      params.dim = dim;
      params.interaction = r.numbers(m, p, "interaction").value_or(std::vector<double>{});
      params.confinement = r.numbers(m, p, "confinement").value_or(std::vector<double>{});
      params.shift = r.numbers(m, p, "shift").value_or(std::vector<double>{});
      params.noise = r.numbers(m, p, "noise").value_or(std::vector<double>{});
      if (m.contains("strength")) r.issue("model.strength", "only used by kernel-interaction");
      return make_mean_reverting(params);
    }
    if (name == "kernel-interaction") {
      KernelInteractionParams params;
      params.dim = dim;
      params.strength = r.numbers(m, p, "strength").value_or(std::vector<double>{});
      params.noise = r.numbers(m, p, "noise").value_or(std::vector<double>{});
      for (const char* k : {"interaction", "confinement", "shift"}) {
        if (m.contains(k)) r.issue(join(p, k), "only used by mean-reverting-switch");
      }
      return make_kernel_interaction(params);
    }
  } catch (const Error& e) {
    r.issue(p, e.what());
  }
  return nullptr;
}

InitialCondition read_initial(Reader& r, const json& v, const std::string& p) {
  InitialCondition ic;
  r.allow(v, p, {"kind", "points", "mean", "stddev", "low", "high"});
  const std::string kind = r.text(v, p, "kind", "gaussian", {"gaussian", "uniform", "points"});
  ic.kind = kind == "uniform" ? InitialCondition::Kind::Uniform
            : kind == "points" ? InitialCondition::Kind::Points
                               : InitialCondition::Kind::Gaussian;
  ic.points = r.numbers(v, p, "points").value_or(std::vector<double>{});
  ic.mean = r.number(v, p, "mean", 0.0);
  ic.stddev = r.number(v, p, "stddev", 1.0, 0.0);
  ic.low = r.number(v, p, "low", -1.0);
  ic.high = r.number(v, p, "high", 1.0);
  if (ic.kind == InitialCondition::Kind::Points && ic.points.empty()) r.issue(join(p, "points"), "required for kind points");
  if (ic.kind == InitialCondition::Kind::Uniform && !(ic.low < ic.high)) r.issue(p, "uniform needs low < high");
  return ic;
}

TestFunctionBundle read_function(Reader& r, const json& v, const std::string& p, std::size_t dim) {
  if (!v.is_object()) {
    r.issue(p, "must be an object");
    return psi_function(dim);
  }
  r.allow(v, p, {"kind", "centres", "radius", "amplitude", "index", "value"});
  const std::string kind = r.text(v, p, "kind", "psi", {"psi", "bump", "coordinate", "constant"});
  try {
    if (kind == "bump") {
      auto centres = r.numbers(v, p, "centres").value_or(std::vector<double>(dim, 0.0));
      return bump_function(dim, std::move(centres), r.number(v, p, "radius", 2.0, 0.0, kInf, true),
                           r.number(v, p, "amplitude", 1.0));
    }
    if (kind == "coordinate") {
      const auto k = r.unsigned_number(v, p, "index", 0);
      if (k >= dim) {
        r.issue(join(p, "index"), "coordinate index beyond the dimension");
        return psi_function(dim);
      }
      return coordinate_function(dim, static_cast<std::size_t>(k));
    }
    if (kind == "constant") return constant_function(dim, r.number(v, p, "value", 1.0));
  } catch (const Error& e) {
    r.issue(p, e.what());
  }
  return psi_function(dim);
}

BlOptions read_bl(Reader& r, const json& v, const std::string& p) {
  BlOptions o;
  r.allow(v, p, {"method", "support_cap", "initial_neighbors", "max_iterations"});
  const std::string m = r.text(v, p, "method", "auto", {"auto", "simplex", "chain1d"});
  o.method = m == "simplex" ? BlMethod::Simplex : m == "chain1d" ? BlMethod::Chain1d : BlMethod::Auto;
  o.support_cap = static_cast<std::size_t>(r.unsigned_number(v, p, "support_cap", o.support_cap, 2));
  o.initial_neighbors = static_cast<std::size_t>(r.unsigned_number(v, p, "initial_neighbors", o.initial_neighbors));
  o.max_iterations = static_cast<std::size_t>(r.unsigned_number(v, p, "max_iterations", o.max_iterations, 1));
  return o;
}

AssertionSettings read_assertions(Reader& r, const json& v, const std::string& p) {
  AssertionSettings a;
  r.allow(v, p,
          {"se_window", "lln_slope", "qv_ratio", "variance_ratio", "tv_threshold", "ks_level", "occupation_slope",
           "moment_factor"});
  a.se_window = r.number(v, p, "se_window", a.se_window, 0.0, kInf, true);
  a.tv_threshold = r.number(v, p, "tv_threshold", a.tv_threshold, 0.0, 1.0);
  a.ks_level = r.number(v, p, "ks_level", a.ks_level, 0.0, 1.0);
  a.moment_factor = r.number(v, p, "moment_factor", a.moment_factor, 0.0, kInf, true);
  auto range = [&](const char* key, double& lo, double& hi) {
    const auto v2 = r.numbers(v, p, key);
    if (!v2) return;
    if (v2->size() != 2 || (*v2)[0] > (*v2)[1]) {
      r.issue(join(p, key), "must be [low, high] with low <= high");
      return;
    }
    lo = (*v2)[0];
    hi = (*v2)[1];
  };
  range("lln_slope", a.lln_slope_low, a.lln_slope_high);
  range("qv_ratio", a.qv_ratio_low, a.qv_ratio_high);
  range("variance_ratio", a.variance_ratio_low, a.variance_ratio_high);
  range("occupation_slope", a.occupation_slope_low, a.occupation_slope_high);
  return a;
}

StudyKind kind_of(Command c) {
  switch (c) {
    case Command::Lln: return StudyKind::Lln;
    case Command::Martingale: return StudyKind::Martingale;
    case Command::TwoScale: return StudyKind::TwoScale;
    case Command::ChainCheck: return StudyKind::ChainChecks;
    case Command::Simulate: break;
  }
  return StudyKind::Lln;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Lln: return "lln";
    case Command::Martingale: return "martingale";
    case Command::TwoScale: return "twoscale";
    case Command::ChainCheck: return "chain-check";
  }
  return "";
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte > 0 ? byte - 1 : 0, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ParsedConfig parse_config(std::string_view text, Command command) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::string what = e.what();
    // drop the library's own prefix and position, keep the reason
    const auto at = what.find("column ");
    const auto colon = at == std::string::npos ? std::string::npos : what.find(": ", at);
    throw ConfigError(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                                                 ": " + (colon == std::string::npos ? what : what.substr(colon + 2)));
  }
  Reader r;
  ParsedConfig cfg;
  if (!doc.is_object()) {
    throw ConfigError(ErrorKind::SchemaViolation, "top level must be an object", {{"", "top level must be an object"}});
  }
  r.allow(doc, "", {"model", "chain", "twoscale", "sim", "study", "output"});

  const bool needs_model = command != Command::ChainCheck;
  ModelPtr model;
  if (const json* m = r.object(doc, "", "model", needs_model)) model = read_model(r, *m);

  // chain
  if (const json* c = r.object(doc, "", "chain", false)) {
    r.allow(*c, "chain", {"generator", "initial"});
    if (auto m = r.matrix(*c, "chain", "generator", true)) {
      if (auto q = r.generator(*m, "chain.generator")) {
        cfg.q = *q;
        cfg.has_chain = true;
      }
    }
    cfg.initial_regime = r.integer(*c, "chain", "initial", 0);
    if (cfg.has_chain && static_cast<std::size_t>(cfg.initial_regime) >= cfg.q.size()) {
      r.issue("chain.initial", "state outside the generator");
    }
  }

  // twoscale
  std::vector<double> epsilons;
  int flat_initial = 0, flat_state = 0;
  if (const json* t = r.object(doc, "", "twoscale", command == Command::TwoScale)) {
    r.allow(*t, "twoscale", {"blocks", "slow", "epsilon", "epsilons", "initial", "flat_state"});
    std::vector<GeneratorMatrix> blocks;
    bool ok = true;
    if (!t->contains("blocks") || !t->at("blocks").is_array() || t->at("blocks").empty()) {
      r.issue("twoscale.blocks", "required: a non-empty array of block generators");
      ok = false;
    } else {
      for (std::size_t b = 0; b < t->at("blocks").size(); ++b) {
        const std::string where = "twoscale.blocks[" + std::to_string(b) + "]";
        auto m = r.matrix(t->at("blocks")[b], where);
        auto q = m ? r.generator(*m, where) : std::nullopt;
        if (q) blocks.push_back(*q);
        else ok = false;
      }
    }
    auto slow = r.matrix(*t, "twoscale", "slow", true);
    const double eps = r.number(*t, "twoscale", "epsilon", 1.0, 0.0, kInf, true);
    epsilons = r.numbers(*t, "twoscale", "epsilons").value_or(std::vector<double>{});
    flat_initial = r.integer(*t, "twoscale", "initial", 0);
    flat_state = r.integer(*t, "twoscale", "flat_state", 0);
    if (ok && slow) {
      try {
        cfg.twoscale = TwoScaleSpec(blocks, *slow, eps);
        (void)build_fast_generator(cfg.twoscale);
        cfg.has_twoscale = true;
      } catch (const Error& e) {
        r.issue("twoscale", e.what());
      }
    }
    if (command == Command::TwoScale && epsilons.empty()) r.issue("twoscale.epsilons", "required for twoscale");
  }

  // sim
  SimConfig sim;
  sim.model = model;
  if (const json* s = r.object(doc, "", "sim", false)) {
    r.allow(*s, "sim", {"particles", "horizon", "dt", "initial", "checkpoints", "record_every_step"});
    sim.particles = static_cast<std::size_t>(r.unsigned_number(*s, "sim", "particles", sim.particles, 1));
    sim.horizon = r.number(*s, "sim", "horizon", 1.0, 0.0, kInf, true);
    sim.dt = r.number(*s, "sim", "dt", 1e-3, 0.0, kInf, true);
    if (sim.dt > sim.horizon) r.issue("sim.dt", "must not exceed the horizon");
    if (const json* ic = r.object(*s, "sim", "initial", false)) sim.initial = read_initial(r, *ic, "sim.initial");
    sim.checkpoints = r.numbers(*s, "sim", "checkpoints").value_or(std::vector<double>{});
    for (const double t : sim.checkpoints) {
      if (t < 0.0 || t > sim.horizon) {
        r.issue("sim.checkpoints", "checkpoints must lie in [0, horizon]");
        break;
      }
    }
    sim.record_every_step = r.boolean(*s, "sim", "record_every_step", false);
  }
  cfg.sim = sim;

  if (model) {
    if ((command == Command::Simulate || command == Command::Lln || command == Command::Martingale) && !cfg.has_chain &&
        !doc.contains("chain")) {
      r.issue("chain", "required section is missing");
    }
    if (cfg.has_chain && cfg.q.size() != model->regimes() &&
        (command == Command::Simulate || command == Command::Lln || command == Command::Martingale)) {
      r.issue("chain.generator", "has " + std::to_string(cfg.q.size()) + " states but the model has " +
                                     std::to_string(model->regimes()) + " regimes");
    }
    if (cfg.has_twoscale && command == Command::TwoScale && cfg.twoscale.states() != model->regimes()) {
      r.issue("twoscale.blocks", "have " + std::to_string(cfg.twoscale.states()) + " states in total but the model has " +
                                     std::to_string(model->regimes()) + " regimes");
    }
  }
  if (command == Command::ChainCheck && !doc.contains("chain") && !doc.contains("twoscale")) {
    r.issue("chain", "chain-check needs a chain or a twoscale section");
  }

  // study
  StudySpec& st = cfg.study;
  st.kind = kind_of(command);
  st.id = command_name(command);
  const json empty = json::object();
  const json* sp = r.object(doc, "", "study", false);
  const json& s = sp ? *sp : empty;
  r.allow(s, "study",
          {"kind", "id", "replicas", "seed", "threads", "sizes", "reference", "reference_floor", "time",
           "moment_times", "bl", "test_function", "functions", "fast_dt", "control", "chain_check", "assertions"});
  if (s.contains("kind")) {
    const std::string k = r.text(s, "study", "kind", "", {"lln", "martingale", "twoscale", "chain-checks"});
    if (!k.empty() && command != Command::Simulate && k != std::string(to_string(st.kind))) {
      r.issue("study.kind", "'" + k + "' does not match the '" + command_name(command) + "' command");
    }
  }
  st.id = r.text(s, "study", "id", st.id);
  st.replicas = static_cast<std::size_t>(r.unsigned_number(s, "study", "replicas", 20, 1));
  st.seed = r.unsigned_number(s, "study", "seed", 0);
  st.threads = static_cast<std::size_t>(r.unsigned_number(s, "study", "threads", 0));
  const auto moment_times = r.numbers(s, "study", "moment_times").value_or(std::vector<double>{});
  if (const json* a = r.object(s, "study", "assertions", false)) st.assertions = read_assertions(r, *a, "study.assertions");
  const std::size_t dim = model ? model->dim() : 1;

  switch (command) {
    case Command::Lln: {
      LlnSpec& l = st.lln;
      l.base = sim;
      l.q = cfg.q;
      l.initial_regime = cfg.initial_regime;
      l.sizes = r.counts(s, "study", "sizes").value_or(std::vector<std::size_t>{64, 256, 1024});
      l.reference = static_cast<std::size_t>(r.unsigned_number(s, "study", "reference", 8192, 1));
      l.reference_floor = static_cast<std::size_t>(r.unsigned_number(s, "study", "reference_floor", 1024));
      l.time = r.number(s, "study", "time", sim.horizon, 0.0, kInf, true);
      l.moment_times = moment_times;
      if (const json* b = r.object(s, "study", "bl", false)) l.bl = read_bl(r, *b, "study.bl");
      break;
    }
    case Command::Martingale: {
      MartingaleStudySpec& m = st.martingale;
      m.base = sim;
      m.q = cfg.q;
      m.initial_regime = cfg.initial_regime;
      m.sizes = r.counts(s, "study", "sizes").value_or(std::vector<std::size_t>{256, 1024});
      m.moment_times = moment_times;
      if (s.contains("test_function")) m.f = read_function(r, s.at("test_function"), "study.test_function", dim);
      break;
    }
    case Command::TwoScale: {
      TwoScaleExperimentSpec& t = st.twoscale;
      t.chain = cfg.twoscale;
      t.model = model;
      t.particles = sim.particles;
      t.epsilons = epsilons;
      t.horizon = sim.horizon;
      t.dt = sim.dt;
      t.fast_dt = r.numbers(s, "study", "fast_dt").value_or(std::vector<double>{});
      t.initial_state = flat_initial;
      t.initial = sim.initial;
      t.control = r.boolean(s, "study", "control", true);
      t.moment_times = moment_times;
      if (s.contains("functions")) {
        if (!s.at("functions").is_array()) {
          r.issue("study.functions", "must be an array of test functions");
        } else {
          for (std::size_t k = 0; k < s.at("functions").size(); ++k) {
            t.functions.push_back(
                read_function(r, s.at("functions")[k], "study.functions[" + std::to_string(k) + "]", dim));
          }
        }
      }
      if (s.contains("test_function")) {
        t.residual_function = read_function(r, s.at("test_function"), "study.test_function", dim);
      }
      break;
    }
    case Command::ChainCheck: {
      ChainCheckSpec& c = st.chain;
      if (cfg.has_chain) {
        c.q = cfg.q;
        c.initial = cfg.initial_regime;
      } else if (cfg.has_twoscale) {
        c.q = build_fast_generator(cfg.twoscale);
        c.initial = flat_initial;
      }
      if (const json* cc = r.object(s, "study", "chain_check", false)) {
        const std::string p = "study.chain_check";
        r.allow(*cc, p,
                {"time", "marginal_paths", "martingale_time", "martingale_paths", "occupation", "occupation_samples",
                 "occupation_horizon"});
        c.time = r.number(*cc, p, "time", c.time, 0.0);
        c.marginal_paths = static_cast<std::size_t>(r.unsigned_number(*cc, p, "marginal_paths", c.marginal_paths));
        c.martingale_time = r.number(*cc, p, "martingale_time", c.martingale_time, 0.0);
        c.martingale_paths = static_cast<std::size_t>(r.unsigned_number(*cc, p, "martingale_paths", c.martingale_paths));
        c.occupation = r.boolean(*cc, p, "occupation", cfg.has_twoscale);
        c.occupation_samples =
            static_cast<std::size_t>(r.unsigned_number(*cc, p, "occupation_samples", c.occupation_samples, 1));
        c.occupation_spec.horizon = r.number(*cc, p, "occupation_horizon", 1.0, 0.0, kInf, true);
      } else {
        c.occupation = cfg.has_twoscale;
      }
      if (c.occupation) {
        if (!cfg.has_twoscale) {
          r.issue("study.chain_check.occupation", "needs a twoscale section");
          c.occupation = false;
        } else {
          c.occupation_spec.chain = cfg.twoscale;
          c.occupation_spec.epsilons = epsilons;
          c.occupation_spec.initial_state = flat_initial;
          c.occupation_spec.flat_state = flat_state;
          if (epsilons.empty()) r.issue("twoscale.epsilons", "required for the occupation check");
        }
      }
      break;
    }
    case Command::Simulate: break;
  }

  if (const json* o = r.object(doc, "", "output", false)) {
    r.allow(*o, "output", {"dir", "format"});
    cfg.out = r.text(*o, "output", "dir", cfg.out.string());
    cfg.format = r.text(*o, "output", "format", cfg.format, {"csv", "json"});
  }
  st.out = cfg.out;
  st.config_text = std::string(text);

  if (r.issues.empty() && command != Command::Simulate) {
    try {
      st.validate();
    } catch (const Error& e) {
      r.issue("study", e.what());
    }
  } else if (r.issues.empty()) {
    try {
      cfg.sim.validate();
    } catch (const Error& e) {
      r.issue("sim", e.what());
    }
  }

  if (!r.issues.empty()) {
    std::string detail = std::to_string(r.issues.size()) + " schema violation(s)";
    for (const auto& i : r.issues) detail += "\n  " + (i.key.empty() ? std::string("<root>") : i.key) + ": " + i.reason;
    throw ConfigError(ErrorKind::SchemaViolation, detail, r.issues);
  }
  return cfg;
}

ParsedConfig parse_config_file(const std::filesystem::path& path, Command command) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(ErrorKind::Io, "cannot read config " + path.string());
  }
  return parse_config(text, command);
}

}  // namespace mfswitch::cli
