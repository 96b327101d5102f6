#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include <mfswitch/io.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace mfswitch;
using namespace mfswitch::cli;

namespace {

const char* kMinimal = R"({
  "model": {"name": "mean-reverting-switch", "dim": 1, "interaction": [1, 2], "noise": [0.5, 1]},
  "chain": {"generator": [[-1, 1], [1, -1]]},
  "study": {"sizes": [16, 32, 64], "reference": 1024}
})";

std::filesystem::path scratch(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / "mfswitch-cli-test" / name;
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

int invoke(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = run(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults", "[cli]") {
  const auto cfg = parse_config(kMinimal, Command::Lln);
  CHECK(cfg.sim.dt == 1e-3);
  CHECK(cfg.study.replicas == 20);
  CHECK(cfg.study.kind == StudyKind::Lln);
  CHECK(cfg.q.size() == 2);
}

TEST_CASE("schema violations are collected", "[cli]") {
  try {
    (void)parse_config(R"({"modell": {}, "chain": {"generator": [[-1, -1], [1, -1]]}, "sim": {"dt": -1}})", Command::Lln);
    FAIL("expected SchemaViolation");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ErrorKind::SchemaViolation);
    REQUIRE(e.issues().size() >= 3);
    bool hint = false, gen = false, dt = false;
    for (const auto& i : e.issues()) {
      hint = hint || (i.key == "modell" && i.reason.find("did you mean 'model'") != std::string::npos);
      gen = gen || i.key.rfind("chain.generator", 0) == 0;
      dt = dt || i.key == "sim.dt";
    }
    CHECK(hint);
    CHECK(gen);
    CHECK(dt);
  }
}

TEST_CASE("malformed JSON reports line and column", "[cli]") {
  try {
    (void)parse_config("{\n  \"model\": {,\n}", Command::Lln);
    FAIL("expected ParseError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(edit_distance("modell", "model") == 1);
  CHECK(edit_distance("", "abc") == 3);
}

TEST_CASE("exit codes", "[cli]") {
  const auto dir = scratch("exit");
  write_file_atomic(dir / "bad.json", R"({"modell": {}})");
  write_file_atomic(dir / "broken.json", "{");
  CHECK(invoke({"lln", "--config", (dir / "bad.json").string()}) == 2);
  CHECK(invoke({"lln", "--config", (dir / "broken.json").string()}) == 2);
  CHECK(invoke({"lln", "--config", (dir / "missing.json").string()}) == 2);
  CHECK(invoke({"nonsense"}) == 2);
  CHECK(invoke({"lln"}) == 2);
  std::string out;
  CHECK(invoke({"--help"}, &out) == 0);
  CHECK(out.find("chain-check") != std::string::npos);
}

TEST_CASE("metrics on identical and different files", "[cli]") {
  const auto dir = scratch("metrics");
  write_file_atomic(dir / "a.csv", "weight,x0\n0.5,0\n0.5,1\n");
  write_file_atomic(dir / "b.csv", "x0\n0\n3\n");
  std::string out;
  CHECK(invoke({"metrics", (dir / "a.csv").string(), (dir / "a.csv").string()}, &out) == 0);
  CHECK(out.find("bl,0") != std::string::npos);
  CHECK(invoke({"metrics", (dir / "a.csv").string(), (dir / "b.csv").string()}, &out) == 0);
  CHECK(out.find("bl,1") != std::string::npos);
  CHECK(invoke({"metrics", (dir / "a.csv").string(), (dir / "nope.csv").string()}) == 2);
}

TEST_CASE("simulate writes a provenance block and is reproducible", "[cli]") {
  const auto dir = scratch("simulate");
  write_file_atomic(dir / "sim.json", R"({
    "model": {"name": "mean-reverting-switch", "dim": 1, "interaction": [1, 2], "noise": [0.5, 1]},
    "chain": {"generator": [[-1, 1], [1, -1]]},
    "sim": {"particles": 20, "dt": 0.01, "checkpoints": [0, 0.5, 1]},
    "output": {"dir": ")" + (dir / "o").string() + R"("}
  })");
  std::string a, b;
  CHECK(invoke({"simulate", "--config", (dir / "sim.json").string(), "--seed", "7"}, &a) == 0);
  const auto first = read_file(dir / "o" / "simulate" / "trajectory.csv");
  CHECK(invoke({"simulate", "--config", (dir / "sim.json").string(), "--seed", "7"}, &b) == 0);
  CHECK(a == b);
  CHECK(read_file(dir / "o" / "simulate" / "trajectory.csv") == first);
  const auto summary = read_file(dir / "o" / "simulate" / "summary.json");
  CHECK(summary.find("config_hash") != std::string::npos);
  CHECK(summary.find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("chain-check on a symmetric chain passes", "[cli]") {
  const auto dir = scratch("chain");
  write_file_atomic(dir / "c.json", R"({
    "chain": {"generator": [[-1, 1], [1, -1]]},
    "study": {"replicas": 4, "seed": 3}
  })");
  std::string out;
  CHECK(invoke({"chain-check", "--config", (dir / "c.json").string(), "--out", (dir / "o").string()}, &out) == 0);
  CHECK(out.find("PASS tv_distance") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "o" / "chain-check" / "summary.json"));
  CHECK(std::filesystem::exists(dir / "o" / "chain-check" / "statistics.csv"));
}

TEST_CASE("study output does not depend on threads", "[cli]") {
  const auto dir = scratch("threads");
  write_file_atomic(dir / "l.json", R"({
    "model": {"name": "mean-reverting-switch", "dim": 1, "interaction": [1, 2], "noise": [0.5, 1]},
    "chain": {"generator": [[-1, 1], [1, -1]]},
    "sim": {"dt": 0.01},
    "study": {"replicas": 3, "sizes": [16, 32, 64], "reference": 64, "reference_floor": 64}
  })");
  std::string one, four;
  const int c1 = invoke({"lln", "--config", (dir / "l.json").string(), "--threads", "1", "--seed", "7",
                         "--format", "json", "--out", (dir / "a").string()}, &one);
  const int c4 = invoke({"lln", "--config", (dir / "l.json").string(), "--threads", "4", "--seed", "7",
                         "--format", "json", "--out", (dir / "b").string()}, &four);
  CHECK(c1 == c4);
  CHECK(one == four);
  for (int k = 0; k < 3; ++k) {
    const std::string f = "replica-" + std::to_string(k) + ".csv";
    CHECK(read_file(dir / "a" / "lln" / f) == read_file(dir / "b" / "lln" / f));
  }
}
