#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "cohspace/cli.hpp"
#include "doctest.h"

using namespace cohspace;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static int counter = 0;
  auto p = fs::temp_directory_path() / ("cohspace_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const auto p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

const json kTrivial2 = {{"kind", "trivial"}, {"dim", 2}};

// One valid config per command; kept small so the whole table runs quickly.
std::vector<std::pair<std::string, json>> valid_configs() {
  const json spin2 = {{"kind", "spin"}, {"exponent", 2}};
  return {
      {"kernel-eval", {{"space", kTrivial2}, {"z", {1, 0}}, {"z2", {0, 1}}}},
      {"kernel-gram", {{"space", spin2}, {"sample", 4}, {"seed", 7}}},
      {"kernel-check", {{"space", {{"kind", "klauder"}, {"modes", 1}}}, {"sample", 10}, {"seed", 3}}},
      {"qspace-build", {{"space", spin2}, {"sample", 6}, {"seed", 1}}},
      {"quantize", {{"space", spin2}, {"sample", 6}, {"generator", {{0, 1}, {1, 0}}}}},
      {"dyn-coherent",
       {{"space", {{"kind", "klauder"}, {"modes", 1}}},
        {"hamiltonian", {{0, 0}, {0, 1}}},
        {"z0", {1, {0.5, 0.2}}},
        {"t_span", {0, 2}},
        {"samples", 5}}},
      {"dyn-tdvp",
       {{"space", spin2},
        {"energy", {{"type", "spin_quadratic"}, {"n", 2}, {"a", {0.3, 0, 1}}}},
        {"z0", {0.8, {0.6, 0}}},
        {"t_span", {0, 1}},
        {"samples", 5}}},
      {"dyn-lyapunov", {{"protocol", "kicked_top"}, {"n", 10}, {"k", 3}, {"periods", 20}}},
      {"spec-solve", {{"model", {{"model", "oscillator"}, {"hbar_omega", 1}}}, {"interval", {0, 10}}}},
      {"lie-evolve",
       {{"algebra", "qubit"},
        {"hamiltonian", "s3"},
        {"rho", {{0.5, 0.5}, {0.5, 0.5}}},
        {"observables", {"s1", "s2", "s3"}},
        {"t_span", {0, 1}},
        {"samples", 5}}},
      {"causal-check",
       {{"triples", {{{"condition", "normal"}, {"j", {{0, 0, 1.0}}}, {"j2", {{0, 3, 0.5}}}}}}}},
  };
}

}  // namespace

TEST_CASE("kernel-eval on the trivial space") {
  const auto r = run({"kernel-eval", "--space", kTrivial2.dump(), "--z", "[1,0]", "--z2", "[0,1]", "--format", "json"});
  REQUIRE(r.code == kExitOk);
  const auto p = json::parse(r.out);
  CHECK(p["re"] == 0.0);
  CHECK(p["im"] == 0.0);
  const auto report = json::parse(r.err);
  CHECK(report["config"]["seed"] == 0);
  CHECK(report["command"] == "kernel-eval");
}

TEST_CASE("spec-solve oscillator CSV") {
  const auto r = run({"spec-solve", "--model", R"({"model":"oscillator","hbar_omega":1})", "--interval", "0,10"});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,E,residual");
  for (int n = 0; n < 10; ++n) {
    REQUIRE(std::getline(in, line));
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    CHECK(std::stoi(line.substr(0, c1)) == n);
    CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == doctest::Approx(n + 0.5).epsilon(1e-14));
  }
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("dyn-lyapunov kicked top report") {
  const auto dir = scratch();
  const auto out = dir / "ly.csv";
  const auto r = run({"dyn-lyapunov", "--set", "k=3", "--set", "n=20", "--set", "periods=200", "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  const auto report = json::parse(slurp(out.string() + ".report.json"));
  CHECK(report["summary"]["lambda_max"].get<double>() > 0.1);
  CHECK(report["config"]["seed"] == 0);
  CHECK(report["payload"] == out.string());
  fs::remove_all(dir);
}

TEST_CASE("every command runs and is deterministic") {
  const auto dir = scratch();
  for (const auto& [cmd, cfg] : valid_configs()) {
    CAPTURE(cmd);
    const auto path = write_config(dir, cmd + ".json", cfg);
    for (const char* fmt : {"csv", "json"}) {
      const auto a = dir / (cmd + "_a." + fmt), b = dir / (cmd + "_b." + fmt);
      const auto ra = run({cmd, "--config", path.string(), "--out", a.string(), "--format", fmt});
      INFO(ra.err);
      REQUIRE(ra.code == kExitOk);
      const auto rb = run({cmd, "--config", path.string(), "--out", b.string(), "--format", fmt});
      REQUIRE(rb.code == kExitOk);
      CHECK(slurp(a) == slurp(b));
      CHECK_FALSE(slurp(a).empty());
      CHECK_FALSE(fs::exists(a.string() + ".tmp"));
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("report config reproduces the payload") {
  const auto dir = scratch();
  for (const auto& [cmd, cfg] : valid_configs()) {
    CAPTURE(cmd);
    const auto path = write_config(dir, cmd + ".json", cfg);
    const auto first = dir / (cmd + "_1.json");
    REQUIRE(run({cmd, "--config", path.string(), "--out", first.string(), "--format", "json"}).code == kExitOk);
    const auto report = json::parse(slurp(first.string() + ".report.json"));
    const auto echo = write_config(dir, cmd + "_echo.json", report["config"]);
    const auto second = dir / (cmd + "_2.json");
    REQUIRE(run({cmd, "--config", echo.string(), "--out", second.string(), "--format", "json"}).code == kExitOk);
    CHECK(slurp(first) == slurp(second));
  }
  fs::remove_all(dir);
}

TEST_CASE("emitted descriptors are accepted back") {
  const auto dir = scratch();
  // space descriptor from a quantum-space build feeds a new build
  const auto qs = run({"qspace-build", "--space", R"({"kind":"power","base":{"kind":"spin","exponent":1},"n":2})",
                       "--set", "sample=5", "--format", "json"});
  REQUIRE(qs.code == kExitOk);
  const auto basis = json::parse(qs.out);
  const auto again = run({"qspace-build", "--space", basis["space"].dump(), "--set", "points=" + basis["points"].dump(),
                          "--format", "json"});
  REQUIRE(again.code == kExitOk);
  CHECK(json::parse(again.out) == basis);

  // algebra emitted by lie-evolve, plus its matrices, is a valid algebra input
  const auto le = run({"lie-evolve", "--set", "algebra=\"qubit\"", "--set", "hamiltonian=\"s1\"", "--set",
                       "rho=[[1,0],[0,0]]", "--set", "observables=[\"s2\",\"s3\"]", "--t-span", "0,1", "--format", "json"});
  REQUIRE(le.code == kExitOk);
  json alg = json::parse(le.out)["algebra"];
  alg["matrices"] = {{{1, 0}, {0, 1}}, {{0, 1}, {1, 0}}, {{0, {0, -1}}, {{0, 1}, 0}}, {{1, 0}, {0, -1}}};
  const auto le2 = run({"lie-evolve", "--set", "algebra=" + alg.dump(), "--set", "hamiltonian=\"s1\"", "--set",
                        "rho=[[1,0],[0,0]]", "--set", "observables=[\"s2\",\"s3\"]", "--t-span", "0,1", "--format", "json"});
  REQUIRE(le2.code == kExitOk);
  CHECK(json::parse(le2.out)["values"] == json::parse(le.out)["values"]);
  fs::remove_all(dir);
}

TEST_CASE("thread count does not change payloads") {
  const std::vector<std::string> base{"kernel-gram", "--space", R"({"kind":"klauder","modes":2})", "--set", "sample=12",
                                      "--seed", "5"};
  auto one = base, four = base;
  one.insert(one.end(), {"--threads", "1"});
  four.insert(four.end(), {"--threads", "4"});
  const auto a = run(one), b = run(four);
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(json::parse(b.err)["threads"] == 4);

  ::setenv("COHSPACE_THREADS", "3", 1);
  const auto c = run(base);
  ::unsetenv("COHSPACE_THREADS");
  REQUIRE(c.code == kExitOk);
  CHECK(json::parse(c.err)["threads"] == 3);
  CHECK(c.out == a.out);
  // a different seed samples different points
  auto other = base;
  other[6] = "6";
  CHECK(run(other).out != a.out);
}

TEST_CASE("malformed configs exit with 2") {
  const auto dir = scratch();
  const auto broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  const std::vector<std::vector<std::string>> cases{
      {},
      {"no-such-command"},
      {"kernel-eval", "--config", (dir / "missing.json").string()},
      {"kernel-eval", "--config", broken.string()},
      {"kernel-eval", "--z", "[1,0]", "--z2", "[0,1]"},
      {"kernel-eval", "--space", R"({"kind":"nope"})", "--z", "[1]", "--z2", "[1]"},
      {"kernel-eval", "--space", "{bad", "--z", "[1]", "--z2", "[1]"},
      {"kernel-eval", "--space", kTrivial2.dump(), "--z", R"("text")", "--z2", "[0,1]"},
      {"spec-solve", "--model", R"({"model":"oscillator"})", "--interval", "0;10"},
      {"spec-solve", "--model", R"({"model":"oscillator"})"},
      {"spec-solve", "--model", R"({"model":"warp"})", "--interval", "0,1"},
      {"spec-solve", "--model", R"({"model":"oscillator"})", "--interval", "0,1", "--format", "xml"},
      {"spec-solve", "--model", R"({"model":"oscillator"})", "--interval", "0,1", "--threads", "0"},
      {"spec-solve", "--model", R"({"model":"oscillator"})", "--interval", "0,1", "--set", "noequals"},
      {"kernel-gram", "--space", kTrivial2.dump(), "--set", "seed=-1", "--set", "sample=3"},
      {"kernel-gram", "--space", kTrivial2.dump()},
      {"dyn-tdvp", "--space", kTrivial2.dump(), "--set", "energy={\"type\":\"cubic\"}", "--set", "z0=[1,0]",
       "--t-span", "0,1"},
      {"lie-evolve", "--set", "algebra=\"octonion\""},
      {"causal-check", "--set", "triples=[{\"condition\":\"acausal\",\"j\":[],\"j2\":[]}]"},
  };
  for (const auto& c : cases) {
    std::string joined;
    for (const auto& a : c) joined += a + " ";
    CAPTURE(joined);
    const auto r = run(c);
    CHECK(r.code == kExitConfig);
    CHECK(r.out.empty());
    if (!r.err.empty()) CHECK(json::parse(r.err.substr(0, r.err.find('\n')))["error"] == "config");
  }
  fs::remove_all(dir);
}

TEST_CASE("domain errors exit with 1 and a JSON record") {
  const std::vector<std::vector<std::string>> cases{
      {"kernel-eval", "--space", R"({"kind":"spin","exponent":2})", "--z", "[1,0,0]", "--z2", "[0,1]"},
      {"spec-solve", "--model", R"({"model":"table","m":[0,1],"k":[0,1],"xi":{"a":1,"b":0}})", "--interval", "0,1"},
      {"spec-solve", "--model", R"({"model":"oscillator"})", "--interval", "1,0"},
      {"qspace-build", "--space", R"({"kind":"spin","exponent":0.6})", "--set", "sample=12", "--seed", "2"},
      {"lie-evolve", "--set", "algebra=\"qubit\"", "--set", "hamiltonian=\"s3\"", "--set", "rho=[[1,0],[0,0]]",
       "--set", "observables=[\"s1\"]", "--t-span", "0,1"},
      {"lie-evolve", "--set", "algebra=\"qubit\"", "--set", "hamiltonian=\"s3\"", "--set", "rho=[[2,0],[0,0]]",
       "--set", "observables=[\"s3\"]", "--t-span", "0,1"},
      {"dyn-tdvp", "--space", R"({"kind":"spin","exponent":0})", "--set",
       R"(energy={"type":"linear","hamiltonian":[[1,0],[0,0]]})", "--set", "z0=[1,0]", "--t-span", "0,1"},
  };
  for (const auto& c : cases) {
    std::string joined;
    for (const auto& a : c) joined += a + " ";
    CAPTURE(joined);
    const auto r = run(c);
    CHECK(r.code == kExitDomain);
    CHECK(r.out.empty());
    const auto e = json::parse(r.err.substr(0, r.err.find('\n')));
    CHECK(e["exit_code"] == 1);
    CHECK(e["error"] != "config");
    CHECK(e["error"] != "internal");
  }
}

TEST_CASE("numbers are formatted independently of the locale") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(-1e-300) == "-1e-300");
  CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(0.0) == "0");
  CHECK(cli_commands().size() == 11);
}
