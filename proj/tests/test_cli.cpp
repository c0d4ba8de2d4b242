// end-to-end checks of the command-line front end (runs the built binary)
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "plopt/apps.hpp"
#include "plopt/circuit.hpp"
#include "plopt/solver.hpp"

using namespace plopt;

namespace {

struct RunResult {
  int status;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(PLOPT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  int rc = pclose(pipe);
  return {WEXITSTATUS(rc), out};
}

std::string tmp_path(const std::string& name) { return "/tmp/plopt_cli_test_" + name; }

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  f << data;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kMatchingPennies = R"({
  "kind": "bimatrix",
  "a1": [["1", "-1"], ["-1", "1"]],
  "a2": [["-1", "1"], ["1", "-1"]]
})";

}  // namespace

TEST_CASE("solve then verify a game instance exits 0") {
  write_file(tmp_path("mp.json"), kMatchingPennies);
  RunResult solve = run_cli("solve --in " + tmp_path("mp.json") + " --out " + tmp_path("mp.sol"));
  REQUIRE(solve.status == 0);
  RunResult verify = run_cli("verify --in " + tmp_path("mp.json") + " --sol " + tmp_path("mp.sol"));
  CHECK(verify.status == 0);
  FixedPointSolution sol = solution_from_text(read_file(tmp_path("mp.sol")));
  CHECK(sol.inputs == RatVec{rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)});
}

TEST_CASE("verify rejects a corrupted solution with exit 1 and a named condition") {
  write_file(tmp_path("mp2.json"), kMatchingPennies);
  REQUIRE(run_cli("solve --in " + tmp_path("mp2.json") + " --out " + tmp_path("mp2.sol")).status == 0);
  std::string sol = read_file(tmp_path("mp2.sol"));
  auto pos = sol.find("x0 = 1/2");
  REQUIRE(pos != std::string::npos);
  sol.replace(pos, 8, "x0 = 1\nx_skip = 0");
  // keep the coordinate count: overwrite x1 instead
  sol = "solution v1\nx0 = 1\nx1 = 0\nx2 = 1\nx3 = 0\npattern \n";
  write_file(tmp_path("mp2.bad"), sol);
  RunResult verify = run_cli("verify --in " + tmp_path("mp2.json") + " --sol " + tmp_path("mp2.bad"));
  CHECK(verify.status == 1);
  CHECK(verify.out.find("violated") != std::string::npos);
}

TEST_CASE("compile emits a parseable circuit and solve round-trips through it") {
  write_file(tmp_path("mp3.json"), kMatchingPennies);
  REQUIRE(run_cli("compile --in " + tmp_path("mp3.json") + " --out " + tmp_path("mp3.circ")).status == 0);
  Circuit c = circuit_from_text(read_file(tmp_path("mp3.circ")));
  CHECK(c.n_inputs == 4);
  // solving the serialized circuit equals the in-memory pipeline bit for bit
  REQUIRE(run_cli("solve --in " + tmp_path("mp3.circ") + " --out " + tmp_path("mp3.sol")).status == 0);
  REQUIRE(run_cli("solve --in " + tmp_path("mp3.json") + " --out " + tmp_path("mp3.sol2")).status == 0);
  CHECK(read_file(tmp_path("mp3.sol")) == read_file(tmp_path("mp3.sol2")));
}

TEST_CASE("eval prints primary and aux values") {
  write_file(tmp_path("h.circ"), circuit_to_text(heaviside()));
  RunResult r = run_cli("eval --in " + tmp_path("h.circ") + " --inputs 1 --aux 1");
  CHECK(r.status == 0);
  CHECK(r.out.find("primary: 1") != std::string::npos);
  CHECK(r.out.find("aux: 1") != std::string::npos);
}

TEST_CASE("expand rewrites a gate spec into a standard circuit") {
  LinOptGateSpec spec;
  spec.n = 1;
  spec.m = 1;
  spec.k = 1;
  spec.A = {{rat(1)}};
  spec.R = 1;
  spec.C = 1;
  {
    CircuitBuilder sg;
    sg.input(Interval(rat(-1), rat(1)));
    GateRef c = sg.input(Interval(rat(-1), rat(1)));
    sg.mark_primary_output(c);
    spec.subgrad = sg.finish();
  }
  write_file(tmp_path("spec.txt"), linopt_spec_to_text(spec));
  RunResult r = run_cli("expand --in " + tmp_path("spec.txt") + " --out " + tmp_path("spec.circ"));
  REQUIRE(r.status == 0);
  Circuit c = circuit_from_text(read_file(tmp_path("spec.circ")));
  CHECK(c.n_inputs == 2);   // b and c
  CHECK(c.n_aux >= 2);      // alpha and the Heaviside multiplier
}

TEST_CASE("parse errors exit with the usage code") {
  write_file(tmp_path("bad.json"), "{\"kind\": 3}");
  CHECK(run_cli("solve --in " + tmp_path("bad.json") + " --out /tmp/x").status == 2);
  CHECK(run_cli("frobnicate").status == 2);
}

TEST_CASE("branch cap violations exit with the resource code") {
  write_file(tmp_path("mp4.json"), kMatchingPennies);
  RunResult r = run_cli("solve --branch-cap 2 --in " + tmp_path("mp4.json") + " --out /tmp/x");
  CHECK(r.status == 3);
}

TEST_CASE("selftest passes") {
  RunResult r = run_cli("selftest --seed 42");
  CHECK(r.status == 0);
  CHECK(r.out.find("all passed") != std::string::npos);
}
