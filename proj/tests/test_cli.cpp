#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ogp/cli.hpp"
#include "ogp/common.hpp"
#include "ogp/model.hpp"

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

// Runs the CLI in-process, capturing stdout.
struct RunResult {
  int code = 0;
  std::string out;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  RunResult r;
  try {
    r.code = ogp::cli::run_cli(args);
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  r.out = captured.str();
  return r;
}

// Unique per-process scratch directory, removed on teardown.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ogp_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("gen with zero density emits an edgeless instance") {
  RunResult r = run({"gen", "--k", "4", "--lambda", "0", "--n", "10",
                     "--seed", "1"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("n") == 10);
  CHECK(j.at("k") == 4);
  CHECK(j.at("edges").empty());
}

TEST_CASE("gen writes a loadable instance and a manifest") {
  TempDir tmp;
  const std::string out = tmp.file("inst.json");
  RunResult r = run({"gen", "--k", "4", "--lambda", "2", "--n", "30",
                     "--seed", "7", "--out", out});
  REQUIRE(r.code == 0);
  const ogp::Hypergraph g = ogp::hypergraph_from_json(read_file(out));
  CHECK(g.n == 30);
  CHECK(g.k == 4);

  const json m = json::parse(read_file(out + ".manifest.json"));
  CHECK(m.at("command") == "gen");
  CHECK(m.at("build_id") == ogp::build_id());
  CHECK(m.at("wall_time_seconds").get<double>() >= 0.0);
  CHECK(m.at("outputs") == json::array({out}));
  CHECK(m.at("config").at("k") == 4);
  CHECK(m.at("config").at("lambda") == 2.0);
  CHECK(m.at("config").at("seed") == 7);

  // same seed, same bytes
  const std::string again = tmp.file("inst2.json");
  REQUIRE(run({"gen", "--k", "4", "--lambda", "2", "--n", "30", "--seed", "7",
               "--out", again})
              .code == 0);
  CHECK(read_file(out) == read_file(again));
}

TEST_CASE("gen with a coupling parameter emits a coupled pair") {
  RunResult r = run({"gen", "--k", "4", "--lambda", "1", "--n", "12", "--t",
                     "0.5", "--seed", "3"});
  REQUIRE(r.code == 0);
  const ogp::CoupledInstance ci = ogp::coupled_from_json(r.out);
  CHECK(ci.n == 12);
  CHECK(ci.t == doctest::Approx(0.5));
}

TEST_CASE("brute finds the single-edge optimum") {
  TempDir tmp;
  const std::string in = tmp.file("edge.json");
  // one 4-edge on an 8-vertex instance: max H = 1 at any odd-parity flip
  write_file(in, R"({"n": 8, "k": 4, "edges": [[0, 1, 2, 3]]})");
  RunResult r = run({"brute", "--in", in});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("max_energy") == 1.0);
  CHECK(j.at("max_density").get<double>() == doctest::Approx(0.125));
  CHECK(j.at("argmax").size() == 8);
}

TEST_CASE("brute and pairmax agree on the mean-field instance seed") {
  RunResult b = run({"brute", "--mean-field", "--k", "4", "--n", "10",
                     "--seed", "5"});
  REQUIRE(b.code == 0);
  const double best = json::parse(b.out).at("max_energy").get<double>();

  // the unconstrained pair twice the solo optimum: overlap 1 is admitted
  RunResult p = run({"pairmax", "--mean-field", "--k", "4", "--n", "10",
                     "--seed", "5", "--overlap-range", "0,1"});
  REQUIRE(p.code == 0);
  const json pj = json::parse(p.out);
  CHECK(pj.at("value").get<double>() ==
        doctest::Approx(2.0 * best / 10.0).epsilon(1e-12));
  CHECK(pj.at("first").size() == 10);
  CHECK(pj.at("second").size() == 10);
}

TEST_CASE("energy agrees with the factor-run report") {
  TempDir tmp;
  const std::string inst = tmp.file("inst.json");
  const std::string spins = tmp.file("spins.json");
  REQUIRE(run({"gen", "--k", "4", "--lambda", "2", "--n", "40", "--seed",
               "11", "--out", inst})
              .code == 0);
  RunResult f = run({"factor-run", "--in", inst, "--factor",
                     "glauber:rounds=2,beta=0.7", "--seed", "2", "--out",
                     spins});
  REQUIRE(f.code == 0);
  const json fj = json::parse(f.out);
  CHECK(fj.at("factor") == "glauber:rounds=2,beta=0.69999999999999996");

  RunResult e = run({"energy", "--in", inst, "--spins", spins});
  REQUIRE(e.code == 0);
  const json ej = json::parse(e.out);
  CHECK(ej.at("cut_density") == fj.at("cut_density"));
  CHECK(ej.at("magnetization") == fj.at("magnetization"));
  CHECK(ej.at("energy").is_number_integer());
}

TEST_CASE("parisi with the zero control prints the heat-kernel value") {
  TempDir tmp;
  const std::string out = tmp.file("p.json");
  RunResult r = run({"parisi", "--k", "4", "--steps", "1", "--gamma-const",
                     "0", "--out", out});
  REQUIRE(r.code == 0);
  REQUIRE(r.out.substr(0, 4) == "P = ");
  const double printed = std::stod(r.out.substr(4));
  CHECK(printed == doctest::Approx(std::sqrt(8.0 / M_PI)).epsilon(1e-3));

  const json j = json::parse(read_file(out));
  CHECK(j.at("p").get<double>() == doctest::Approx(printed));
  CHECK(j.contains("gamma"));
  CHECK_FALSE(j.contains("ladder"));
}

TEST_CASE("parisi rejects contradictory control sources") {
  RunResult r = run({"parisi", "--k", "4", "--minimize", "--gamma-const",
                     "1"});
  CHECK(r.code == 2);
}

TEST_CASE("parisi output files feed back through --gamma-file") {
  TempDir tmp;
  const std::string out = tmp.file("g.json");
  RunResult first = run({"parisi", "--k", "2", "--gamma-const", "0.7",
                         "--out", out});
  REQUIRE(first.code == 0);
  RunResult second = run({"parisi", "--k", "2", "--gamma-file", out});
  REQUIRE(second.code == 0);
  CHECK(second.out == first.out);
}

TEST_CASE("scan-overlap writes histogram, sidecar, and manifest") {
  TempDir tmp;
  const std::string out = tmp.file("scan.csv");
  std::vector<std::string> args = {"scan-overlap", "--mean-field",   "--k",
                                   "4",            "--n",            "12",
                                   "--exhaustive", "--seed",         "3",
                                   "--out",        out};
  REQUIRE(run(args).code == 0);
  const std::string csv = read_file(out);
  CHECK(csv.substr(0, csv.find('\n')) == "bin_lo,bin_hi,count");

  const json side = json::parse(read_file(out + ".sidecar.json"));
  CHECK(side.at("exhaustive") == true);
  CHECK(side.at("num_bins") == 50);

  const json m = json::parse(read_file(out + ".manifest.json"));
  CHECK(m.at("outputs").size() == 2);

  // replaying the recorded config reproduces both artifacts byte for byte
  const std::string cfg = tmp.file("cfg.json");
  write_file(cfg, m.at("config").dump());
  const std::string out2 = tmp.file("scan2.csv");
  REQUIRE(run({"scan-overlap", "--config", cfg, "--out", out2}).code == 0);
  CHECK(read_file(out2) == csv);
  CHECK(read_file(out2 + ".sidecar.json") == read_file(out + ".sidecar.json"));
}

TEST_CASE("flags override config values which override defaults") {
  TempDir tmp;
  const std::string cfg = tmp.file("cfg.json");
  write_file(cfg, R"({"k": 2, "lambda": 0.0, "n": 6})");

  // config fills unset flags
  RunResult a = run({"gen", "--config", cfg, "--seed", "1"});
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out).at("k") == 2);
  CHECK(json::parse(a.out).at("n") == 6);

  // an explicit flag beats the config
  RunResult b = run({"gen", "--config", cfg, "--seed", "1", "--n", "9"});
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out).at("n") == 9);

  // untouched keys keep their defaults
  CHECK(json::parse(a.out).at("edges").empty());
}

TEST_CASE("unknown or malformed config keys are rejected") {
  TempDir tmp;
  const std::string cfg = tmp.file("cfg.json");
  write_file(cfg, R"({"bogus": 1})");
  CHECK(run({"gen", "--config", cfg}).code == 2);
  write_file(cfg, "[1,2]");
  CHECK(run({"gen", "--config", cfg}).code == 2);
  write_file(cfg, "{nope");
  CHECK(run({"gen", "--config", cfg}).code == 2);
}

TEST_CASE("experiment config survives a json round trip") {
  ogp::cli::ExperimentConfig ec;
  ec.command = "scan-overlap";
  ec.params = json{{"k", 4}, {"eta", 0.02}, {"exhaustive", true},
                   {"seed", 123456789012345ull}, {"out", "x.csv"}};
  const ogp::cli::ExperimentConfig back =
      ogp::cli::ExperimentConfig::from_json(ec.to_json());
  CHECK(back.command == ec.command);
  CHECK(back.params == ec.params);
  CHECK_THROWS_AS(ogp::cli::ExperimentConfig::from_json("{}"),
                  ogp::ValidationError);
}

TEST_CASE("dilution emits the fixed header and a blank ratio at zero") {
  RunResult r = run({"dilution", "--k", "4", "--lambdas", "0,2", "--n", "10",
                     "--reps", "2", "--seed", "4"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "lambda,mean_density,se,ratio");
  REQUIRE(std::getline(lines, line));
  CHECK(line == "0,0,0,");
  REQUIRE(std::getline(lines, line));
  CHECK(line.substr(0, 2) == "2,");
}

TEST_CASE("usage and resource failures map to distinct exit codes") {
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"brute"}).code == 2);
  CHECK(run({"brute", "--in", "/nonexistent/x.json"}).code == 2);
  CHECK(run({"brute", "--mean-field", "--k", "4", "--n", "29"}).code == 3);
  CHECK(run({"pairmax", "--mean-field", "--overlaps", "0.5",
             "--overlap-range", "0,1"})
            .code == 2);
  CHECK(run({"gt-scan", "--k", "4", "--gamma-file", "/nonexistent/g.json"})
            .code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"scan-overlap", "--help"}).code == 0);
}

TEST_CASE("overlap-curve honors the grid and prints the pinned header") {
  RunResult r = run({"overlap-curve", "--factor", "random", "--k", "4",
                     "--lambda", "1", "--n", "200", "--t-grid", "0,1",
                     "--reps", "3", "--seed", "6"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "t,mean_overlap,se_overlap,mean_mag,mean_cut_density");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("gt-scan without a reference control minimizes its own") {
  TempDir tmp;
  const std::string out = tmp.file("cert.csv");
  RunResult r = run({"gt-scan",         "--k",      "2",
                     "--minimize-steps", "1",       "--restarts", "2",
                     "--q-grid",        "0.4",      "--precond-paths", "1000",
                     "--golden-iters",  "3",        "--out", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("inapplicable") != std::string::npos);
  const json summary = json::parse(read_file(out + ".summary.json"));
  CHECK(summary.at("a").is_null());
  const std::string csv = read_file(out);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "q,best_lambda,best_scale,bound,two_me,margin");
}
