#include "ogp/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ogp/common.hpp"
#include "ogp/factors.hpp"
#include "ogp/gtbound.hpp"
#include "ogp/model.hpp"
#include "ogp/oracle.hpp"
#include "ogp/parisi.hpp"
#include "ogp/step_gamma.hpp"

namespace ogp::cli {
namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw ValidationError("short write to '" + path + "'");
}

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(what + ": malformed JSON");
  return j;
}

std::vector<double> parse_reals(const std::string& text,
                                const std::string& flag) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": cannot parse '" + item + "'");
    }
    while (used < item.size() &&
           std::isspace(static_cast<unsigned char>(item[used])))
      ++used;
    if (used != item.size())
      throw ValidationError(flag + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(flag + ": empty list");
  return out;
}

json spins_json(const SpinConfig& sigma) {
  json arr = json::array();
  for (int i = 0; i < static_cast<int>(sigma.size()); ++i)
    arr.push_back(sigma[i]);
  return arr;
}

// accepts a bare control object or the wrapper written by parisi --out
StepGamma load_gamma(const std::string& path) {
  json j = parse_json(slurp(path), path);
  if (j.is_object() && j.contains("gamma")) j = j.at("gamma");
  return StepGamma::from_json(j.dump());
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

// Layers a JSON config file underneath the parsed flags. Precedence: a flag
// given on the command line wins, else a matching config key, else the
// compiled default. snapshot() re-emits every parameter, so the "config"
// object of a run manifest reproduces the run when fed back via --config.
class ParamSet {
 public:
  explicit ParamSet(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_,
                    "JSON object of per-flag values; explicit flags win");
  }

  template <class T>
  CLI::Option* add(const std::string& flag, T& ref, const std::string& desc) {
    CLI::Option* opt = cmd_->add_option(flag, ref, desc);
    track(opt, flag, ref);
    return opt;
  }

  CLI::Option* add_flag(const std::string& flag, bool& ref,
                        const std::string& desc) {
    CLI::Option* opt = cmd_->add_flag(flag, ref, desc);
    track(opt, flag, ref);
    return opt;
  }

  // Applies the config file, if any; must run first in the command body.
  void resolve() const {
    if (config_path_.empty()) return;
    json cfg = parse_json(slurp(config_path_), "--config");
    if (!cfg.is_object())
      throw ValidationError("--config: expected a JSON object");
    for (const auto& item : cfg.items())
      if (!keys_.count(item.key()))
        throw ValidationError("--config: unknown key '" + item.key() + "'");
    for (const auto& apply : appliers_) apply(cfg);
  }

  json snapshot() const {
    json j = json::object();
    for (const auto& emit : emitters_) emit(j);
    return j;
  }

 private:
  template <class T>
  void track(CLI::Option* opt, const std::string& flag, T& ref) {
    std::string key = flag.substr(flag.find_first_not_of('-'));
    keys_.insert(key);
    // null marks "not set" (NaN serializes as null), so it never overrides
    appliers_.push_back([opt, key, &ref](const json& cfg) {
      if (opt->count() == 0 && cfg.contains(key) && !cfg.at(key).is_null())
        ref = cfg.at(key).get<T>();
    });
    emitters_.push_back([key, &ref](json& j) { j[key] = ref; });
  }

  CLI::App* cmd_;
  std::string config_path_;
  std::set<std::string> keys_;
  std::vector<std::function<void(const json&)>> appliers_;
  std::vector<std::function<void(json&)>> emitters_;
};

// Written beside the primary output as <out>.manifest.json.
void write_manifest(const std::string& command, const ParamSet& ps,
                    const std::vector<std::string>& outputs, double seconds) {
  ExperimentConfig ec{command, ps.snapshot()};
  json m = parse_json(ec.to_json(), "manifest");
  m["build_id"] = build_id();
  m["wall_time_seconds"] = seconds;
  m["outputs"] = outputs;
  spill(outputs.front() + ".manifest.json", m.dump(2) + "\n");
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    spill(out, text);
}

MeanFieldInstance seeded_mean_field(int k, int n, std::uint64_t seed) {
  return sample_mean_field(k, n, derive_seed(seed, "instance"));
}

void add_gen(CLI::App& app) {
  struct Args {
    int k = 4;
    double lambda = 2.0;
    int n = 100;
    double t = -1.0;
    std::uint64_t seed = 1;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "gen", "sample a diluted instance (or a coupled pair) as JSON");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--k", a->k, "edge arity, even and >= 2");
  ps->add("--lambda", a->lambda, "edge density: Poisson(lambda*n) edges");
  ps->add("--n", a->n, "number of vertices");
  ps->add("--t", a->t,
          "correlation parameter in [0,1]; when set, emits a coupled pair");
  ps->add("--seed", a->seed, "master seed");
  ps->add("--out", a->out, "output path; stdout when omitted");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    std::string text =
        a->t >= 0.0
            ? coupled_to_json(
                  sample_coupled(a->k, a->lambda, a->n, a->t, a->seed))
            : hypergraph_to_json(sample_er(a->k, a->lambda, a->n, a->seed));
    emit(a->out, text + "\n");
    if (!a->out.empty()) write_manifest("gen", *ps, {a->out}, sw.seconds());
  });
}

void add_energy(CLI::App& app) {
  struct Args {
    std::string in;
    std::string spins;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "energy", "evaluate one spin assignment on an instance");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--in", a->in, "instance JSON path");
  ps->add("--spins", a->spins, "spin assignment JSON path");
  ps->add("--out", a->out, "also write the result JSON here");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    if (a->in.empty()) throw ValidationError("energy: --in is required");
    if (a->spins.empty()) throw ValidationError("energy: --spins is required");
    Hypergraph g = hypergraph_from_json(slurp(a->in));
    SpinConfig sigma = spins_from_json(slurp(a->spins));
    json r;
    r["energy"] = hamiltonian(g, sigma);
    r["cut_density"] = cut_density(g, sigma);
    r["magnetization"] = magnetization(sigma);
    std::string text = r.dump(2) + "\n";
    std::cout << text;
    if (!a->out.empty()) {
      spill(a->out, text);
      write_manifest("energy", *ps, {a->out}, sw.seconds());
    }
  });
}

void add_brute(CLI::App& app) {
  struct Args {
    std::string in;
    bool mean_field = false;
    int k = 4;
    int n = 14;
    std::uint64_t seed = 1;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "brute", "exact ground state by exhaustive enumeration");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--in", a->in, "instance JSON path");
  ps->add_flag("--mean-field", a->mean_field,
               "draw a Gaussian mean-field instance from --seed instead");
  ps->add("--k", a->k, "interaction order for --mean-field");
  ps->add("--n", a->n, "spin count for --mean-field");
  ps->add("--seed", a->seed, "master seed for --mean-field");
  ps->add("--out", a->out, "also write the result JSON here");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    if (a->mean_field == !a->in.empty())
      throw ValidationError("brute: give exactly one of --in, --mean-field");
    oracle::BruteResult res;
    int n = 0;
    if (a->mean_field) {
      res = oracle::brute_force_max(seeded_mean_field(a->k, a->n, a->seed));
      n = a->n;
    } else {
      Hypergraph g = hypergraph_from_json(slurp(a->in));
      res = oracle::brute_force_max(g);
      n = g.n;
    }
    json r;
    r["max_energy"] = res.value;
    r["max_density"] = res.value / n;
    r["argmax"] = spins_json(res.argmax);
    std::string text = r.dump(2) + "\n";
    std::cout << text;
    if (!a->out.empty()) {
      spill(a->out, text);
      write_manifest("brute", *ps, {a->out}, sw.seconds());
    }
  });
}

void add_pairmax(CLI::App& app) {
  struct Args {
    std::string in;
    bool mean_field = false;
    int k = 4;
    int n = 12;
    std::uint64_t seed = 1;
    std::string overlaps;
    std::string overlap_range;
    int threads = 0;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "pairmax", "exact best energy pair under an overlap constraint");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--in", a->in, "instance JSON path");
  ps->add_flag("--mean-field", a->mean_field,
               "draw a Gaussian mean-field instance from --seed instead");
  ps->add("--k", a->k, "interaction order for --mean-field");
  ps->add("--n", a->n, "spin count for --mean-field");
  ps->add("--seed", a->seed, "master seed for --mean-field");
  ps->add("--overlaps", a->overlaps, "admitted overlaps, e.g. '0,0.5'");
  ps->add("--overlap-range", a->overlap_range, "admitted interval 'lo,hi'");
  ps->add("--threads", a->threads, "worker threads; 0 = OGP_THREADS or all");
  ps->add("--out", a->out, "also write the result JSON here");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    if (a->mean_field == !a->in.empty())
      throw ValidationError("pairmax: give exactly one of --in, --mean-field");
    if (a->overlaps.empty() == a->overlap_range.empty())
      throw ValidationError(
          "pairmax: give exactly one of --overlaps, --overlap-range");
    oracle::OverlapSet set;
    if (!a->overlaps.empty()) {
      set = oracle::OverlapSet::of(parse_reals(a->overlaps, "--overlaps"));
    } else {
      std::vector<double> v = parse_reals(a->overlap_range, "--overlap-range");
      if (v.size() != 2)
        throw ValidationError("--overlap-range: expected 'lo,hi'");
      set = oracle::OverlapSet::range(v[0], v[1]);
    }
    oracle::EnergyTable table;
    int n = 0;
    if (a->mean_field) {
      table =
          oracle::build_energy_table(seeded_mean_field(a->k, a->n, a->seed));
      n = a->n;
    } else {
      Hypergraph g = hypergraph_from_json(slurp(a->in));
      table = oracle::build_energy_table(g);
      n = g.n;
    }
    oracle::PairMax pm = oracle::constrained_pair_max(table, set, a->threads);
    json r;
    r["value"] = pm.value;
    r["overlap"] = pm.overlap;
    r["first"] = spins_json(spins_from_mask(pm.first, n));
    r["second"] = spins_json(spins_from_mask(pm.second, n));
    std::string text = r.dump(2) + "\n";
    std::cout << text;
    if (!a->out.empty()) {
      spill(a->out, text);
      write_manifest("pairmax", *ps, {a->out}, sw.seconds());
    }
  });
}

void add_factor_run(CLI::App& app) {
  struct Args {
    std::string in;
    std::string factor = "random";
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "factor-run", "apply a local factor rule to one instance");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--in", a->in, "instance JSON path");
  ps->add("--factor", a->factor,
          "rule: random | constant | glauber:rounds=R[,beta=B] | "
          "edge_majority[:radius=R]");
  ps->add("--seed", a->seed, "label seed");
  ps->add("--threads", a->threads, "worker threads; 0 = OGP_THREADS or all");
  ps->add("--out", a->out, "write the resulting spins JSON here");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    if (a->in.empty()) throw ValidationError("factor-run: --in is required");
    Hypergraph g = hypergraph_from_json(slurp(a->in));
    factors::FactorSpec f = factors::parse_factor(a->factor);
    SpinConfig sigma = factors::run_factor(g, f, a->seed, a->threads);
    json r;
    r["factor"] = f.to_string();
    r["cut_density"] = cut_density(g, sigma);
    r["magnetization"] = magnetization(sigma);
    std::cout << r.dump(2) + "\n";
    if (!a->out.empty()) {
      spill(a->out, spins_to_json(sigma) + "\n");
      write_manifest("factor-run", *ps, {a->out}, sw.seconds());
    }
  });
}

void add_overlap_curve(CLI::App& app) {
  struct Args {
    std::string factor = "glauber:rounds=2,beta=1";
    int k = 4;
    double lambda = 2.0;
    int n = 2000;
    std::string t_grid = "0,0.25,0.5,0.75,1";
    int reps = 10;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "overlap-curve", "factor overlap versus coupling parameter t as CSV");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--factor", a->factor, "rule, as in factor-run");
  ps->add("--k", a->k, "edge arity");
  ps->add("--lambda", a->lambda, "edge density");
  ps->add("--n", a->n, "vertices per instance");
  ps->add("--t-grid", a->t_grid, "comma-separated t values in [0,1]");
  ps->add("--reps", a->reps, "coupled instances per t");
  ps->add("--seed", a->seed, "master seed");
  ps->add("--threads", a->threads, "worker threads; 0 = OGP_THREADS or all");
  ps->add("--out", a->out, "CSV path; stdout when omitted");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    factors::FactorSpec f = factors::parse_factor(a->factor);
    std::vector<double> grid = parse_reals(a->t_grid, "--t-grid");
    std::vector<factors::CurveRow> rows = factors::overlap_curve(
        f, a->k, a->lambda, a->n, grid, a->reps, a->seed, a->threads);
    emit(a->out, factors::curve_csv(rows));
    if (!a->out.empty())
      write_manifest("overlap-curve", *ps, {a->out}, sw.seconds());
  });
}

void add_scan_overlap(CLI::App& app) {
  struct Args {
    std::string in;
    bool mean_field = false;
    int k = 4;
    int n = 14;
    double eta = 0.02;
    int bins = 50;
    bool exhaustive = false;
    long long flips_per_spin = 2000;
    double t_start = 2.0;
    double t_end = 0.01;
    int restarts = 50;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "scan-overlap", "histogram of |overlap| among near-optimal pairs");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--in", a->in, "instance JSON path");
  ps->add_flag("--mean-field", a->mean_field,
               "draw a Gaussian mean-field instance from --seed instead");
  ps->add("--k", a->k, "interaction order for --mean-field");
  ps->add("--n", a->n, "spin count for --mean-field");
  ps->add("--eta", a->eta, "relative energy margin defining near-optimal");
  ps->add("--bins", a->bins, "histogram bins over [0,1]");
  ps->add_flag("--exhaustive", a->exhaustive,
               "enumerate every near-optimal configuration exactly");
  ps->add("--flips-per-spin", a->flips_per_spin, "annealing schedule length");
  ps->add("--t-start", a->t_start, "annealing start temperature");
  ps->add("--t-end", a->t_end, "annealing end temperature");
  ps->add("--restarts", a->restarts, "annealing restarts (samples)");
  ps->add("--seed", a->seed, "master seed");
  ps->add("--threads", a->threads, "worker threads; 0 = OGP_THREADS or all");
  ps->add("--out", a->out, "CSV path; stdout when omitted");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    if (a->mean_field == !a->in.empty())
      throw ValidationError(
          "scan-overlap: give exactly one of --in, --mean-field");
    oracle::ScanOptions so;
    so.eta = a->eta;
    so.num_bins = a->bins;
    so.exhaustive = a->exhaustive;
    so.anneal = {a->flips_per_spin, a->t_start, a->t_end, a->restarts};
    so.seed = a->seed;
    so.threads = a->threads;
    oracle::ScanResult res =
        a->mean_field
            ? oracle::overlap_gap_scan(seeded_mean_field(a->k, a->n, a->seed),
                                       so)
            : oracle::overlap_gap_scan(hypergraph_from_json(slurp(a->in)), so);
    emit(a->out, res.hist.csv_string());
    if (!a->out.empty()) {
      spill(a->out + ".sidecar.json", res.sidecar_json() + "\n");
      write_manifest("scan-overlap", *ps,
                     {a->out, a->out + ".sidecar.json"}, sw.seconds());
    }
  });
}

void add_parisi(CLI::App& app) {
  struct Args {
    int k = 4;
    int steps = 1;
    bool minimize = false;
    double gamma_const = 0.0;
    std::string gamma_file;
    double x_max = 0.0;
    double h = 0.02;
    int quad = 64;
    int restarts = 8;
    std::uint64_t seed = 1;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "parisi", "zero-temperature functional for a step control");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--k", a->k, "pure mixture degree, even and >= 2");
  ps->add("--steps", a->steps, "step count for --minimize");
  ps->add_flag("--minimize", a->minimize,
               "minimize over step controls with at most --steps pieces");
  CLI::Option* gc =
      ps->add("--gamma-const", a->gamma_const, "evaluate a constant control");
  ps->add("--gamma-file", a->gamma_file, "evaluate a control from JSON");
  ps->add("--x-max", a->x_max, "spatial half-width; 0 = automatic");
  ps->add("--dx", a->h, "spatial grid spacing");
  ps->add("--quad", a->quad, "Gauss-Hermite nodes per time slice");
  ps->add("--restarts", a->restarts, "minimizer restarts");
  ps->add("--seed", a->seed, "minimizer seed");
  ps->add("--out", a->out, "write {p, gamma, ...} JSON here");
  cmd->callback([a, ps, gc] {
    ps->resolve();
    Stopwatch sw;
    if (a->minimize && (!a->gamma_file.empty() || gc->count() > 0))
      throw ValidationError(
          "parisi: --minimize excludes --gamma-file and --gamma-const");
    if (!a->gamma_file.empty() && gc->count() > 0)
      throw ValidationError(
          "parisi: give only one of --gamma-file, --gamma-const");
    MixtureXi xi(a->k);
    parisi::GridOptions grid;
    grid.x_max = a->x_max;
    grid.h = a->h;
    grid.quad = a->quad;
    json r;
    double p = 0.0;
    StepGamma gamma = StepGamma::constant(a->gamma_const);
    if (a->minimize) {
      parisi::MinimizeOptions mo;
      mo.restarts = a->restarts;
      mo.grid = grid;
      parisi::MinimizeResult res =
          parisi::minimize_parisi(xi, a->steps, a->seed, mo);
      p = res.value;
      gamma = res.gamma;
      r["ladder"] = res.ladder;
    } else if (!a->gamma_file.empty()) {
      gamma = load_gamma(a->gamma_file);
      p = parisi::parisi_functional(gamma, xi, grid);
    } else {
      p = parisi::parisi_functional(gamma, xi, grid);
    }
    std::cout << "P = " << fmt17(p) << "\n";
    r["p"] = p;
    r["gamma"] = parse_json(gamma.to_json(), "gamma");
    if (!a->out.empty()) {
      spill(a->out, r.dump(2) + "\n");
      write_manifest("parisi", *ps, {a->out}, sw.seconds());
    }
  });
}

void add_gt_scan(CLI::App& app) {
  struct Args {
    int k = 4;
    std::string gamma_file;
    double pstar = std::numeric_limits<double>::quiet_NaN();
    int minimize_steps = 3;
    std::string q_grid;
    std::string scales;
    double lambda_max = 2.0;
    int golden_iters = 14;
    double min_margin = 1e-3;
    int precond_paths = 20000;
    double x_max = 0.0;
    double h = 0.02;
    int quad = 64;
    double h2 = 0.04;
    int quad2 = 32;
    int restarts = 8;
    std::uint64_t seed = 1;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "gt-scan", "interpolation upper bound scan and overlap-gap certificate");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--k", a->k, "pure mixture degree, even and >= 2");
  ps->add("--gamma-file", a->gamma_file,
          "reference control JSON; requires --pstar");
  ps->add("--pstar", a->pstar, "reference functional value for --gamma-file");
  ps->add("--minimize-steps", a->minimize_steps,
          "steps for the built-in minimization when no --gamma-file");
  ps->add("--q-grid", a->q_grid, "probe overlaps, comma-separated");
  ps->add("--scales", a->scales, "prefix scale family, comma-separated");
  ps->add("--lambda-max", a->lambda_max, "tilt search upper bound");
  ps->add("--golden-iters", a->golden_iters, "tilt search iterations");
  ps->add("--min-margin", a->min_margin, "required margin inside the band");
  ps->add("--precond-paths", a->precond_paths,
          "SDE paths for the derivative scan");
  ps->add("--x-max", a->x_max, "spatial half-width; 0 = automatic");
  ps->add("--dx", a->h, "spatial grid spacing");
  ps->add("--quad", a->quad, "Gauss-Hermite nodes per time slice");
  ps->add("--dx2", a->h2, "grid spacing for the two-dimensional stage");
  ps->add("--quad2", a->quad2, "quadrature nodes for the two-dimensional stage");
  ps->add("--restarts", a->restarts, "minimizer restarts");
  ps->add("--seed", a->seed, "seed for minimizer and derivative scan");
  ps->add("--out", a->out, "CSV path; stdout when omitted");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    MixtureXi xi(a->k);
    parisi::GridOptions grid;
    grid.x_max = a->x_max;
    grid.h = a->h;
    grid.quad = a->quad;
    grid.h2 = a->h2;
    grid.quad2 = a->quad2;
    StepGamma gamma_star = StepGamma::constant(0.0);
    double p_star = 0.0;
    if (!a->gamma_file.empty()) {
      if (std::isnan(a->pstar))
        throw ValidationError("gt-scan: --gamma-file requires --pstar");
      gamma_star = load_gamma(a->gamma_file);
      p_star = a->pstar;
    } else {
      parisi::MinimizeOptions mo;
      mo.restarts = a->restarts;
      mo.grid = grid;
      parisi::MinimizeResult res =
          parisi::minimize_parisi(xi, a->minimize_steps, a->seed, mo);
      gamma_star = res.gamma;
      p_star = res.value;
    }
    gt::CertificateOptions copt;
    if (!a->q_grid.empty()) copt.q_grid = parse_reals(a->q_grid, "--q-grid");
    if (!a->scales.empty()) copt.scales = parse_reals(a->scales, "--scales");
    copt.lambda_hi = a->lambda_max;
    copt.golden_iters = a->golden_iters;
    copt.min_margin = a->min_margin;
    copt.precond_paths = a->precond_paths;
    copt.seed = a->seed;
    gt::GapCertificate cert =
        gt::gap_certificate(gamma_star, p_star, xi, copt, grid);
    emit(a->out, gt::certificate_csv(cert));
    if (!a->out.empty()) {
      spill(a->out + ".summary.json", gt::certificate_json(cert) + "\n");
      write_manifest("gt-scan", *ps, {a->out, a->out + ".summary.json"},
                     sw.seconds());
    }
    if (!cert.applicable)
      std::cout << "certificate inapplicable at k = " << a->k << "\n";
    else if (cert.found)
      std::cout << "certified overlap gap on [" << fmt17(cert.a) << ", "
                << fmt17(cert.b) << "], margin " << fmt17(cert.eta) << "\n";
    else
      std::cout << "no overlap gap certified\n";
  });
}

void add_dilution(CLI::App& app) {
  struct Args {
    int k = 4;
    std::string lambdas = "0.5,1,2,4,8";
    int n = 20;
    int reps = 5;
    bool heuristic = false;
    long long flips_per_spin = 2000;
    double t_start = 2.0;
    double t_end = 0.01;
    int restarts = 50;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
  };
  auto a = std::make_shared<Args>();
  CLI::App* cmd = app.add_subcommand(
      "dilution", "ground-state density versus edge density as CSV");
  auto ps = std::make_shared<ParamSet>(cmd);
  ps->add("--k", a->k, "edge arity, even and >= 2");
  ps->add("--lambdas", a->lambdas, "edge densities, comma-separated");
  ps->add("--n", a->n, "vertices per instance");
  ps->add("--reps", a->reps, "instances per density");
  ps->add_flag("--heuristic", a->heuristic,
               "annealing lower bound instead of exact enumeration");
  ps->add("--flips-per-spin", a->flips_per_spin, "annealing schedule length");
  ps->add("--t-start", a->t_start, "annealing start temperature");
  ps->add("--t-end", a->t_end, "annealing end temperature");
  ps->add("--restarts", a->restarts, "annealing restarts");
  ps->add("--seed", a->seed, "master seed");
  ps->add("--threads", a->threads, "worker threads; 0 = OGP_THREADS or all");
  ps->add("--out", a->out, "CSV path; stdout when omitted");
  cmd->callback([a, ps] {
    ps->resolve();
    Stopwatch sw;
    oracle::DilutionOptions d;
    d.reps = a->reps;
    d.exact = !a->heuristic;
    d.anneal = {a->flips_per_spin, a->t_start, a->t_end, a->restarts};
    d.threads = a->threads;
    std::vector<oracle::DilutionRow> rows = oracle::dilution_compare(
        a->k, parse_reals(a->lambdas, "--lambdas"), a->n, a->seed, d);
    CsvTable table({"lambda", "mean_density", "se", "ratio"});
    for (const oracle::DilutionRow& r : rows)
      table.add_row({fmt17(r.lambda), fmt17(r.mean_density), fmt17(r.se),
                     std::isnan(r.ratio) ? "" : fmt17(r.ratio)});
    emit(a->out, table.to_string());
    if (!a->out.empty())
      write_manifest("dilution", *ps, {a->out}, sw.seconds());
  });
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  json j;
  j["command"] = command;
  j["config"] = params;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j = parse_json(text, "experiment config");
  if (!j.is_object() || !j.contains("command") || !j.contains("config"))
    throw ValidationError("experiment config: expected {command, config}");
  ExperimentConfig ec;
  ec.command = j.at("command").get<std::string>();
  ec.params = j.at("config");
  return ec;
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"diluted k-spin ground states, overlap scans, and"
               " interpolation bounds",
               "ogp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", build_id());
  add_gen(app);
  add_energy(app);
  add_brute(app);
  add_pairmax(app);
  add_factor_run(app);
  add_overlap_curve(app);
  add_scan_overlap(app);
  add_parisi(app);
  add_gt_scan(app);
  add_dilution(app);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace ogp::cli
