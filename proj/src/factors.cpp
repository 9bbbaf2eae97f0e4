#include "ogp/factors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "ogp/common.hpp"

namespace ogp::factors {

namespace {

// 2^53; labels live in [0,1), so the scaled seed stays below this
constexpr double kLabelScale = 9007199254740992.0;

std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> incidences(
    const Hypergraph& g) {
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> inc(g.n);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    auto edge = g.edge(e);
    for (int s = 0; s < g.k; ++s)
      inc[edge[s]].emplace_back(static_cast<std::int32_t>(e), s);
  }
  return inc;
}

// h_v = sum over (edge, slot) incidences of -prod of the other slots,
// multiplicity counted; integer-valued
long long local_field(
    const Hypergraph& g,
    const std::vector<std::pair<std::int32_t, std::int32_t>>& inc_v,
    const SpinConfig& sigma) {
  long long h = 0;
  for (const auto& [e, slot] : inc_v) {
    auto edge = g.edge(static_cast<std::size_t>(e));
    int prod = 1;
    for (int s = 0; s < g.k; ++s)
      if (s != slot) prod *= sigma[edge[s]];
    h -= prod;
  }
  return h;
}

SpinConfig init_spins(const Eigen::ArrayXd& labels) {
  SpinConfig sigma(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    sigma[i] = labels[i] >= 0.5 ? 1 : -1;
  return sigma;
}

long long parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("factor spec: bad integer '" + s + "'");
  }
  if (used != s.size())
    throw ValidationError("factor spec: bad integer '" + s + "'");
  return v;
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("factor spec: bad number '" + s + "'");
  }
  if (used != s.size())
    throw ValidationError("factor spec: bad number '" + s + "'");
  return v;
}

}  // namespace

std::string FactorSpec::to_string() const {
  switch (kind) {
    case FactorKind::random:
      return "random";
    case FactorKind::constant:
      return "constant";
    case FactorKind::glauber:
      return "glauber:rounds=" + std::to_string(rounds) +
             ",beta=" + fmt17(beta);
    case FactorKind::edge_majority:
      return "edge_majority:radius=" + std::to_string(radius);
  }
  throw std::logic_error("unreachable");
}

FactorSpec parse_factor(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string head = text.substr(0, colon);
  std::vector<std::pair<std::string, std::string>> params;
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      const std::string item = rest.substr(pos, comma - pos);
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ValidationError("factor spec: expected key=value, got '" + item +
                              "'");
      params.emplace_back(item.substr(0, eq), item.substr(eq + 1));
      pos = comma + 1;
    }
  }

  FactorSpec f;
  if (head == "random" || head == "constant") {
    f.kind = head == "random" ? FactorKind::random : FactorKind::constant;
    if (!params.empty())
      throw ValidationError("factor spec: '" + head + "' takes no parameters");
  } else if (head == "glauber") {
    f.kind = FactorKind::glauber;
    bool have_rounds = false;
    for (const auto& [key, value] : params) {
      if (key == "rounds") {
        f.rounds = static_cast<int>(parse_int(value));
        have_rounds = true;
      } else if (key == "beta") {
        f.beta = parse_real(value);
      } else {
        throw ValidationError("factor spec: unknown glauber key '" + key +
                              "'");
      }
    }
    if (!have_rounds)
      throw ValidationError("factor spec: glauber requires rounds=");
    f.radius = f.rounds;
  } else if (head == "edge_majority") {
    f.kind = FactorKind::edge_majority;
    f.radius = 1;
    for (const auto& [key, value] : params) {
      if (key == "radius")
        f.radius = static_cast<int>(parse_int(value));
      else
        throw ValidationError("factor spec: unknown edge_majority key '" +
                              key + "'");
    }
  } else {
    throw ValidationError("factor spec: unknown kind '" + head + "'");
  }
  validate_factor(f);
  return f;
}

void validate_factor(const FactorSpec& f) {
  switch (f.kind) {
    case FactorKind::random:
    case FactorKind::constant:
      if (f.radius != 0)
        throw ValidationError("factor spec: radius must be 0 for this kind");
      return;
    case FactorKind::glauber:
      if (f.rounds < 0)
        throw ValidationError("factor spec: rounds must be >= 0");
      if (f.radius != f.rounds)
        throw ValidationError("factor spec: glauber radius equals rounds");
      if (!(f.beta > 0.0) || !std::isfinite(f.beta))
        throw ValidationError("factor spec: beta must be positive");
      return;
    case FactorKind::edge_majority:
      if (f.radius < 1)
        throw ValidationError("factor spec: edge_majority radius >= 1");
      return;
  }
  throw std::logic_error("unreachable");
}

Eigen::ArrayXd draw_labels(int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("need at least one vertex");
  Rng rng(seed);
  Eigen::ArrayXd labels(n);
  for (int i = 0; i < n; ++i) labels[i] = rng.unit();
  return labels;
}

SpinConfig run_factor(const Hypergraph& g, const FactorSpec& f,
                      std::uint64_t seed, int threads) {
  return run_factor_with_labels(g, f, draw_labels(g.n, derive_seed(seed, "labels")),
                                threads);
}

SpinConfig run_factor_with_labels(const Hypergraph& g, const FactorSpec& f,
                                  const Eigen::ArrayXd& labels, int threads) {
  validate_factor(f);
  if (labels.size() != g.n)
    throw ValidationError("one label per vertex required");
  const int n = g.n;

  if (f.kind == FactorKind::constant) return SpinConfig::Ones(n);

  SpinConfig sigma = init_spins(labels);
  if (f.kind == FactorKind::random) return sigma;

  const auto inc = incidences(g);

  if (f.kind == FactorKind::edge_majority) {
    SpinConfig out(n);
    parallel_for(
        static_cast<std::size_t>(n),
        [&](std::size_t v) {
          out[static_cast<Eigen::Index>(v)] =
              local_field(g, inc[v], sigma) >= 0 ? 1 : -1;
        },
        threads);
    return out;
  }

  // glauber: the single label expands into per-round uniforms through a
  // stream seeded by the label alone, keeping the rule id-independent
  if (f.rounds == 0) return sigma;
  Eigen::ArrayXXd u(n, f.rounds);
  parallel_for(
      static_cast<std::size_t>(n),
      [&](std::size_t v) {
        Rng stream(static_cast<std::uint64_t>(labels[static_cast<Eigen::Index>(v)] *
                                              kLabelScale));
        for (int r = 0; r < f.rounds; ++r)
          u(static_cast<Eigen::Index>(v), r) = stream.unit();
      },
      threads);

  SpinConfig next(n);
  for (int r = 0; r < f.rounds; ++r) {
    parallel_for(
        static_cast<std::size_t>(n),
        [&](std::size_t v) {
          const auto vi = static_cast<Eigen::Index>(v);
          const double h =
              static_cast<double>(local_field(g, inc[v], sigma));
          const double p = 0.5 * (1.0 + std::tanh(f.beta * h));
          next[vi] = u(vi, r) < p ? 1 : -1;
        },
        threads);
    sigma.swap(next);
  }
  return sigma;
}

Eigen::ArrayXd coupled_labels(const CoupledInstance& ci,
                              const Eigen::ArrayXd& x1,
                              const Eigen::ArrayXd& y) {
  if (x1.size() != ci.n || y.size() != ci.n)
    throw ValidationError("one label per vertex required");
  Eigen::ArrayXd x2(ci.n);
  for (int v = 0; v < ci.n; ++v) x2[v] = ci.shared_vertex[v] ? x1[v] : y[v];
  return x2;
}

std::pair<SpinConfig, SpinConfig> run_factor_coupled(const CoupledInstance& ci,
                                                     const FactorSpec& f,
                                                     std::uint64_t seed,
                                                     int threads) {
  const Eigen::ArrayXd x1 = draw_labels(ci.n, derive_seed(seed, "labels1"));
  const Eigen::ArrayXd y = draw_labels(ci.n, derive_seed(seed, "labels2"));
  const Eigen::ArrayXd x2 = coupled_labels(ci, x1, y);
  return {run_factor_with_labels(coupled_view(ci, 1), f, x1, threads),
          run_factor_with_labels(coupled_view(ci, 2), f, x2, threads)};
}

namespace {

std::vector<int> ball_distances(const Hypergraph& g, int v, int r) {
  std::vector<int> dist(g.n, -1);
  dist[v] = 0;
  std::deque<std::int32_t> frontier{static_cast<std::int32_t>(v)};
  const auto inc = incidences(g);
  while (!frontier.empty()) {
    const std::int32_t u = frontier.front();
    frontier.pop_front();
    if (dist[u] == r) continue;
    for (const auto& [e, slot] : inc[u]) {
      for (std::int32_t w : g.edge(static_cast<std::size_t>(e))) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          frontier.push_back(w);
        }
      }
    }
  }
  return dist;
}

}  // namespace

int LabeledNeighborhood::radius() const {
  const std::vector<int> dist = ball_distances(graph, root, graph.n);
  int best = 0;
  for (int d : dist) best = std::max(best, d);
  return best;
}

LabeledNeighborhood extract_neighborhood(const Hypergraph& g, int v, int r,
                                         const Eigen::ArrayXd& labels) {
  if (v < 0 || v >= g.n) throw ValidationError("root vertex out of range");
  if (r < 0) throw ValidationError("radius must be >= 0");
  if (labels.size() != g.n)
    throw ValidationError("one label per vertex required");

  const std::vector<int> dist = ball_distances(g, v, r);
  LabeledNeighborhood nb;
  std::vector<std::int32_t> local(g.n, -1);
  for (int u = 0; u < g.n; ++u) {
    if (dist[u] < 0) continue;
    local[u] = static_cast<std::int32_t>(nb.original_ids.size());
    nb.original_ids.push_back(u);
  }
  nb.graph.n = static_cast<int>(nb.original_ids.size());
  nb.graph.k = g.k;
  nb.root = local[v];
  nb.labels.resize(nb.graph.n);
  for (int u = 0; u < nb.graph.n; ++u) nb.labels[u] = labels[nb.original_ids[u]];
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    auto edge = g.edge(e);
    const bool inside = std::all_of(edge.begin(), edge.end(),
                                    [&](std::int32_t w) { return local[w] >= 0; });
    if (!inside) continue;
    for (std::int32_t w : edge) nb.graph.edge_data.push_back(local[w]);
  }
  return nb;
}

int eval_at(const LabeledNeighborhood& nb, const FactorSpec& f) {
  return run_factor_with_labels(nb.graph, f, nb.labels, 1)[nb.root];
}

std::pair<int, int> eval_on_tree(const CoupledGwTree& tree,
                                 const FactorSpec& f) {
  validate_factor(f);
  if (tree.depth < f.radius)
    throw ValidationError("tree depth below factor radius");
  const TreeView v1 = tree_view(tree, 1);
  const TreeView v2 = tree_view(tree, 2);
  const SpinConfig s1 = run_factor_with_labels(v1.graph, f, v1.labels, 1);
  const SpinConfig s2 = run_factor_with_labels(v2.graph, f, v2.labels, 1);
  return {s1[v1.root], s2[v2.root]};
}

TreeEstimate tree_overlap_estimate(const FactorSpec& f, int k, double lambda,
                                   double t, int depth, int n_trees,
                                   std::uint64_t seed) {
  validate_factor(f);
  if (depth < f.radius)
    throw ValidationError("tree depth below factor radius");
  if (n_trees < 2) throw ValidationError("need at least two trees");
  double sum_prod = 0.0, sum_sq = 0.0, sum_first = 0.0;
  for (int i = 0; i < n_trees; ++i) {
    const CoupledGwTree tree =
        sample_coupled_gw(k, lambda, t, depth, derive_seed(seed, "tree", i));
    const auto [a, b] = eval_on_tree(tree, f);
    const double p = static_cast<double>(a * b);
    sum_prod += p;
    sum_sq += p * p;
    sum_first += a;
  }
  TreeEstimate est;
  est.mean_product = sum_prod / n_trees;
  est.mean_first = sum_first / n_trees;
  const double var =
      (sum_sq - n_trees * est.mean_product * est.mean_product) /
      (n_trees - 1.0);
  est.se = std::sqrt(std::max(var, 0.0) / n_trees);
  return est;
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(var / (n - 1.0) / n);
  }
  return out;
}

double variance(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / (n - 1.0);
}

}  // namespace

std::vector<CurveRow> overlap_curve(const FactorSpec& f, int k, double lambda,
                                    int n, const std::vector<double>& t_grid,
                                    int reps, std::uint64_t seed,
                                    int threads) {
  validate_factor(f);
  validate_model_params(k, lambda, n);
  if (t_grid.empty()) throw ValidationError("t grid is empty");
  if (reps < 2) throw ValidationError("reps must be >= 2");

  std::vector<CurveRow> rows;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    std::vector<double> rs(reps), mags(reps), cuts(reps);
    parallel_for(
        static_cast<std::size_t>(reps),
        [&](std::size_t rep) {
          const std::size_t idx = ti * static_cast<std::size_t>(reps) + rep;
          const CoupledInstance ci =
              sample_coupled(k, lambda, n, t, derive_seed(seed, "graph", idx));
          const auto [s1, s2] =
              run_factor_coupled(ci, f, derive_seed(seed, "run", idx), 1);
          rs[rep] = overlap(s1, s2);
          mags[rep] = 0.5 * (magnetization(s1) + magnetization(s2));
          cuts[rep] = 0.5 * (cut_density(coupled_view(ci, 1), s1) +
                             cut_density(coupled_view(ci, 2), s2));
        },
        threads);
    CurveRow row;
    row.t = t;
    const MeanSe r = mean_se(rs), m = mean_se(mags), c = mean_se(cuts);
    row.mean_overlap = r.mean;
    row.se_overlap = r.se;
    row.mean_mag = m.mean;
    row.se_mag = m.se;
    row.mean_cut_density = c.mean;
    row.se_cut_density = c.se;
    rows.push_back(row);
  }
  return rows;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  CsvTable table({"t", "mean_overlap", "se_overlap", "mean_mag",
                  "mean_cut_density"});
  for (const CurveRow& row : rows)
    table.add_row({fmt17(row.t), fmt17(row.mean_overlap),
                   fmt17(row.se_overlap), fmt17(row.mean_mag),
                   fmt17(row.mean_cut_density)});
  return table.to_string();
}

std::vector<ConcentrationRow> concentration_experiment(
    const FactorSpec& f, int k, double lambda, const std::vector<int>& n_list,
    int reps, std::uint64_t seed, int threads) {
  validate_factor(f);
  if (n_list.empty()) throw ValidationError("n list is empty");
  if (reps < 10) throw ValidationError("reps must be >= 10");
  for (int n : n_list) validate_model_params(k, lambda, n);

  std::vector<ConcentrationRow> rows;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const int n = n_list[ni];
    std::vector<double> cuts(reps), mags(reps);
    parallel_for(
        static_cast<std::size_t>(reps),
        [&](std::size_t rep) {
          const std::size_t idx = ni * static_cast<std::size_t>(reps) + rep;
          const Hypergraph g =
              sample_er(k, lambda, n, derive_seed(seed, "conc", idx));
          const SpinConfig sigma =
              run_factor(g, f, derive_seed(seed, "crun", idx), 1);
          cuts[rep] = cut_density(g, sigma);
          mags[rep] = magnetization(sigma);
        },
        threads);
    ConcentrationRow row;
    row.n = n;
    row.var_cut_density = variance(cuts);
    row.var_mag = variance(mags);
    rows.push_back(row);
  }
  return rows;
}

std::string concentration_csv(const std::vector<ConcentrationRow>& rows) {
  CsvTable table({"n", "var_cut_density", "var_mag"});
  for (const ConcentrationRow& row : rows)
    table.add_row({std::to_string(row.n), fmt17(row.var_cut_density),
                   fmt17(row.var_mag)});
  return table.to_string();
}

}  // namespace ogp::factors
