#include "ogp/model.hpp"

#include <cmath>
#include <deque>

#include "json.hpp"

namespace ogp {

using nlohmann::json;

void validate_model_params(int k, double lambda, int n) {
  if (k < 2 || k % 2 != 0)
    throw ValidationError("k must be an even integer >= 2");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be finite and nonnegative");
  if (n < 1) throw ValidationError("n must be positive");
}

void validate_spins(const SpinConfig& sigma, int n) {
  if (sigma.size() != n)
    throw ValidationError("spin configuration has wrong size");
  for (int i = 0; i < n; ++i)
    if (sigma[i] != 1 && sigma[i] != -1)
      throw ValidationError("spins must be +1 or -1");
}

static void validate_edge_ids(const std::vector<std::int32_t>& flat, int n,
                              int k) {
  if (k && flat.size() % k != 0)
    throw ValidationError("edge list length is not a multiple of k");
  for (std::int32_t v : flat)
    if (v < 0 || v >= n) throw ValidationError("vertex id out of range");
}

Hypergraph sample_er(int k, double lambda, int n, std::uint64_t seed) {
  validate_model_params(k, lambda, n);
  Rng count_rng(derive_seed(seed, "er_edge_count"));
  Rng edge_rng(derive_seed(seed, "er_edges"));
  long m = count_rng.poisson(lambda * n);
  Hypergraph g;
  g.n = n;
  g.k = k;
  g.edge_data.reserve(static_cast<std::size_t>(m) * k);
  for (long e = 0; e < m; ++e)
    for (int s = 0; s < k; ++s)
      g.edge_data.push_back(static_cast<std::int32_t>(edge_rng.below(n)));
  return g;
}

int theta(const SpinConfig& sigma, std::span<const std::int32_t> edge) {
  int prod = 1;
  for (std::int32_t v : edge) prod *= sigma[v];
  return -prod;
}

std::int64_t hamiltonian(const Hypergraph& g, const SpinConfig& sigma) {
  validate_spins(sigma, g.n);
  std::int64_t h = 0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) h += theta(sigma, g.edge(e));
  return h;
}

double cut_density(const Hypergraph& g, const SpinConfig& sigma) {
  return static_cast<double>(hamiltonian(g, sigma)) / g.n;
}

double magnetization(const SpinConfig& sigma) {
  if (sigma.size() == 0) throw ValidationError("empty spin configuration");
  std::int64_t s = 0;
  for (int i = 0; i < sigma.size(); ++i) s += sigma[i];
  return static_cast<double>(s) / static_cast<double>(sigma.size());
}

double overlap(const SpinConfig& a, const SpinConfig& b) {
  if (a.size() != b.size() || a.size() == 0)
    throw ValidationError("overlap needs two configurations of equal size");
  std::int64_t s = 0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return static_cast<double>(s) / static_cast<double>(a.size());
}

CoupledInstance sample_coupled(int k, double lambda, int n, double t,
                               std::uint64_t seed) {
  validate_model_params(k, lambda, n);
  if (!(t >= 0.0 && t <= 1.0))
    throw ValidationError("t must lie in [0, 1]");
  CoupledInstance ci;
  ci.n = n;
  ci.k = k;
  ci.t = t;
  auto draw = [&](const char* count_tag, const char* edge_tag, double mean,
                  std::vector<std::int32_t>& out) {
    Rng count_rng(derive_seed(seed, count_tag));
    Rng edge_rng(derive_seed(seed, edge_tag));
    long m = count_rng.poisson(mean);
    out.reserve(static_cast<std::size_t>(m) * k);
    for (long e = 0; e < m; ++e)
      for (int s = 0; s < k; ++s)
        out.push_back(static_cast<std::int32_t>(edge_rng.below(n)));
  };
  draw("shared_count", "shared_edges", t * lambda * n, ci.shared_edges);
  draw("private1_count", "private1_edges", (1.0 - t) * lambda * n,
       ci.private_edges_1);
  draw("private2_count", "private2_edges", (1.0 - t) * lambda * n,
       ci.private_edges_2);
  ci.shared_vertex.assign(n, 0);
  for (std::int32_t v : ci.shared_edges) ci.shared_vertex[v] = 1;
  return ci;
}

Hypergraph coupled_view(const CoupledInstance& ci, int which) {
  if (which != 1 && which != 2)
    throw ValidationError("coupled_view: which must be 1 or 2");
  Hypergraph g;
  g.n = ci.n;
  g.k = ci.k;
  const auto& priv = which == 1 ? ci.private_edges_1 : ci.private_edges_2;
  g.edge_data.reserve(ci.shared_edges.size() + priv.size());
  g.edge_data.insert(g.edge_data.end(), ci.shared_edges.begin(),
                     ci.shared_edges.end());
  g.edge_data.insert(g.edge_data.end(), priv.begin(), priv.end());
  return g;
}

MeanFieldInstance sample_mean_field(int k, int n, std::uint64_t seed,
                                    std::uint64_t coupling_cap) {
  validate_model_params(k, 1.0, n);
  std::uint64_t total = 1;
  for (int i = 0; i < k; ++i) {
    if (total > coupling_cap / static_cast<std::uint64_t>(n))
      throw ResourceError("mean-field coupling array exceeds cap");
    total *= static_cast<std::uint64_t>(n);
  }
  MeanFieldInstance mf;
  mf.n = n;
  mf.k = k;
  mf.couplings.resize(static_cast<Eigen::Index>(total));
  Rng rng(derive_seed(seed, "couplings"));
  for (std::uint64_t i = 0; i < total; ++i)
    mf.couplings[static_cast<Eigen::Index>(i)] = rng.normal();
  return mf;
}

double mf_energy(const MeanFieldInstance& mf, const SpinConfig& sigma) {
  validate_spins(sigma, mf.n);
  const int n = mf.n, k = mf.k;
  const double scale = std::pow(static_cast<double>(n), -(k - 1) / 2.0);
  // odometer over lexicographic tuples; digit k-1 moves fastest
  std::vector<int> digit(k, 0);
  std::vector<int> prefix(k + 1, 1);  // prefix[j] = prod of spins digits < j
  for (int i = 0; i + 1 < k; ++i) prefix[i + 1] = prefix[i] * sigma[0];
  double sum = 0.0;
  const std::uint64_t total = mf.couplings.size();
  for (std::uint64_t flat = 0;;) {
    int p = prefix[k - 1] * sigma[digit[k - 1]];
    sum += p * mf.couplings[static_cast<Eigen::Index>(flat)];
    if (++flat == total) break;
    int j = k - 1;
    while (digit[j] == n - 1) {
      digit[j] = 0;
      --j;
    }
    ++digit[j];
    for (int i = j; i < k - 1; ++i)
      prefix[i + 1] = prefix[i] * sigma[digit[i]];
  }
  return scale * sum;
}

CoupledGwTree sample_coupled_gw(int k, double lambda, double t, int depth,
                                std::uint64_t seed) {
  validate_model_params(k, lambda, 1);
  if (!(t >= 0.0 && t <= 1.0))
    throw ValidationError("t must lie in [0, 1]");
  if (depth < 0) throw ValidationError("depth must be nonnegative");
  Rng structure(derive_seed(seed, "gw_structure"));
  Rng labels(derive_seed(seed, "gw_labels"));
  CoupledGwTree tree;
  tree.k = k;
  tree.lambda = lambda;
  tree.t = t;
  tree.depth = depth;

  auto add_node = [&](bool shared, std::uint8_t view, int d) {
    GwNode node;
    node.shared = shared ? 1 : 0;
    node.view = view;
    node.depth = d;
    if (shared) {
      node.x1 = node.x2 = labels.unit();
    } else {
      node.x1 = labels.unit();
      node.x2 = labels.unit();
    }
    tree.nodes.push_back(node);
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  };
  auto add_edges = [&](std::int32_t parent, long count, std::uint8_t view,
                       int child_depth, std::deque<std::int32_t>* queue) {
    // new vertices in a shared edge are shared; in a private edge they are
    // non-shared and live only in that edge's tree
    bool children_shared = view == 0;
    for (long e = 0; e < count; ++e) {
      GwEdge edge;
      edge.view = view;
      edge.vertices.push_back(parent);
      for (int c = 0; c < k - 1; ++c) {
        std::int32_t id = add_node(children_shared, view, child_depth);
        edge.vertices.push_back(id);
        if (child_depth < depth) queue->push_back(id);
      }
      tree.edges.push_back(std::move(edge));
    }
  };

  // Root: shared set plus both private sets; the tag only controls labels.
  long root_shared = structure.poisson(t * lambda * k);
  long root_p1 = structure.poisson((1.0 - t) * lambda * k);
  long root_p2 = structure.poisson((1.0 - t) * lambda * k);
  add_node(root_shared > 0, 0, 0);
  std::deque<std::int32_t> queue;
  if (depth >= 1) {
    add_edges(0, root_shared, 0, 1, &queue);
    add_edges(0, root_p1, 1, 1, &queue);
    add_edges(0, root_p2, 2, 1, &queue);
  }
  while (!queue.empty()) {
    std::int32_t id = queue.front();
    queue.pop_front();
    const GwNode node = tree.nodes[id];
    int child_depth = node.depth + 1;
    if (node.shared) {
      long sh = structure.poisson(t * lambda * k);
      long p1 = structure.poisson((1.0 - t) * lambda * k);
      long p2 = structure.poisson((1.0 - t) * lambda * k);
      add_edges(id, sh, 0, child_depth, &queue);
      add_edges(id, p1, 1, child_depth, &queue);
      add_edges(id, p2, 2, child_depth, &queue);
    } else {
      // non-shared vertices grow only inside their own tree
      long m = structure.poisson(lambda * k);
      add_edges(id, m, node.view, child_depth, &queue);
    }
  }
  return tree;
}

TreeView tree_view(const CoupledGwTree& tree, int which) {
  if (which != 1 && which != 2)
    throw ValidationError("tree_view: which must be 1 or 2");
  const auto n_nodes = static_cast<std::int32_t>(tree.nodes.size());
  std::vector<std::int32_t> local(n_nodes, -1);
  TreeView view;
  std::vector<double> labels;
  auto admit = [&](std::int32_t id) {
    if (local[id] < 0) {
      local[id] = static_cast<std::int32_t>(labels.size());
      const GwNode& node = tree.nodes[id];
      labels.push_back(which == 1 ? node.x1 : node.x2);
    }
    return local[id];
  };
  admit(0);
  for (const auto& e : tree.edges) {
    if (e.view != 0 && e.view != which) continue;
    for (std::int32_t v : e.vertices)
      view.graph.edge_data.push_back(admit(v));
  }
  view.graph.k = tree.k;
  view.graph.n = static_cast<int>(labels.size());
  view.labels = Eigen::Map<Eigen::ArrayXd>(labels.data(),
                                           static_cast<Eigen::Index>(labels.size()));
  view.root = 0;
  return view;
}

SpinConfig spins_from_mask(std::uint64_t mask, int n) {
  if (n < 1 || n > 63) throw ValidationError("spins_from_mask: n out of range");
  SpinConfig sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = (mask >> i) & 1 ? 1 : -1;
  return sigma;
}

static json edges_to_json(const std::vector<std::int32_t>& flat, int k) {
  json arr = json::array();
  for (std::size_t e = 0; e + k <= flat.size(); e += k) {
    json tuple = json::array();
    for (int s = 0; s < k; ++s) tuple.push_back(flat[e + s]);
    arr.push_back(std::move(tuple));
  }
  return arr;
}

static std::vector<std::int32_t> edges_from_json(const json& arr, int k) {
  std::vector<std::int32_t> flat;
  if (!arr.is_array()) throw ValidationError("edges must be an array");
  for (const auto& tuple : arr) {
    if (!tuple.is_array() || static_cast<int>(tuple.size()) != k)
      throw ValidationError("each edge must list exactly k vertex ids");
    for (const auto& v : tuple) flat.push_back(v.get<std::int32_t>());
  }
  return flat;
}

std::string hypergraph_to_json(const Hypergraph& g) {
  json j;
  j["n"] = g.n;
  j["k"] = g.k;
  j["edges"] = edges_to_json(g.edge_data, g.k);
  return j.dump();
}

Hypergraph hypergraph_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, true);
  Hypergraph g;
  g.n = j.at("n").get<int>();
  g.k = j.at("k").get<int>();
  validate_model_params(g.k, 0.0, g.n);
  g.edge_data = edges_from_json(j.at("edges"), g.k);
  validate_edge_ids(g.edge_data, g.n, g.k);
  return g;
}

std::string coupled_to_json(const CoupledInstance& ci) {
  json j;
  j["n"] = ci.n;
  j["k"] = ci.k;
  j["t"] = ci.t;
  j["shared_edges"] = edges_to_json(ci.shared_edges, ci.k);
  j["private_edges_1"] = edges_to_json(ci.private_edges_1, ci.k);
  j["private_edges_2"] = edges_to_json(ci.private_edges_2, ci.k);
  return j.dump();
}

CoupledInstance coupled_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, true);
  CoupledInstance ci;
  ci.n = j.at("n").get<int>();
  ci.k = j.at("k").get<int>();
  validate_model_params(ci.k, 0.0, ci.n);
  ci.t = j.at("t").get<double>();
  if (!(ci.t >= 0.0 && ci.t <= 1.0))
    throw ValidationError("t must lie in [0, 1]");
  ci.shared_edges = edges_from_json(j.at("shared_edges"), ci.k);
  ci.private_edges_1 = edges_from_json(j.at("private_edges_1"), ci.k);
  ci.private_edges_2 = edges_from_json(j.at("private_edges_2"), ci.k);
  validate_edge_ids(ci.shared_edges, ci.n, ci.k);
  validate_edge_ids(ci.private_edges_1, ci.n, ci.k);
  validate_edge_ids(ci.private_edges_2, ci.n, ci.k);
  ci.shared_vertex.assign(ci.n, 0);
  for (std::int32_t v : ci.shared_edges) ci.shared_vertex[v] = 1;
  return ci;
}

std::string spins_to_json(const SpinConfig& sigma) {
  json j;
  j["n"] = static_cast<int>(sigma.size());
  json arr = json::array();
  for (int i = 0; i < sigma.size(); ++i) arr.push_back(sigma[i]);
  j["spins"] = std::move(arr);
  return j.dump();
}

SpinConfig spins_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, true);
  int n = j.at("n").get<int>();
  const auto& arr = j.at("spins");
  if (!arr.is_array() || static_cast<int>(arr.size()) != n)
    throw ValidationError("spins array must have length n");
  SpinConfig sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = arr[i].get<int>();
  validate_spins(sigma, n);
  return sigma;
}

std::uint64_t hash_hypergraph(const Hypergraph& g) {
  std::uint64_t h = fnv1a64(&g.n, sizeof g.n);
  h ^= splitmix64(fnv1a64(&g.k, sizeof g.k));
  if (!g.edge_data.empty())
    h ^= splitmix64(fnv1a64(g.edge_data.data(),
                            g.edge_data.size() * sizeof(std::int32_t)));
  return h;
}

std::uint64_t hash_mean_field(const MeanFieldInstance& mf) {
  std::uint64_t h = fnv1a64(&mf.n, sizeof mf.n);
  h ^= splitmix64(fnv1a64(&mf.k, sizeof mf.k));
  if (mf.couplings.size())
    h ^= splitmix64(fnv1a64(mf.couplings.data(),
                            static_cast<std::size_t>(mf.couplings.size()) *
                                sizeof(double)));
  return h;
}

}  // namespace ogp
