#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ogp/common.hpp"

namespace ogp {

// Spins are +/-1 ints; bit i of a mask set means spin i is +1.
using SpinConfig = Eigen::ArrayXi;

// Directed K-uniform multigraph on vertices 0..n-1. Edges are ordered
// K-tuples, stored flat with stride k; repeats within an edge are allowed.
struct Hypergraph {
  int n = 0;
  int k = 0;
  std::vector<std::int32_t> edge_data;

  std::size_t num_edges() const { return k ? edge_data.size() / k : 0; }
  std::span<const std::int32_t> edge(std::size_t i) const {
    return {edge_data.data() + i * static_cast<std::size_t>(k),
            static_cast<std::size_t>(k)};
  }
};

struct CoupledInstance {
  int n = 0;
  int k = 0;
  double t = 0.0;
  std::vector<std::int32_t> shared_edges;     // flat, stride k
  std::vector<std::int32_t> private_edges_1;  // flat, stride k
  std::vector<std::int32_t> private_edges_2;  // flat, stride k
  std::vector<std::uint8_t> shared_vertex;    // 1 iff incident to a shared edge
};

struct MeanFieldInstance {
  int n = 0;
  int k = 0;
  Eigen::ArrayXd couplings;  // n^k standard normals, lexicographic order
};

// Two coupled Galton-Watson trees sharing a root. view: 0 = present in both
// trees, 1/2 = private to that tree. Shared nodes carry one label (x1 == x2),
// non-shared nodes carry independent labels.
struct GwNode {
  std::uint8_t shared = 0;
  std::uint8_t view = 0;  // 0 = both trees, 1/2 = that tree only
  double x1 = 0.0, x2 = 0.0;
  int depth = 0;
};
struct GwEdge {
  std::uint8_t view = 0;
  std::vector<std::int32_t> vertices;  // k entries, parent first
};
struct CoupledGwTree {
  int k = 0;
  double lambda = 0.0;
  double t = 0.0;
  int depth = 0;
  std::vector<GwNode> nodes;  // node 0 is the root
  std::vector<GwEdge> edges;
};

// One tree's view of a CoupledGwTree, with that tree's vertex labels.
struct TreeView {
  Hypergraph graph;
  Eigen::ArrayXd labels;
  int root = 0;
};

void validate_model_params(int k, double lambda, int n);
void validate_spins(const SpinConfig& sigma, int n);

Hypergraph sample_er(int k, double lambda, int n, std::uint64_t seed);

// theta(sigma, e) = -prod_{slots} sigma_v; +/-1
int theta(const SpinConfig& sigma, std::span<const std::int32_t> edge);
// H(sigma) = sum_e theta(sigma, e); integer in [-|E|, |E|]
std::int64_t hamiltonian(const Hypergraph& g, const SpinConfig& sigma);
double cut_density(const Hypergraph& g, const SpinConfig& sigma);
double magnetization(const SpinConfig& sigma);
double overlap(const SpinConfig& a, const SpinConfig& b);

CoupledInstance sample_coupled(int k, double lambda, int n, double t,
                               std::uint64_t seed);
// which is 1 or 2: shared edges plus that side's private edges
Hypergraph coupled_view(const CoupledInstance& ci, int which);

MeanFieldInstance sample_mean_field(int k, int n, std::uint64_t seed,
                                    std::uint64_t coupling_cap = 100000000ull);
// exact sum over all n^k terms, scaled by n^{-(k-1)/2}
double mf_energy(const MeanFieldInstance& mf, const SpinConfig& sigma);

CoupledGwTree sample_coupled_gw(int k, double lambda, double t, int depth,
                                std::uint64_t seed);
TreeView tree_view(const CoupledGwTree& tree, int which);

SpinConfig spins_from_mask(std::uint64_t mask, int n);

std::string hypergraph_to_json(const Hypergraph& g);
Hypergraph hypergraph_from_json(const std::string& text);
std::string coupled_to_json(const CoupledInstance& ci);
CoupledInstance coupled_from_json(const std::string& text);
std::string spins_to_json(const SpinConfig& sigma);
SpinConfig spins_from_json(const std::string& text);

std::uint64_t hash_hypergraph(const Hypergraph& g);
std::uint64_t hash_mean_field(const MeanFieldInstance& mf);

}  // namespace ogp
