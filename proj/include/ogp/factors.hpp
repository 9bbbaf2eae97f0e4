#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ogp/model.hpp"

namespace ogp::factors {

enum class FactorKind { random, glauber, edge_majority, constant };

// Local rule mapping a vertex's labelled radius-r neighborhood to a spin.
// radius is 0 for random/constant, equals rounds for glauber, and is
// user-set metadata (>= 1) for edge_majority, whose rule reads distance 1.
struct FactorSpec {
  FactorKind kind = FactorKind::random;
  int radius = 0;
  int rounds = 0;     // glauber only
  double beta = 1.0;  // glauber only

  std::string to_string() const;
};

// Accepts "random", "constant", "glauber:rounds=R,beta=B",
// "edge_majority" and "edge_majority:radius=R".
FactorSpec parse_factor(const std::string& text);
void validate_factor(const FactorSpec& f);

// Labels are i.i.d. uniform [0,1), one per vertex, drawn from the seed.
Eigen::ArrayXd draw_labels(int n, std::uint64_t seed);

SpinConfig run_factor(const Hypergraph& g, const FactorSpec& f,
                      std::uint64_t seed, int threads = 0);
// Deterministic in (g, f, labels); vertex ids enter only through the graph
// structure, which is what makes relabeling tests exact.
SpinConfig run_factor_with_labels(const Hypergraph& g, const FactorSpec& f,
                                  const Eigen::ArrayXd& labels,
                                  int threads = 0);

// Second label stream: copies the first on vertices touching a shared edge,
// fresh uniforms elsewhere.
Eigen::ArrayXd coupled_labels(const CoupledInstance& ci,
                              const Eigen::ArrayXd& x1,
                              const Eigen::ArrayXd& y);

std::pair<SpinConfig, SpinConfig> run_factor_coupled(const CoupledInstance& ci,
                                                     const FactorSpec& f,
                                                     std::uint64_t seed,
                                                     int threads = 0);

// Rooted labelled ball of radius r; vertices are renumbered locally while
// edges keep their original relative order, so factor evaluation inside the
// ball reproduces the global computation at the root exactly.
struct LabeledNeighborhood {
  Hypergraph graph;
  Eigen::ArrayXd labels;
  int root = 0;
  std::vector<std::int32_t> original_ids;

  int radius() const;  // max distance from the root
};

LabeledNeighborhood extract_neighborhood(const Hypergraph& g, int v, int r,
                                         const Eigen::ArrayXd& labels);

int eval_at(const LabeledNeighborhood& nb, const FactorSpec& f);

// Factor outputs at the two roots of a coupled tree; requires
// tree.depth >= f.radius so the root's light cone is present.
std::pair<int, int> eval_on_tree(const CoupledGwTree& tree,
                                 const FactorSpec& f);

struct TreeEstimate {
  double mean_product = 0.0;  // estimate of E sigma1 sigma2 at the root
  double se = 0.0;
  double mean_first = 0.0;  // estimate of E sigma1
};

TreeEstimate tree_overlap_estimate(const FactorSpec& f, int k, double lambda,
                                   double t, int depth, int n_trees,
                                   std::uint64_t seed);

struct CurveRow {
  double t = 0.0;
  double mean_overlap = 0.0;
  double se_overlap = 0.0;
  double mean_mag = 0.0;
  double mean_cut_density = 0.0;
  double se_mag = 0.0;  // not emitted in the CSV
  double se_cut_density = 0.0;
};

// reps coupled runs per t; overlap, magnetization, and cut density are
// averaged over the two replicas of each run.
std::vector<CurveRow> overlap_curve(const FactorSpec& f, int k, double lambda,
                                    int n, const std::vector<double>& t_grid,
                                    int reps, std::uint64_t seed,
                                    int threads = 0);

std::string curve_csv(const std::vector<CurveRow>& rows);

struct ConcentrationRow {
  int n = 0;
  double var_cut_density = 0.0;
  double var_mag = 0.0;
};

std::vector<ConcentrationRow> concentration_experiment(
    const FactorSpec& f, int k, double lambda, const std::vector<int>& n_list,
    int reps, std::uint64_t seed, int threads = 0);

std::string concentration_csv(const std::vector<ConcentrationRow>& rows);

}  // namespace ogp::factors
