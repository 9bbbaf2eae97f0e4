#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogp/model.hpp"

namespace ogp::oracle {

// Multilinear form of H over +/-1 spins: repeated slots square away, so each
// edge or coupling tuple reduces to the set of vertices hit an odd number of
// times. Terms with equal masks are combined; the all-even part is constant.
// Even k makes every mask even-sized, hence H(sigma) = H(-sigma).
struct ParityExpansion {
  int n = 0;
  double constant = 0.0;
  std::vector<std::uint32_t> masks;  // sorted ascending, unique
  std::vector<double> coeffs;
  std::vector<std::vector<std::int32_t>> vertex_terms;  // term ids touching v

  // direct sum over terms; the independent check for incremental walks
  double energy(std::uint32_t config) const;
};

ParityExpansion parity_expansion(const Hypergraph& g);
ParityExpansion parity_expansion(const MeanFieldInstance& mf);

struct BruteResult {
  double value = 0.0;  // max H, unnormalized
  SpinConfig argmax;
};

// Exact maximum via a Gray-code walk over half the cube (sign symmetry
// covers the rest). Caps: n <= 28 hypergraph, n <= 20 mean-field.
BruteResult brute_force_max(const Hypergraph& g);
BruteResult brute_force_max(const MeanFieldInstance& mf);

// All 2^n energies, bit i of the index = 1 meaning sigma_i = +1. The upper
// half is mirrored from the lower exactly, so complement symmetry is bit-true.
struct EnergyTable {
  int n = 0;
  std::vector<double> values;

  double max_value() const;
  std::uint32_t argmax_mask() const;
};

EnergyTable build_energy_table(const Hypergraph& g);
EnergyTable build_energy_table(const MeanFieldInstance& mf);

// Admissible overlap values: an explicit list or a closed interval. Values
// are matched against the feasible grid (n - 2d)/n within a snap tolerance.
struct OverlapSet {
  bool is_interval = false;
  std::vector<double> values;
  double lo = -1.0;
  double hi = 1.0;

  static OverlapSet of(std::vector<double> vs);
  static OverlapSet range(double lo, double hi);
  bool admits(double r) const;
};

struct PairMax {
  double value = 0.0;    // (H(sigma1) + H(sigma2)) / n
  double overlap = 0.0;  // achieved overlap
  std::uint32_t first = 0;
  std::uint32_t second = 0;
};

// Exact maximum of the coupled energy over pairs with overlap in `set`,
// scanning Hamming distance classes; n <= 15. Deterministic argmax
// tie-breaking regardless of thread count.
PairMax constrained_pair_max(const EnergyTable& table, const OverlapSet& set,
                             int threads = 0);

struct AnnealParams {
  long long flips_per_spin = 2000;
  double t_start = 2.0;
  double t_end = 0.01;
  int restarts = 50;
};

struct SampleResult {
  double best = 0.0;       // best H across restarts
  double threshold = 0.0;  // (1 - eta) * best
  std::vector<SpinConfig> configs;  // restart bests above threshold, deduped
};

// Metropolis single-flip annealing with geometric cooling; one candidate per
// restart, kept when its energy clears the relative threshold.
SampleResult near_optimal_sample(const Hypergraph& g, double eta,
                                 const AnnealParams& params, std::uint64_t seed,
                                 int threads = 0);
SampleResult near_optimal_sample(const MeanFieldInstance& mf, double eta,
                                 const AnnealParams& params, std::uint64_t seed,
                                 int threads = 0);

struct OverlapHistogram {
  std::vector<double> edges;      // num_bins + 1, spanning [0, 1]
  std::vector<long long> counts;  // per bin, |R| = 1 lands in the last bin
  double threshold = 0.0;

  void add(double abs_overlap);
  long long pairs() const;
  std::string csv_string() const;
};

OverlapHistogram make_histogram(int num_bins, double threshold);

struct ScanOptions {
  double eta = 0.02;
  int num_bins = 50;
  bool exhaustive = false;  // enumerate every threshold-clearing config
  AnnealParams anneal;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct ScanResult {
  OverlapHistogram hist;
  double best = 0.0;
  double threshold = 0.0;
  std::size_t num_samples = 0;
  bool exhaustive = false;
  std::uint64_t instance_hash = 0;
  std::uint64_t seed = 0;

  std::string sidecar_json() const;
};

// |overlap| over all unordered pairs of near-optimal configurations, either
// from annealing samples or from the full table (exhaustive mode).
ScanResult overlap_gap_scan(const Hypergraph& g, const ScanOptions& opt);
ScanResult overlap_gap_scan(const MeanFieldInstance& mf,
                            const ScanOptions& opt);

struct DilutionRow {
  double lambda = 0.0;
  double mean_density = 0.0;  // mean of (max H)/n over reps
  double se = 0.0;
  double ratio = 0.0;  // mean_density / sqrt(lambda), NaN when lambda = 0
};

struct DilutionOptions {
  int reps = 5;
  bool exact = true;  // false: annealing lower bound, any n
  AnnealParams anneal;
  int threads = 0;
};

// Ground-state density versus dilution. Within a rep the edge sets are
// coupled: ascending lambda adds a Poisson increment of fresh edges, so each
// marginal is the target model and the columns are directly comparable.
std::vector<DilutionRow> dilution_compare(int k, std::vector<double> lambdas,
                                          int n, std::uint64_t seed,
                                          const DilutionOptions& opt = {});

}  // namespace ogp::oracle
