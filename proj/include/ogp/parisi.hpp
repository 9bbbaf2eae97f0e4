#pragma once

#include <cstdint>
#include <vector>

#include "ogp/pde1d.hpp"
#include "ogp/step_gamma.hpp"

namespace ogp::parisi {

// Defaults chosen so halving h or doubling quad moves Phi(0,0) by < 1e-4.
// h2/quad2 are the coarser settings used by the two-system (tensor) solver.
struct GridOptions {
  double x_max = 0.0;  // 0 means auto: 4 sqrt(xi'(1)) + 2
  double h = 0.02;
  int quad = 64;
  double h2 = 0.04;
  int quad2 = 32;

  double resolved_x_max(const MixtureXi& xi) const;
};

struct PdeSolution {
  StepGamma gamma;
  MixtureXi xi;
  pde::Solution1d sol;

  double phi00() const { return sol.value00(); }
};

PdeSolution solve_parisi_pde(const StepGamma& gamma, const MixtureXi& xi,
                             const GridOptions& opt = {});

// (1/2) Int_0^1 s xi''(s) gamma(s) ds = (1/2) sum m_i (k-1)(s_i^k - s_{i-1}^k)
double correction_term(const StepGamma& gamma, const MixtureXi& xi);

// Int_a^b xi''(s) gamma(s) ds, exact over the step pieces
double int_xi2_gamma(const StepGamma& gamma, const MixtureXi& xi, double a,
                     double b);

// Int_a^b s xi''(s) gamma(s) ds, exact over the step pieces
double int_s_xi2_gamma(const StepGamma& gamma, const MixtureXi& xi, double a,
                       double b);

double parisi_functional(const StepGamma& gamma, const MixtureXi& xi,
                         const GridOptions& opt = {});

struct MinimizeOptions {
  int restarts = 8;
  int max_iters = 300;  // Nelder-Mead budget, grows with dimension
  double m_cap = 100.0;
  GridOptions grid;
};

struct MinimizeResult {
  StepGamma gamma;
  double value;
  // ladder[p-1] = best value over all levels up to p pieces; the step
  // classes nest, so the ladder is nonincreasing by construction
  std::vector<double> ladder;
};

MinimizeResult minimize_parisi(const MixtureXi& xi, int num_steps,
                               std::uint64_t seed,
                               const MinimizeOptions& opt = {});

// Per-path state of the controlled diffusion at one checkpoint time q:
// dX = xi'' gamma dPhi dt + sqrt(xi'') dW from X(0) = 0, drift read from
// recomputed slices. cost accumulates (1/2) Int xi'' gamma (dPhi)^2 dt, so
// mean(value - cost) estimates Phi(0,0) at the optimal control.
struct SdeSample {
  double s = 0.0;
  Eigen::ArrayXd x;
  Eigen::ArrayXd dphi;
  Eigen::ArrayXd value;
  Eigen::ArrayXd cost;
};

// checkpoints must be strictly increasing inside (0, last breakpoint];
// slices extend linearly beyond the grid, so paths never fault
std::vector<SdeSample> simulate_sde_at(const pde::Solution1d& sol,
                                       const std::vector<double>& checkpoints,
                                       int n_paths, int n_time_steps,
                                       std::uint64_t seed);

SdeSample simulate_sde(const PdeSolution& pde, double q, int n_paths,
                       int n_time_steps, std::uint64_t seed);

struct ConsistencyRow {
  double s;
  double first_order;   // E (dPhi(s, X_s))^2, equals s on the support
  double se;            // MC standard error of first_order
  double second_order;  // xi''(s) E (dxxPhi(s, X_s))^2, stays <= 1
};

// residuals of the stationarity system at the jump points of gamma_star, or
// at explicit probe times when given (ascending, within [0,1])
std::vector<ConsistencyRow> check_consistency(
    const StepGamma& gamma_star, const MixtureXi& xi, int n_paths = 20000,
    int n_time_steps = 200, std::uint64_t seed = 1, const GridOptions& opt = {},
    const std::vector<double>& probe_points = {});

struct GapPrecondition {
  bool applicable = false;  // k = 2 has xi''(0) > 0 and is excluded
  double c = 0.0;           // largest scanned q with E(dPhi)^2 < q throughout
  std::vector<double> q_grid;
  std::vector<double> value;
  std::vector<double> se;
};

GapPrecondition gap_precondition_check(const StepGamma& gamma_star,
                                       const MixtureXi& xi,
                                       int scan_points = 19,
                                       int n_paths = 20000,
                                       std::uint64_t seed = 1,
                                       const GridOptions& opt = {});

}  // namespace ogp::parisi
