#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogp/parisi.hpp"

namespace ogp::gt {

// Terminal condition of the two-system functional: the maximum of
// s1 x1 + s2 x2 + s1 s2 lambda over the four sign choices, which is
// max(|x1 + x2| + lambda, |x1 - x2| - lambda).
double boundary_g(double lambda, double x1, double x2);

// Backward solution of the constrained two-replica flow. On [q, 1) the two
// coordinates carry independent noise and the slice is a full tensor grid;
// on [0, q) they share the noise, so only the diagonal x1 = x2 matters and
// the flow collapses to one dimension.
struct GtSolution {
  double q = 0.0;
  double lambda = 0.0;
  StepGamma gamma;  // order parameter with a breakpoint forced at q
  MixtureXi xi;
  pde::Grid1d grid;
  Eigen::ArrayXd diag;  // two-replica slice at s = q restricted to x1 = x2
  pde::Solution1d psi;  // diagonal continuation on [0, q]; unused when q = 0
  double psi00 = 0.0;   // value at s = 0, x1 = x2 = 0
};

GtSolution solve_gt(const StepGamma& gamma, const MixtureXi& xi, double q,
                    double lambda, const parisi::GridOptions& opt = {});

// Int_0^1 s xi'' gamma + Int_0^q s xi'' gamma, the replica-pair penalty
double gt_correction(const StepGamma& gamma, const MixtureXi& xi, double q);

// T_q(lambda, gamma) = Psi(lambda, 0, 0, 0) - lambda q - penalty. For every
// lambda and admissible gamma this upper-bounds twice the expected best
// energy density over configuration pairs constrained to overlap q.
double gt_functional(const StepGamma& gamma, const MixtureXi& xi, double q,
                     double lambda, const parisi::GridOptions& opt = {});

struct DlambdaEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Monte Carlo estimate of d/dlambda Psi(lambda, 0, 0, 0) at lambda = 0 for
// the half-scaled prefix family: E (d_x Phi_gamma(q, X_q))^2 along the
// controlled diffusion driven on the diagonal.
DlambdaEstimate dlambda_psi_at_zero(const StepGamma& gamma,
                                    const MixtureXi& xi, double q,
                                    int n_paths = 20000, int n_time_steps = 200,
                                    std::uint64_t seed = 1,
                                    const parisi::GridOptions& opt = {});

struct CertificateOptions {
  std::vector<double> q_grid;  // default 0.05, 0.10, ..., 0.95
  std::vector<double> scales{0.0, 0.25, 0.5, 0.75, 1.0};
  double lambda_lo = 0.0;
  double lambda_hi = 2.0;
  int golden_iters = 14;
  double min_margin = 1e-3;
  int precond_paths = 20000;
  std::uint64_t seed = 1;
};

struct CertificateRow {
  double q = 0.0;
  double best_lambda = 0.0;
  double best_scale = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // 2 P* - bound
};

struct GapCertificate {
  bool applicable = false;  // pure k-spin needs k >= 4 so that xi''(0) = 0
  bool found = false;
  double a = 0.0;
  double b = 0.0;    // [a, b]: margin >= min_margin throughout
  double eta = 0.0;  // smallest margin inside [a, b]
  double c = 0.0;    // largest q with the derivative scan strictly below q
  double two_me = 0.0;
  std::vector<CertificateRow> rows;
};

// Scans the q grid, minimizing T_q over lambda (golden section) and over the
// prefix scale family; the tensor stage depends on lambda only, so one 2-d
// solve per probe serves every scale.
GapCertificate gap_certificate(const StepGamma& gamma_star, double p_star,
                               const MixtureXi& xi,
                               const CertificateOptions& copt = {},
                               const parisi::GridOptions& opt = {});

std::string certificate_csv(const GapCertificate& cert);
std::string certificate_json(const GapCertificate& cert);

}  // namespace ogp::gt
