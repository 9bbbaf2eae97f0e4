#include "ogp/gtbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "ogp/common.hpp"
#include "ogp/quadrature.hpp"

namespace ogp::gt {

using nlohmann::json;

double boundary_g(double lambda, double x1, double x2) {
  return std::max(std::abs(x1 + x2) + lambda, std::abs(x1 - x2) - lambda);
}

namespace {

constexpr double kEps = 1e-12;

// g(lambda, -x1, -x2) = g(lambda, x1, x2), and both noise passes commute with
// joint negation, so every tensor slice has F(x) = F(-x). Column-major
// flattening maps (i, j) -> (n-1-i, n-1-j) under index reversal; copy the
// upper half onto the lower half, the same direction the 1-d mirror uses.
void mirror_joint(Eigen::ArrayXXd& m) {
  double* d = m.data();
  const Eigen::Index total = m.size();
  for (Eigen::Index idx = 0; idx < total / 2; ++idx)
    d[idx] = d[total - 1 - idx];
}

// Terminal pass over the first axis, reading g directly so its kink lines
// enter the quadrature exactly instead of through grid interpolation.
Eigen::ArrayXXd first_pass_direct(const pde::Grid1d& g, double lambda,
                                  double m, double sigma, int quad_order) {
  const Quadrature& quad = gauss_hermite(quad_order);
  const int n = g.points();
  const int nq = static_cast<int>(quad.nodes.size());
  Eigen::ArrayXXd out(n, n);
  Eigen::ArrayXXd a(n, nq);
  for (int j = 0; j < n; ++j) {
    const double y = g.x(j);
    for (int k = 0; k < nq; ++k) {
      const double shift = sigma * quad.nodes[k];
      for (int i = 0; i < n; ++i)
        a(i, k) = boundary_g(lambda, g.x(i) + shift, y);
    }
    if (m == 0.0) {
      out.col(j) = (a.matrix() * quad.weights.matrix()).array();
    } else {
      Eigen::ArrayXXd am = a * m;
      Eigen::ArrayXd rowmax = am.rowwise().maxCoeff();
      Eigen::ArrayXd summed =
          ((am.colwise() - rowmax).exp().matrix() * quad.weights.matrix())
              .array();
      out.col(j) = (rowmax + summed.log()) / m;
    }
  }
  return out;
}

// The independent-noise kernel factorizes over the two coordinates, so one
// backward step is an axis-1 pass column by column followed by an axis-2
// pass row by row. Slices are 1-Lipschitz in each coordinate.
void axis1_pass(const pde::Grid1d& g, Eigen::ArrayXXd& m, double mval,
                double sigma, int quad_order) {
  const int n = g.points();
  Eigen::ArrayXd buf(n);
  for (int j = 0; j < n; ++j) {
    buf = m.col(j);
    m.col(j) = pde::backward_step_raw(g, buf, mval, sigma, quad_order, 1.0);
  }
}

void axis2_pass(const pde::Grid1d& g, Eigen::ArrayXXd& m, double mval,
                double sigma, int quad_order) {
  const int n = g.points();
  Eigen::ArrayXd buf(n);
  for (int i = 0; i < n; ++i) {
    buf = m.row(i).transpose();
    m.row(i) =
        pde::backward_step_raw(g, buf, mval, sigma, quad_order, 1.0).transpose();
  }
}

// Slice of the independent-noise stage at s = q, restricted to the diagonal.
// gq must already carry a breakpoint at q (when q is interior).
Eigen::ArrayXd suffix_diagonal(const StepGamma& gq, const MixtureXi& xi,
                               double q, double lambda,
                               const pde::Grid1d& grid, int quad_order) {
  const int n = grid.points();
  if (q >= 1.0 - kEps) {
    Eigen::ArrayXd diag(n);
    for (int i = 0; i < n; ++i)
      diag[i] = boundary_g(lambda, grid.x(i), grid.x(i));
    return diag;
  }
  std::vector<double> bp;
  std::vector<double> vals;
  for (std::size_t i = 0; i < gq.pieces(); ++i) {
    if (gq.breakpoints[i + 1] <= q + kEps) continue;
    if (bp.empty()) bp.push_back(std::max(q, gq.breakpoints[i]));
    vals.push_back(gq.values[i]);
    bp.push_back(gq.breakpoints[i + 1]);
  }
  Eigen::ArrayXXd m;
  for (std::size_t i = vals.size(); i-- > 0;) {
    const double sigma =
        std::sqrt(std::max(0.0, xi.d1(bp[i + 1]) - xi.d1(bp[i])));
    if (i + 1 == vals.size())
      m = first_pass_direct(grid, lambda, vals[i], sigma, quad_order);
    else
      axis1_pass(grid, m, vals[i], sigma, quad_order);
    axis2_pass(grid, m, vals[i], sigma, quad_order);
    mirror_joint(m);
  }
  return m.matrix().diagonal().array();
}

// Continuation on [0, q): the coordinates share the noise, so diagonal
// starting points stay on the diagonal and the restriction d(s, x) =
// Psi(s, x, x) obeys the 1-d recursion with the same gamma values and
// asymptotic slope 2. Returns Psi(0, 0, 0).
double prefix_value(const StepGamma& gq, const MixtureXi& xi, double q,
                    const pde::Grid1d& grid, int quad_order,
                    const Eigen::ArrayXd& diag, pde::Solution1d* keep) {
  if (q <= kEps) return diag[grid.half];
  std::vector<double> bp;
  std::vector<double> vals;
  for (std::size_t i = 0; i < gq.pieces(); ++i) {
    if (gq.breakpoints[i] >= q - kEps) break;
    bp.push_back(gq.breakpoints[i]);
    vals.push_back(gq.values[i]);
  }
  bp.push_back(q);
  pde::Solution1d psi =
      pde::solve_backward(grid, xi, bp, vals, quad_order, 2.0, diag);
  const double v = psi.value00();
  if (keep) *keep = std::move(psi);
  return v;
}

}  // namespace

GtSolution solve_gt(const StepGamma& gamma, const MixtureXi& xi, double q,
                    double lambda, const parisi::GridOptions& opt) {
  gamma.validate();
  if (!(q >= 0.0 && q <= 1.0))
    throw ValidationError("overlap constraint must lie in [0, 1]");
  GtSolution out;
  out.q = q;
  out.lambda = lambda;
  out.gamma = gamma.with_breakpoint(q);
  out.xi = xi;
  out.grid = pde::Grid1d::make(opt.resolved_x_max(xi), opt.h2);
  out.diag = suffix_diagonal(out.gamma, xi, q, lambda, out.grid, opt.quad2);
  out.psi00 =
      prefix_value(out.gamma, xi, q, out.grid, opt.quad2, out.diag, &out.psi);
  return out;
}

double gt_correction(const StepGamma& gamma, const MixtureXi& xi, double q) {
  return parisi::int_s_xi2_gamma(gamma, xi, 0.0, 1.0) +
         parisi::int_s_xi2_gamma(gamma, xi, 0.0, q);
}

double gt_functional(const StepGamma& gamma, const MixtureXi& xi, double q,
                     double lambda, const parisi::GridOptions& opt) {
  return solve_gt(gamma, xi, q, lambda, opt).psi00 - lambda * q -
         gt_correction(gamma, xi, q);
}

DlambdaEstimate dlambda_psi_at_zero(const StepGamma& gamma,
                                    const MixtureXi& xi, double q, int n_paths,
                                    int n_time_steps, std::uint64_t seed,
                                    const parisi::GridOptions& opt) {
  gamma.validate();
  if (!(q > 0.0 && q < 1.0))
    throw ValidationError("derivative scan needs q strictly inside (0, 1)");
  const pde::Grid1d grid = pde::Grid1d::make(opt.resolved_x_max(xi), opt.h);
  const StepGamma gq = gamma.with_breakpoint(q);
  pde::Solution1d full = pde::solve_backward(
      grid, xi, gq.breakpoints, gq.values, opt.quad, 1.0, std::nullopt);

  // On the diagonal the half-scaled prefix drives Phi itself: writing the
  // restriction as 2 phi~ shows phi~ obeys the 1-d flow with parameter
  // 2 (gamma/2) = gamma and boundary Phi(q, .), so phi~ = Phi and the
  // controlled diffusion below is the one the 1-d functional already uses.
  std::vector<double> bp;
  std::vector<double> vals;
  for (std::size_t i = 0; i < gq.pieces(); ++i) {
    if (gq.breakpoints[i] >= q - kEps) break;
    bp.push_back(gq.breakpoints[i]);
    vals.push_back(gq.values[i]);
  }
  bp.push_back(q);
  pde::Solution1d pre =
      pde::solve_backward(grid, xi, bp, vals, opt.quad, 1.0, full.slice_at(q));
  auto samples = parisi::simulate_sde_at(pre, {q}, n_paths, n_time_steps,
                                         derive_seed(seed, "dpsi"));
  const Eigen::ArrayXd sq = samples.front().dphi.square();
  DlambdaEstimate est;
  est.value = sq.mean();
  const double var = (sq - est.value).square().sum() / (sq.size() - 1);
  est.se = std::sqrt(var / sq.size());
  return est;
}

GapCertificate gap_certificate(const StepGamma& gamma_star, double p_star,
                               const MixtureXi& xi,
                               const CertificateOptions& copt,
                               const parisi::GridOptions& opt) {
  gamma_star.validate();
  if (copt.scales.empty()) throw ValidationError("need at least one scale");
  if (!(copt.lambda_hi > copt.lambda_lo))
    throw ValidationError("lambda interval is empty");

  GapCertificate cert;
  cert.applicable = xi.k >= 4;
  cert.two_me = 2.0 * p_star;

  std::vector<double> qs = copt.q_grid;
  if (qs.empty())
    for (int i = 1; i <= 19; ++i) qs.push_back(0.05 * i);

  const pde::Grid1d grid = pde::Grid1d::make(opt.resolved_x_max(xi), opt.h2);

  for (double q : qs) {
    const StepGamma base = gamma_star.with_breakpoint(q);
    double best_t = std::numeric_limits<double>::infinity();
    double best_lam = copt.lambda_lo;
    double best_scale = copt.scales.front();

    auto probe = [&](double lambda) {
      const Eigen::ArrayXd diag =
          suffix_diagonal(base, xi, q, lambda, grid, opt.quad2);
      double local = std::numeric_limits<double>::infinity();
      for (double c0 : copt.scales) {
        const StepGamma gq = gamma_star.scaled_prefix(c0, q);
        const double psi00 =
            prefix_value(gq, xi, q, grid, opt.quad2, diag, nullptr);
        const double t = psi00 - lambda * q - gt_correction(gq, xi, q);
        if (t < best_t) {
          best_t = t;
          best_lam = lambda;
          best_scale = c0;
        }
        local = std::min(local, t);
      }
      return local;
    };

    // golden section on [lambda_lo, lambda_hi]; the bound reported is the
    // minimum over every probe, so unimodality is a speed assumption only
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = copt.lambda_lo;
    double hi = copt.lambda_hi;
    probe(lo);
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = probe(x1);
    double f2 = probe(x2);
    for (int it = 0; it < copt.golden_iters; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = probe(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = probe(x2);
      }
    }

    CertificateRow row;
    row.q = q;
    row.best_lambda = best_lam;
    row.best_scale = best_scale;
    row.bound = best_t;
    row.margin = cert.two_me - best_t;
    cert.rows.push_back(row);
  }

  std::size_t best_lo = 0;
  std::size_t best_len = 0;
  std::size_t run_lo = 0;
  bool in_run = false;
  for (std::size_t i = 0; i < cert.rows.size(); ++i) {
    if (cert.rows[i].margin >= copt.min_margin) {
      if (!in_run) {
        run_lo = i;
        in_run = true;
      }
      const std::size_t len = i - run_lo + 1;
      if (len > best_len) {
        best_len = len;
        best_lo = run_lo;
      }
    } else {
      in_run = false;
    }
  }
  // a positive margin certifies exclusion only when the mixture qualifies;
  // for k = 2 the tilt dips below 2 ME without implying any depletion
  if (cert.applicable && best_len > 0) {
    cert.found = true;
    cert.a = cert.rows[best_lo].q;
    cert.b = cert.rows[best_lo + best_len - 1].q;
    cert.eta = std::numeric_limits<double>::infinity();
    for (std::size_t i = best_lo; i < best_lo + best_len; ++i)
      cert.eta = std::min(cert.eta, cert.rows[i].margin);
  }

  parisi::GapPrecondition pc = parisi::gap_precondition_check(
      gamma_star, xi, 19, copt.precond_paths, copt.seed, opt);
  cert.c = pc.c;
  return cert;
}

std::string certificate_csv(const GapCertificate& cert) {
  CsvTable t({"q", "best_lambda", "best_scale", "bound", "two_me", "margin"});
  for (const CertificateRow& r : cert.rows)
    t.add_row({fmt17(r.q), fmt17(r.best_lambda), fmt17(r.best_scale),
               fmt17(r.bound), fmt17(cert.two_me), fmt17(r.margin)});
  return t.to_string();
}

std::string certificate_json(const GapCertificate& cert) {
  json j;
  if (cert.found) {
    j["a"] = cert.a;
    j["b"] = cert.b;
    j["eta"] = cert.eta;
  } else {
    j["a"] = nullptr;
    j["b"] = nullptr;
    j["eta"] = nullptr;
  }
  if (cert.applicable)
    j["c"] = cert.c;
  else
    j["c"] = nullptr;
  return j.dump(2);
}

}  // namespace ogp::gt
