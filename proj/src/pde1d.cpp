#include "ogp/pde1d.hpp"

#include <cmath>

#include "ogp/quadrature.hpp"

namespace ogp::pde {

Grid1d Grid1d::make(double x_max, double h) {
  if (!(h > 0.0) || !(x_max > h))
    throw ValidationError("grid needs h > 0 and x_max > h");
  Grid1d g;
  g.h = h;
  g.half = static_cast<int>(std::ceil(x_max / h - 1e-12));
  if (g.points() > 40000) throw ResourceError("grid too fine");
  return g;
}

// Lagrange basis on four consecutive nodes, local coordinate t in [0,3]
static inline void cubic_weights(double t, double w[4]) {
  w[0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
  w[1] = t * (t - 2.0) * (t - 3.0) / 2.0;
  w[2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
  w[3] = t * (t - 1.0) * (t - 2.0) / 6.0;
}

double eval_slice(const Grid1d& g, const Eigen::ArrayXd& v, double edge_slope,
                  double x) {
  const int n = g.points();
  const double xmax = g.x_max();
  if (x <= -xmax) return v[0] + edge_slope * (-xmax - x);
  if (x >= xmax) return v[n - 1] + edge_slope * (x - xmax);
  double fi = (x + xmax) / g.h;
  int base = static_cast<int>(std::floor(fi)) - 1;
  if (base < 0) base = 0;
  if (base > n - 4) base = n - 4;
  double w[4];
  cubic_weights(fi - base, w);
  return w[0] * v[base] + w[1] * v[base + 1] + w[2] * v[base + 2] +
         w[3] * v[base + 3];
}

double eval_deriv(const Grid1d& g, const Eigen::ArrayXd& dv, double edge_slope,
                  double x) {
  const double xmax = g.x_max();
  if (x <= -xmax) return -edge_slope;
  if (x >= xmax) return edge_slope;
  return eval_slice(g, dv, 0.0, x);
}

Eigen::ArrayXd central_diff(const Grid1d& g, const Eigen::ArrayXd& v,
                            double edge_slope) {
  const int n = g.points();
  Eigen::ArrayXd d(n);
  d.segment(1, n - 2) =
      (v.segment(2, n - 2) - v.segment(0, n - 2)) / (2.0 * g.h);
  d[0] = -edge_slope;
  d[n - 1] = edge_slope;
  return d;
}

Eigen::ArrayXd second_diff_smoothed(const Grid1d& g, const Eigen::ArrayXd& v) {
  const int n = g.points();
  const double denom = 9.0 * g.h * g.h;
  Eigen::ArrayXd d = Eigen::ArrayXd::Zero(n);
  d.segment(3, n - 6) = (v.segment(6, n - 6) - 2.0 * v.segment(3, n - 6) +
                         v.segment(0, n - 6)) /
                        denom;
  return d;
}

// out[i] = interpolated/extended v at x_i + delta, vectorized over i
static void fill_shifted(const Grid1d& g, const Eigen::ArrayXd& v,
                         double edge_slope, double delta,
                         Eigen::Ref<Eigen::ArrayXd> out) {
  const int n = g.points();
  const double alpha = delta / g.h;
  const double dfloor = std::floor(alpha);
  const int d = static_cast<int>(dfloor);
  const double t = 1.0 + (alpha - dfloor);
  double w[4];
  cubic_weights(t, w);
  // core region where the whole stencil [i+d-1, i+d+2] is inside the grid
  int lo = std::max(0, 1 - d);
  int hi = std::min(n - 1, n - 3 - d);
  if (lo <= hi) {
    int len = hi - lo + 1;
    out.segment(lo, len) = w[0] * v.segment(lo + d - 1, len) +
                           w[1] * v.segment(lo + d, len) +
                           w[2] * v.segment(lo + d + 1, len) +
                           w[3] * v.segment(lo + d + 2, len);
  } else {
    lo = n;
    hi = -1;
  }
  for (int i = 0; i < lo; ++i)
    out[i] = eval_slice(g, v, edge_slope, g.x(i) + delta);
  for (int i = hi + 1; i < n; ++i)
    out[i] = eval_slice(g, v, edge_slope, g.x(i) + delta);
}

static void mirror_even(const Grid1d& g, Eigen::ArrayXd& v) {
  for (int i = 0; i < g.half; ++i) v[i] = v[2 * g.half - i];
}

Eigen::ArrayXd backward_step_raw(const Grid1d& g, const Eigen::ArrayXd& from,
                                 double m, double sigma, int quad_order,
                                 double edge_slope) {
  if (!(m >= 0.0)) throw ValidationError("gamma value must be nonnegative");
  if (sigma <= 0.0) return from;
  const int n = g.points();
  const Quadrature& quad = gauss_hermite(quad_order);
  const int nq = static_cast<int>(quad.nodes.size());
  Eigen::ArrayXXd a(n, nq);
  for (int k = 0; k < nq; ++k)
    fill_shifted(g, from, edge_slope, sigma * quad.nodes[k], a.col(k));
  Eigen::ArrayXd out(n);
  if (m == 0.0) {
    out = (a.matrix() * quad.weights.matrix()).array();
  } else {
    a *= m;
    Eigen::ArrayXd rowmax = a.rowwise().maxCoeff();
    Eigen::ArrayXd summed =
        ((a.colwise() - rowmax).exp().matrix() * quad.weights.matrix())
            .array();
    out = (rowmax + summed.log()) / m;
  }
  return out;
}

Eigen::ArrayXd backward_step(const Grid1d& g, const Eigen::ArrayXd& from,
                             double m, double sigma, int quad_order,
                             double edge_slope) {
  Eigen::ArrayXd out =
      backward_step_raw(g, from, m, sigma, quad_order, edge_slope);
  mirror_even(g, out);
  return out;
}

Eigen::ArrayXd abs_boundary_step(const Grid1d& g, double m, double sigma) {
  if (!(m >= 0.0)) throw ValidationError("gamma value must be nonnegative");
  const int n = g.points();
  Eigen::ArrayXd out(n);
  if (sigma <= 0.0) {
    for (int i = 0; i < n; ++i) out[i] = std::abs(g.x(i));
    return out;
  }
  for (int i = g.half; i < n; ++i) {
    double x = g.x(i);
    if (m == 0.0) {
      // E|Y| for Y ~ N(x, sigma^2)
      out[i] = sigma * std::sqrt(2.0 / M_PI) *
                   std::exp(-x * x / (2.0 * sigma * sigma)) +
               x * std::erf(x / (sigma * M_SQRT2));
    } else {
      // (1/m) log E exp(m |Y|), stable for x >= 0
      double p_hi = normal_cdf(x / sigma + m * sigma);
      double p_lo = normal_cdf(m * sigma - x / sigma);
      out[i] = x + m * sigma * sigma / 2.0 +
               std::log(p_hi + std::exp(-2.0 * m * x) * p_lo) / m;
    }
  }
  mirror_even(g, out);
  return out;
}

double Solution1d::value00() const { return phi.front()[grid.half]; }

double Solution1d::value_at(std::size_t bp, double x) const {
  return eval_slice(grid, phi.at(bp), edge_slope, x);
}

double Solution1d::deriv_at(std::size_t bp, double x) const {
  return eval_deriv(grid, dphi.at(bp), edge_slope, x);
}

double Solution1d::gamma_at(double s) const {
  if (!(s >= breakpoints.front() && s < breakpoints.back()))
    throw ValidationError("time outside the solved range");
  std::size_t i = 0;
  while (i + 1 < values.size() && s >= breakpoints[i + 1]) ++i;
  return values[i];
}

Eigen::ArrayXd Solution1d::slice_at(double s) const {
  const double eps = 1e-12;
  if (s < breakpoints.front() - eps || s > breakpoints.back() + eps)
    throw ValidationError("time outside the solved range");
  std::size_t i = 0;
  while (i + 1 < values.size() && s >= breakpoints[i + 1] - eps) ++i;
  if (std::abs(s - breakpoints[i]) < eps) return phi[i];
  if (std::abs(s - breakpoints[i + 1]) < eps) return phi[i + 1];
  double sigma = std::sqrt(xi.d1(breakpoints[i + 1]) - xi.d1(s));
  if (i + 2 == breakpoints.size() && abs_boundary)
    return abs_boundary_step(grid, values[i], sigma);
  return backward_step(grid, phi[i + 1], values[i], sigma, quad_order,
                       edge_slope);
}

Solution1d solve_backward(const Grid1d& grid, const MixtureXi& xi,
                          std::vector<double> breakpoints,
                          std::vector<double> values, int quad_order,
                          double edge_slope,
                          const std::optional<Eigen::ArrayXd>& boundary) {
  if (breakpoints.size() != values.size() + 1 || values.empty())
    throw ValidationError("need m+1 breakpoints for m gamma values");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw ValidationError("breakpoints must be strictly increasing");
  Solution1d sol;
  sol.grid = grid;
  sol.xi = xi;
  sol.breakpoints = std::move(breakpoints);
  sol.values = std::move(values);
  sol.edge_slope = edge_slope;
  sol.abs_boundary = !boundary.has_value();
  sol.quad_order = quad_order;
  const std::size_t m = sol.values.size();
  sol.phi.resize(m + 1);
  sol.dphi.resize(m + 1);
  if (boundary) {
    if (boundary->size() != grid.points())
      throw ValidationError("boundary slice does not match the grid");
    sol.phi[m] = *boundary;
  } else {
    sol.phi[m].resize(grid.points());
    for (int i = 0; i < grid.points(); ++i) sol.phi[m][i] = std::abs(grid.x(i));
  }
  for (std::size_t i = m; i-- > 0;) {
    double sigma = std::sqrt(
        std::max(0.0, xi.d1(sol.breakpoints[i + 1]) - xi.d1(sol.breakpoints[i])));
    if (i + 1 == m && sol.abs_boundary)
      sol.phi[i] = abs_boundary_step(grid, sol.values[i], sigma);
    else
      sol.phi[i] =
          backward_step(grid, sol.phi[i + 1], sol.values[i], sigma, quad_order,
                        edge_slope);
  }
  for (std::size_t i = 0; i <= m; ++i)
    sol.dphi[i] = central_diff(grid, sol.phi[i], edge_slope);
  return sol;
}

}  // namespace ogp::pde
