#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ogp/step_gamma.hpp"

namespace ogp::pde {

// Symmetric uniform grid with a node exactly at 0.
struct Grid1d {
  double h = 0.02;
  int half = 500;

  int points() const { return 2 * half + 1; }
  double x(int i) const { return (i - half) * h; }
  double x_max() const { return half * h; }
  static Grid1d make(double x_max, double h);
};

// Cubic Lagrange between nodes; linear continuation with the given slope
// beyond the grid (slices are asymptotically linear, |slope| is their
// Lipschitz constant).
double eval_slice(const Grid1d& g, const Eigen::ArrayXd& v, double edge_slope,
                  double x);
double eval_deriv(const Grid1d& g, const Eigen::ArrayXd& dv, double edge_slope,
                  double x);
Eigen::ArrayXd central_diff(const Grid1d& g, const Eigen::ArrayXd& v,
                            double edge_slope);
// (v(x+3h) - 2v(x) + v(x-3h)) / (3h)^2, a smoothed second difference
Eigen::ArrayXd second_diff_smoothed(const Grid1d& g, const Eigen::ArrayXd& v);

// One backward Cole-Hopf step over an interval with constant gamma value m:
// out(x) = (1/m) log E exp(m from(x + sigma Z)), plain expectation when m=0.
// backward_step additionally mirrors the result even; the raw variant is for
// slices that are not even in one coordinate alone.
Eigen::ArrayXd backward_step(const Grid1d& g, const Eigen::ArrayXd& from,
                             double m, double sigma, int quad_order,
                             double edge_slope);
Eigen::ArrayXd backward_step_raw(const Grid1d& g, const Eigen::ArrayXd& from,
                                 double m, double sigma, int quad_order,
                                 double edge_slope);

// Same step started from the exact |x| boundary (closed form, no quadrature).
Eigen::ArrayXd abs_boundary_step(const Grid1d& g, double m, double sigma);

// Backward solution of d_s phi = -(xi''/2)(phi_xx + gamma phi_x^2) over
// [breakpoints.front(), breakpoints.back()], gamma piecewise constant.
struct Solution1d {
  Grid1d grid;
  MixtureXi xi;
  std::vector<double> breakpoints;
  std::vector<double> values;  // gamma on [breakpoints[i], breakpoints[i+1])
  double edge_slope = 1.0;
  bool abs_boundary = false;
  int quad_order = 64;
  std::vector<Eigen::ArrayXd> phi;   // phi[i] is the slice at breakpoints[i]
  std::vector<Eigen::ArrayXd> dphi;  // central differences of phi[i]

  double value00() const;
  double value_at(std::size_t bp, double x) const;
  double deriv_at(std::size_t bp, double x) const;
  double gamma_at(double s) const;
  // slice at an arbitrary time, recomputed from the breakpoint to its right
  Eigen::ArrayXd slice_at(double s) const;
};

Solution1d solve_backward(const Grid1d& grid, const MixtureXi& xi,
                          std::vector<double> breakpoints,
                          std::vector<double> values, int quad_order,
                          double edge_slope,
                          const std::optional<Eigen::ArrayXd>& boundary);

}  // namespace ogp::pde
