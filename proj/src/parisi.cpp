#include "ogp/parisi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ogp/common.hpp"

namespace ogp::parisi {

double GridOptions::resolved_x_max(const MixtureXi& xi) const {
  if (x_max > 0.0) return x_max;
  return 4.0 * std::sqrt(xi.d1(1.0)) + 2.0;
}

PdeSolution solve_parisi_pde(const StepGamma& gamma, const MixtureXi& xi,
                             const GridOptions& opt) {
  gamma.validate();
  pde::Grid1d grid = pde::Grid1d::make(opt.resolved_x_max(xi), opt.h);
  pde::Solution1d sol =
      pde::solve_backward(grid, xi, gamma.breakpoints, gamma.values, opt.quad,
                          1.0, std::nullopt);
  return PdeSolution{gamma, xi, std::move(sol)};
}

double correction_term(const StepGamma& gamma, const MixtureXi& xi) {
  return 0.5 * int_s_xi2_gamma(gamma, xi, 0.0, 1.0);
}

double int_s_xi2_gamma(const StepGamma& gamma, const MixtureXi& xi, double a,
                       double b) {
  // s xi''(s) = k(k-1) s^(k-1) integrates to (k-1) s^k
  double acc = 0.0;
  for (std::size_t i = 0; i < gamma.pieces(); ++i) {
    const double lo = std::max(a, gamma.breakpoints[i]);
    const double hi = std::min(b, gamma.breakpoints[i + 1]);
    if (hi > lo)
      acc += gamma.values[i] * (xi.k - 1) *
             (std::pow(hi, xi.k) - std::pow(lo, xi.k));
  }
  return acc;
}

double int_xi2_gamma(const StepGamma& gamma, const MixtureXi& xi, double a,
                     double b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < gamma.pieces(); ++i) {
    const double lo = std::max(a, gamma.breakpoints[i]);
    const double hi = std::min(b, gamma.breakpoints[i + 1]);
    if (hi > lo) acc += gamma.values[i] * (xi.d1(hi) - xi.d1(lo));
  }
  return acc;
}

double parisi_functional(const StepGamma& gamma, const MixtureXi& xi,
                         const GridOptions& opt) {
  return solve_parisi_pde(gamma, xi, opt).phi00() - correction_term(gamma, xi);
}

namespace {

constexpr double kThetaClamp = 40.0;
constexpr double kMinWidth = 1e-6;
constexpr double kPenalty = 1e12;

double clamped_exp(double t) {
  return std::exp(std::clamp(t, -kThetaClamp, kThetaClamp));
}

// theta = [u_1..u_{p-1} | v_1..v_p]: interval widths are exp(u_j) with the
// last width pinned at 1, values are prefix sums of exp(v_j) capped at m_cap
bool gamma_from_theta(const Eigen::VectorXd& theta, int pieces, double m_cap,
                      StepGamma& out) {
  const int p = pieces;
  std::vector<double> widths(p);
  double total = 1.0;
  for (int j = 0; j + 1 < p; ++j) {
    widths[j] = clamped_exp(theta[j]);
    total += widths[j];
  }
  widths[p - 1] = 1.0;

  out.breakpoints.assign(1, 0.0);
  double run = 0.0;
  for (int j = 0; j + 1 < p; ++j) {
    run += widths[j] / total;
    out.breakpoints.push_back(run);
  }
  out.breakpoints.push_back(1.0);
  for (int i = 1; i <= p; ++i)
    if (out.breakpoints[i] - out.breakpoints[i - 1] < kMinWidth) return false;

  out.values.assign(p, 0.0);
  double m = 0.0;
  for (int j = 0; j < p; ++j) {
    m += clamped_exp(theta[p - 1 + j]);
    out.values[j] = std::min(m, m_cap);
  }
  return true;
}

Eigen::VectorXd theta_from_gamma(const StepGamma& g) {
  const int p = static_cast<int>(g.pieces());
  Eigen::VectorXd theta(2 * p - 1);
  const double last = g.breakpoints[p] - g.breakpoints[p - 1];
  for (int j = 0; j + 1 < p; ++j)
    theta[j] =
        std::log(std::max(g.breakpoints[j + 1] - g.breakpoints[j], kMinWidth) /
                 last);
  double prev = 0.0;
  for (int j = 0; j < p; ++j) {
    theta[p - 1 + j] = std::log(std::max(g.values[j] - prev, 1e-8));
    prev = g.values[j];
  }
  return theta;
}

StepGamma refine_widest(const StepGamma& g) {
  std::size_t widest = 0;
  double w = 0.0;
  for (std::size_t i = 0; i < g.pieces(); ++i) {
    const double wi = g.breakpoints[i + 1] - g.breakpoints[i];
    if (wi > w) {
      w = wi;
      widest = i;
    }
  }
  StepGamma out = g;
  const double mid = 0.5 * (g.breakpoints[widest] + g.breakpoints[widest + 1]);
  out.breakpoints.insert(out.breakpoints.begin() + widest + 1, mid);
  out.values.insert(out.values.begin() + widest, g.values[widest]);
  return out;
}

// Lagarias et al. variant; returns the best value, x holds the best point
double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                   Eigen::VectorXd& x, double step, int max_iters,
                   double tol) {
  const int d = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> pts(d + 1, x);
  std::vector<double> val(d + 1);
  for (int i = 1; i <= d; ++i) pts[i][i - 1] += step;
  for (int i = 0; i <= d; ++i) val[i] = f(pts[i]);

  std::vector<int> ord(d + 1);
  for (int it = 0; it < max_iters; ++it) {
    for (int i = 0; i <= d; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(),
              [&](int a, int b) { return val[a] < val[b]; });
    if (val[ord[d]] - val[ord[0]] < tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[ord[i]];
    centroid /= d;
    const int worst = ord[d];

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    if (fr < val[ord[0]]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        val[worst] = fe;
      } else {
        pts[worst] = xr;
        val[worst] = fr;
      }
    } else if (fr < val[ord[d - 1]]) {
      pts[worst] = xr;
      val[worst] = fr;
    } else {
      bool shrink = false;
      if (fr < val[worst]) {
        const Eigen::VectorXd xc = centroid + 0.5 * (xr - centroid);
        const double fc = f(xc);
        if (fc <= fr) {
          pts[worst] = xc;
          val[worst] = fc;
        } else {
          shrink = true;
        }
      } else {
        const Eigen::VectorXd xc = centroid - 0.5 * (centroid - pts[worst]);
        const double fc = f(xc);
        if (fc < val[worst]) {
          pts[worst] = xc;
          val[worst] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        int best = ord[0];
        for (int i = 0; i <= d; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          val[i] = f(pts[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= d; ++i)
    if (val[i] < val[best]) best = i;
  x = pts[best];
  return val[best];
}

}  // namespace

MinimizeResult minimize_parisi(const MixtureXi& xi, int num_steps,
                               std::uint64_t seed,
                               const MinimizeOptions& opt) {
  if (num_steps < 1) throw ValidationError("num_steps must be >= 1");

  MinimizeResult result;
  result.value = std::numeric_limits<double>::infinity();

  StepGamma warm = StepGamma::constant(1.0);
  for (int p = 1; p <= num_steps; ++p) {
    if (p > 1) warm = refine_widest(warm);
    const Eigen::VectorXd theta0 = theta_from_gamma(warm);
    const int d = static_cast<int>(theta0.size());

    auto objective = [&](const Eigen::VectorXd& theta) {
      StepGamma g;
      if (!gamma_from_theta(theta, p, opt.m_cap, g)) return kPenalty;
      return parisi_functional(g, xi, opt.grid);
    };

    const int iters = opt.max_iters + 150 * d;
    double level_best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd level_arg = theta0;
    for (int r = 0; r < opt.restarts; ++r) {
      Eigen::VectorXd x = theta0;
      if (r > 0) {
        Rng rng(derive_seed(seed, "nm",
                            static_cast<std::uint64_t>(p) * 1024 +
                                static_cast<std::uint64_t>(r)));
        for (int j = 0; j < d; ++j) x[j] += 0.6 * rng.normal();
      }
      const double v = nelder_mead(objective, x, 0.5, iters, 1e-10);
      if (v < level_best) {
        level_best = v;
        level_arg = x;
      }
    }

    StepGamma level_gamma;
    if (gamma_from_theta(level_arg, p, opt.m_cap, level_gamma) &&
        level_best < result.value) {
      result.value = level_best;
      result.gamma = level_gamma;
    }
    result.ladder.push_back(result.value);
    if (level_best < kPenalty) warm = level_gamma;
  }
  return result;
}

std::vector<SdeSample> simulate_sde_at(const pde::Solution1d& sol,
                                       const std::vector<double>& checkpoints,
                                       int n_paths, int n_time_steps,
                                       std::uint64_t seed) {
  if (checkpoints.empty()) throw ValidationError("no checkpoints");
  const double s_end = checkpoints.back();
  if (s_end <= 0.0 || s_end > sol.breakpoints.back() + 1e-12)
    throw ValidationError("checkpoint beyond the solved interval");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] <= 0.0 ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1]))
      throw ValidationError("checkpoints must be strictly increasing in (0,1]");
  }
  if (n_paths < 1 || n_time_steps < 1)
    throw ValidationError("need at least one path and one time step");

  StepGamma gamma{sol.breakpoints, sol.values};
  const MixtureXi& xi = sol.xi;

  // time nodes: uniform refinement plus every checkpoint and every gamma
  // breakpoint, so no step straddles a jump of the drift coefficient
  std::vector<double> times;
  for (int j = 0; j <= n_time_steps; ++j)
    times.push_back(s_end * j / n_time_steps);
  for (double c : checkpoints) times.push_back(c);
  for (double b : sol.breakpoints)
    if (b > 0.0 && b < s_end) times.push_back(b);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return b - a < 1e-12; }),
              times.end());

  Rng rng(derive_seed(seed, "sde"));
  Eigen::ArrayXd x = Eigen::ArrayXd::Zero(n_paths);
  Eigen::ArrayXd cost = Eigen::ArrayXd::Zero(n_paths);

  std::vector<SdeSample> out;
  std::size_t next_cp = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    const Eigen::ArrayXd phi = sol.slice_at(t);
    const Eigen::ArrayXd dphi = pde::central_diff(sol.grid, phi, sol.edge_slope);

    if (next_cp < checkpoints.size() &&
        std::abs(t - checkpoints[next_cp]) < 1e-12) {
      SdeSample sample;
      sample.s = checkpoints[next_cp];
      sample.x = x;
      sample.cost = cost;
      sample.dphi.resize(n_paths);
      sample.value.resize(n_paths);
      for (int p = 0; p < n_paths; ++p) {
        sample.dphi[p] = pde::eval_deriv(sol.grid, dphi, sol.edge_slope, x[p]);
        sample.value[p] = pde::eval_slice(sol.grid, phi, sol.edge_slope, x[p]);
      }
      out.push_back(std::move(sample));
      ++next_cp;
    }
    if (j + 1 == times.size()) break;

    const double t1 = times[j + 1];
    // exact coefficient integrals over the step keep the gamma = 0 case an
    // unbiased Gaussian regardless of the step count
    const double drift_w = int_xi2_gamma(gamma, xi, t, t1);
    const double noise_sd = std::sqrt(std::max(0.0, xi.d1(t1) - xi.d1(t)));
    for (int p = 0; p < n_paths; ++p) {
      const double d = pde::eval_deriv(sol.grid, dphi, sol.edge_slope, x[p]);
      cost[p] += 0.5 * drift_w * d * d;
      x[p] += drift_w * d + noise_sd * rng.normal();
    }
  }
  return out;
}

SdeSample simulate_sde(const PdeSolution& pde, double q, int n_paths,
                       int n_time_steps, std::uint64_t seed) {
  auto samples = simulate_sde_at(pde.sol, {q}, n_paths, n_time_steps, seed);
  return std::move(samples.front());
}

std::vector<ConsistencyRow> check_consistency(const StepGamma& gamma_star,
                                              const MixtureXi& xi,
                                              int n_paths, int n_time_steps,
                                              std::uint64_t seed,
                                              const GridOptions& opt,
                                              const std::vector<double>& probe_points) {
  PdeSolution pde = solve_parisi_pde(gamma_star, xi, opt);
  std::vector<double> support =
      probe_points.empty() ? gamma_star.support_points() : probe_points;

  std::vector<ConsistencyRow> rows;
  std::vector<double> positive;
  for (double s : support) {
    if (s > 0.0)
      positive.push_back(s);
    else
      rows.push_back({0.0, 0.0, 0.0, xi.d2(0.0) *
                                         pde.sol.deriv_at(0, 0.0) *
                                         pde.sol.deriv_at(0, 0.0)});
  }
  if (positive.empty()) return rows;

  auto samples =
      simulate_sde_at(pde.sol, positive, n_paths, n_time_steps, seed);
  for (const SdeSample& sample : samples) {
    const Eigen::ArrayXd sq = sample.dphi.square();
    const double mean = sq.mean();
    const double var = (sq - mean).square().sum() / (sq.size() - 1);
    const double se = std::sqrt(var / sq.size());

    const Eigen::ArrayXd phi = pde.sol.slice_at(sample.s);
    const Eigen::ArrayXd d2 = pde::second_diff_smoothed(pde.sol.grid, phi);
    double acc = 0.0;
    for (int p = 0; p < sample.x.size(); ++p) {
      const double v = pde::eval_slice(pde.sol.grid, d2, 0.0, sample.x[p]);
      acc += v * v;
    }
    rows.push_back(
        {sample.s, mean, se, xi.d2(sample.s) * acc / sample.x.size()});
  }
  return rows;
}

GapPrecondition gap_precondition_check(const StepGamma& gamma_star,
                                       const MixtureXi& xi, int scan_points,
                                       int n_paths, std::uint64_t seed,
                                       const GridOptions& opt) {
  GapPrecondition out;
  if (xi.k < 4) return out;  // needs xi''(0) = 0
  out.applicable = true;
  if (scan_points < 1) throw ValidationError("scan_points must be >= 1");

  PdeSolution pde = solve_parisi_pde(gamma_star, xi, opt);
  for (int i = 1; i <= scan_points; ++i)
    out.q_grid.push_back(static_cast<double>(i) / (scan_points + 1));

  auto samples = simulate_sde_at(pde.sol, out.q_grid, n_paths,
                                 10 * (scan_points + 1), seed);
  for (const SdeSample& sample : samples) {
    const Eigen::ArrayXd sq = sample.dphi.square();
    const double mean = sq.mean();
    const double var = (sq - mean).square().sum() / (sq.size() - 1);
    out.value.push_back(mean);
    out.se.push_back(std::sqrt(var / sq.size()));
  }
  for (std::size_t i = 0; i < out.q_grid.size(); ++i) {
    if (out.value[i] >= out.q_grid[i]) break;
    out.c = out.q_grid[i];
  }
  return out;
}

}  // namespace ogp::parisi
