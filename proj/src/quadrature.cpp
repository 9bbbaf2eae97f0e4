#include "ogp/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>

#include "ogp/common.hpp"

namespace ogp {

// Golub-Welsch on the physicists' Hermite Jacobi matrix, rescaled to the
// standard normal measure (z = sqrt(2) t, weights normalized to 1).
static Quadrature build_gauss_hermite(int order) {
  if (order < 2 || order > 512)
    throw ValidationError("quadrature order must be in [2, 512]");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int j = 1; j < order; ++j) {
    double b = std::sqrt(j / 2.0);
    jacobi(j, j - 1) = b;
    jacobi(j - 1, j) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  Quadrature q;
  q.nodes = es.eigenvalues().array() * std::sqrt(2.0);
  q.weights = es.eigenvectors().row(0).array().square();
  // force exact +/- node pairs and renormalize
  for (int i = 0; i < order / 2; ++i) {
    int jm = order - 1 - i;
    double a = 0.5 * (q.nodes[jm] - q.nodes[i]);
    q.nodes[i] = -a;
    q.nodes[jm] = a;
    double w = 0.5 * (q.weights[i] + q.weights[jm]);
    q.weights[i] = w;
    q.weights[jm] = w;
  }
  if (order % 2) q.nodes[order / 2] = 0.0;
  q.weights /= q.weights.sum();
  return q;
}

const Quadrature& gauss_hermite(int order) {
  static std::map<int, Quadrature> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end())
    it = cache.emplace(order, build_gauss_hermite(order)).first;
  return it->second;
}

}  // namespace ogp
