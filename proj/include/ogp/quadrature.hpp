#pragma once

#include <Eigen/Dense>

namespace ogp {

// Nodes/weights for E f(Z) ~ sum_k w_k f(z_k) with Z standard normal.
// Weights sum to 1; nodes come in exact +/- pairs.
struct Quadrature {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
};

const Quadrature& gauss_hermite(int order);

}  // namespace ogp
