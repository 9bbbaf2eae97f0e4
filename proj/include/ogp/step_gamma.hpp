#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogp/common.hpp"

namespace ogp {

// xi(s) = s^k covariance mixture of the pure k-spin model
struct MixtureXi {
  int k = 2;

  MixtureXi() = default;
  explicit MixtureXi(int k_) : k(k_) {
    if (k < 2 || k % 2 != 0)
      throw ValidationError("k must be an even integer >= 2");
  }
  double value(double s) const;
  double d1(double s) const;  // k s^{k-1}
  double d2(double s) const;  // k (k-1) s^{k-2}
};

// Nonnegative, nondecreasing, right-continuous step function on [0,1):
// gamma(s) = values[i] on [breakpoints[i], breakpoints[i+1]).
struct StepGamma {
  std::vector<double> breakpoints;  // 0 = b_0 < ... < b_m = 1
  std::vector<double> values;       // m entries, nondecreasing, >= 0

  static StepGamma constant(double m);
  void validate() const;
  std::size_t pieces() const { return values.size(); }
  double value_at(double s) const;
  // new gamma with q added as a breakpoint (no-op when already present)
  StepGamma with_breakpoint(double q) const;
  // gamma_q family: scale * gamma on [0, q), gamma on [q, 1)
  StepGamma scaled_prefix(double scale, double q) const;
  // locations where the order parameter increases (0 included when
  // gamma(0) > 0); these carry the mass of the underlying measure
  std::vector<double> support_points() const;

  std::string to_json() const;
  static StepGamma from_json(const std::string& text);
};

}  // namespace ogp
