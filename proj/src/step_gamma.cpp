#include "ogp/step_gamma.hpp"

#include <cmath>

#include "json.hpp"

namespace ogp {

using nlohmann::json;

double MixtureXi::value(double s) const { return std::pow(s, k); }

double MixtureXi::d1(double s) const { return k * std::pow(s, k - 1); }

double MixtureXi::d2(double s) const {
  return static_cast<double>(k) * (k - 1) * std::pow(s, k - 2);
}

StepGamma StepGamma::constant(double m) {
  StepGamma g;
  g.breakpoints = {0.0, 1.0};
  g.values = {m};
  g.validate();
  return g;
}

void StepGamma::validate() const {
  if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
    throw ValidationError(
        "step function needs m+1 breakpoints for m values");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw ValidationError("breakpoints must start at 0 and end at 1");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw ValidationError("breakpoints must be strictly increasing");
  double prev = 0.0;
  for (double v : values) {
    if (!(v >= prev) || !std::isfinite(v))
      throw ValidationError(
          "order parameter values must be finite, nonnegative, nondecreasing");
    prev = v;
  }
}

double StepGamma::value_at(double s) const {
  if (!(s >= 0.0 && s < 1.0))
    throw ValidationError("gamma is defined on [0, 1)");
  std::size_t i = 0;
  while (i + 1 < values.size() && s >= breakpoints[i + 1]) ++i;
  return values[i];
}

StepGamma StepGamma::with_breakpoint(double q) const {
  if (!(q > 0.0 && q < 1.0)) return *this;
  StepGamma out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.breakpoints.push_back(breakpoints[i]);
    out.values.push_back(values[i]);
    if (q > breakpoints[i] && q < breakpoints[i + 1]) {
      out.breakpoints.push_back(q);
      out.values.push_back(values[i]);
    }
  }
  out.breakpoints.push_back(1.0);
  out.validate();
  return out;
}

StepGamma StepGamma::scaled_prefix(double scale, double q) const {
  if (!(scale >= 0.0 && scale <= 1.0))
    throw ValidationError("prefix scale must lie in [0, 1]");
  StepGamma out = with_breakpoint(q);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    if (out.breakpoints[i] < q) out.values[i] *= scale;
  out.validate();  // scale <= 1 keeps the sequence nondecreasing at q
  return out;
}

std::vector<double> StepGamma::support_points() const {
  std::vector<double> pts;
  double prev = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > prev) pts.push_back(breakpoints[i]);
    prev = values[i];
  }
  return pts;
}

std::string StepGamma::to_json() const {
  json j;
  j["breakpoints"] = breakpoints;
  j["values"] = values;
  return j.dump();
}

StepGamma StepGamma::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, true);
  StepGamma g;
  g.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  g.values = j.at("values").get<std::vector<double>>();
  g.validate();
  return g;
}

}  // namespace ogp
