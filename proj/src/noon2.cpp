#include "qmet/noon2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qmet::noon2 {

namespace {

constexpr double kPi = std::numbers::pi;

// Clamp to [0,1] but treat anything further than 1e-12 outside as a bug
// rather than rounding.
double clamp_probability(double p) {
  if (p < -1e-12 || p > 1.0 + 1e-12)
    throw std::logic_error("probability outside [0,1] beyond rounding tolerance");
  return std::clamp(p, 0.0, 1.0);
}

void check_visibility(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

}  // namespace

const std::array<double, 4>& canonical_settings() {
  static const std::array<double, 4> settings = {0.0, kPi / 16.0, kPi / 8.0,
                                                 3.0 * kPi / 16.0};
  return settings;
}

OutcomeProbabilities probs_full(double theta, const ModelPoint& point) {
  check_visibility(point.v, "visibility");
  const double u = 8.0 * theta - 2.0 * point.phi;
  const double w = 4.0 * theta - point.phi;
  const double s = std::sin(w);
  OutcomeProbabilities out;
  out.p1 = clamp_probability((1.0 + point.v * std::cos(u)) / (1.0 + point.v));
  out.p2 = clamp_probability(point.v * s * s / (1.0 + point.v));
  return out;
}

double prob_postselected(double theta, const ModelPoint& point) {
  check_visibility(point.v, "visibility");
  return clamp_probability(
      0.25 * (1.0 + point.v * std::cos(8.0 * theta - 2.0 * point.phi)));
}

OutcomeProbabilities limit_probs(double theta, double phi, Regime regime) {
  const double u = 8.0 * theta - 2.0 * phi;
  const double s = std::sin(4.0 * theta - phi);
  OutcomeProbabilities out;
  if (regime == Regime::Indistinguishable) {
    out.p1 = clamp_probability(0.5 * (1.0 + std::cos(u)));
    out.p2 = clamp_probability(0.5 * s * s);
  } else {
    out.p1 = clamp_probability(0.25 * (3.0 + std::cos(u)));
    out.p2 = clamp_probability(0.25 * s * s);
  }
  return out;
}

double visibility_from_distinguishability(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("distinguishability must lie in [0,1]");
  const double e2 = epsilon * epsilon;
  return (2.0 - e2) / (2.0 + e2);
}

double prob_single_param(double theta, double phi, double v0) {
  check_visibility(v0, "pre-calibrated visibility");
  return clamp_probability(0.25 * (1.0 + v0 * std::cos(8.0 * theta - 2.0 * phi)));
}

}  // namespace qmet::noon2
