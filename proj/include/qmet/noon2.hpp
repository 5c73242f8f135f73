#pragma once

#include <array>

namespace qmet::noon2 {

// Parameter pair under estimation: interferometric phase (rad) and
// fringe visibility in [0,1].
struct ModelPoint {
  double phi = 0.0;
  double v = 1.0;
};

struct OutcomeProbabilities {
  double p1 = 0.0;  // coincidence between the two output arms
  double p2 = 0.0;  // two photons bunched in one arm (either arm)
};

enum class Regime { Indistinguishable, Distinguishable };

// The four HWP settings used in the experiment: {0, pi/16, pi/8, 3pi/16}.
const std::array<double, 4>& canonical_settings();

// Full 3-outcome probabilities for HWP angle theta:
//   p1 = (1 + v cos(8t - 2phi)) / (1 + v),  p2 = v sin^2(4t - phi) / (1 + v).
OutcomeProbabilities probs_full(double theta, const ModelPoint& point);

// Coincidence-only probability with theta treated as the outcome:
//   p(theta|phi,v) = (1 + v cos(8t - 2phi)) / 4.
double prob_postselected(double theta, const ModelPoint& point);

// Limiting cases: perfectly indistinguishable photons (v = 1) and fully
// distinguishable photons (v = 1/3).
OutcomeProbabilities limit_probs(double theta, double phi, Regime regime);

// v = (2 - eps^2) / (2 + eps^2)
double visibility_from_distinguishability(double epsilon);

// Single-parameter model with the visibility frozen at a pre-calibrated v0.
double prob_single_param(double theta, double phi, double v0);

}  // namespace qmet::noon2
