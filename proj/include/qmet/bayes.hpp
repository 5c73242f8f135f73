#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmet/noon2.hpp"
#include "qmet/sym2.hpp"

namespace qmet::bayes {

// Uniform (or user-supplied) prior over a rectangular (phi, v) region,
// discretized with midpoint nodes.
struct PriorSpec {
  double phi_lo = 0.0;
  double phi_hi = 0.5;
  double v_lo = 0.90;
  double v_hi = 1.00;
  int resolution = 512;  // nodes per axis, >= 16
  std::function<double(double phi, double v)> density;  // null = uniform
};

// Per-setting coincidence counts, plus optional per-arm bunched counts.
// Counts are stored as doubles so that noiseless expected-count injection
// (counts = M * p) is representable.
struct CountRecord {
  std::vector<double> settings;      // HWP angles, radians
  std::vector<double> coincidences;  // n_theta, one per setting
  std::optional<std::vector<std::array<double, 2>>> bunched;

  double retained() const;  // M = sum of coincidences
};

struct PosteriorGrid {
  std::vector<double> phi_nodes;
  std::vector<double> v_nodes;
  std::vector<double> mass;  // row-major [i_phi * n_v + i_v], sums to 1
  std::string provenance;

  double& at(int i_phi, int i_v) { return mass[size_t(i_phi) * v_nodes.size() + i_v]; }
  double at(int i_phi, int i_v) const { return mass[size_t(i_phi) * v_nodes.size() + i_v]; }
};

using Model = std::function<double(double theta, double phi, double v)>;

// p(theta|phi,v) = prob_postselected.
Model postselected_model();

PosteriorGrid make_prior_grid(const PriorSpec& prior);

// Log-domain Bayes update: mass proportional to
// prior * exp(sum_theta n_theta ln p(theta|phi,v)).
PosteriorGrid bayes_update(const PriorSpec& prior, const CountRecord& counts,
                           const Model& model = postselected_model());
PosteriorGrid bayes_update(const PosteriorGrid& prior, const CountRecord& counts,
                           const Model& model = postselected_model());

struct EstimateSummary {
  double phi_b = 0.0;
  double v_b = 0.0;
  Sym2 cov;  // (Delta^2 phi, Delta^2 v, Sigma_{phi,v})
  double events = 0.0;
  // true when the posterior support covers fewer than 4 grid nodes, in
  // which case the second moments are below grid scale and not meaningful
  bool under_resolved = false;
};

EstimateSummary moments(const PosteriorGrid& post);

enum class SampleMode { Postselected, Full };

// Simulated experiment over the canonical four settings. Deterministic
// given the seed. Postselected mode: M draws from the 4-category setting
// distribution. Full mode: M trials, each picking a setting uniformly and
// an outcome from {coincidence, bunched arm 1, bunched arm 2}.
CountRecord sample_counts(const noon2::ModelPoint& point, long events,
                          std::uint64_t seed, SampleMode mode = SampleMode::Postselected);

// Noiseless injection: counts = M * p(theta|phi,v) exactly.
CountRecord expected_counts(const noon2::ModelPoint& point, double events);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y);

struct CalibrationOptions {
  double prior_phi_halfwidth = 0.25;
  double v_lo = 0.90;
  double v_hi = 1.00;
  int resolution = 512;
  bool noiseless = false;
};

struct CalibrationResult {
  std::vector<double> phases;
  std::vector<EstimateSummary> points;
  LinearFit phi_fit;  // estimated phi vs imparted phase; slope s_phi
  LinearFit v_fit;    // estimated v vs imparted phase; slope s_v
};

CalibrationResult calibration_sweep(std::span<const double> phases, double true_v,
                                    double events_per_point, std::uint64_t seed,
                                    const CalibrationOptions& opt = {});

struct SingleParamEstimate {
  double phi_b = 0.0;
  double var_phi = 0.0;
};

// 1-D Bayesian phase estimate with the visibility frozen at v0.
SingleParamEstimate estimate_single_param(const CountRecord& counts, double v0,
                                          double phi_lo, double phi_hi,
                                          int resolution = 2048);

// Independent substream for the i-th element of a seeded sweep.
std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

}  // namespace qmet::bayes
