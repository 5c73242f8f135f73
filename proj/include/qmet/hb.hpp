#pragma once

#include <span>
#include <string>
#include <vector>

#include "qmet/fisher.hpp"
#include "qmet/fock.hpp"

namespace qmet::hb {

// Finite-difference steps for the numerical Fisher matrix over (phi, eps).
// One-sided second-order stencils are used within h of the eps boundaries.
struct StepSpec {
  double h_phi = 1e-4;
  double h_eps = 1e-4;
  bool richardson = false;
};

// The two controlled-phase settings, alternated with equal probability.
const std::vector<double>& hb_settings();  // {0, pi/2}

fock::OutcomeDistribution probabilities(int n_per_arm, double epsilon, double phi,
                                        double theta_setting);

struct HBFisherPoint {
  int n_per_arm = 0;
  double epsilon = 0.0;
  double phi = 0.0;
  fisher::FisherMatrix2 fisher;  // over (phi, eps)
  double eff_phi = 0.0;          // 1 / (F^-1)_{phi,phi}
  double eff_eps = 0.0;          // 1 / (F^-1)_{eps,eps}; NaN when singular
  bool singular = false;         // eps derivative uninformative (e.g. eps = 0)
};

HBFisherPoint fisher_hb(int n_per_arm, double epsilon, double phi,
                        const StepSpec& step = {});

enum class Target { Phi, Eps };

struct PhaseOptimum {
  double phi_star = 0.0;
  double value = 0.0;
};

PhaseOptimum optimize_phase(int n_per_arm, double epsilon, Target target,
                            std::span<const double> phase_grid,
                            const StepSpec& step = {});

struct ScalingPoint {
  int n_per_arm = 0;
  double epsilon = 0.0;
  double phi_star_phi = 0.0;
  double max_eff_phi = 0.0;
  double phi_star_eps = 0.0;
  double max_eff_eps = 0.0;
  double upsilon = 0.0;
  bool ok = true;
  std::string error;
};

// Trade-off figure over a common setting phase gamma:
//   Upsilon = max_gamma [ Fp(gamma)/max Fp + Fe(gamma)/max Fe ].
ScalingPoint upsilon(int n_per_arm, double epsilon,
                     std::span<const double> phase_grid, const StepSpec& step = {});

// Full table behind the scaling study; per-point failures are recorded in
// the ScalingPoint and the sweep continues. Points are computed in
// parallel and merged in index order.
std::vector<ScalingPoint> scaling_sweep(std::span<const int> n_values,
                                        std::span<const double> epsilon_values,
                                        const StepSpec& step = {},
                                        std::span<const double> phase_grid = {});

// 181 phases over [0, pi).
const std::vector<double>& default_phase_grid();

}  // namespace qmet::hb
