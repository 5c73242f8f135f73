#include "qmet/hb.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qmet::hb {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> probs_vec(int n, double eps, double phi, double theta) {
  return fock::outcome_probabilities(fock::evolve_probe({n, eps}, phi, theta), n)
      .probs;
}

std::vector<double> axpy(double a, const std::vector<double>& x, double b,
                         const std::vector<double>& y) {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

// d/dphi by central differences
std::vector<double> d_phi(int n, double eps, double phi, double theta, double h) {
  return axpy(0.5 / h, probs_vec(n, eps, phi + h, theta), -0.5 / h,
              probs_vec(n, eps, phi - h, theta));
}

// d/deps, switching to second-order one-sided stencils within h of the
// eps in [0,1] boundaries
std::vector<double> d_eps(int n, double eps, double phi, double theta, double h) {
  if (eps - h < 0.0) {
    auto p0 = probs_vec(n, eps, phi, theta);
    auto p1 = probs_vec(n, eps + h, phi, theta);
    auto p2 = probs_vec(n, eps + 2.0 * h, phi, theta);
    std::vector<double> out(p0.size());
    for (size_t i = 0; i < p0.size(); ++i)
      out[i] = (-3.0 * p0[i] + 4.0 * p1[i] - p2[i]) / (2.0 * h);
    return out;
  }
  if (eps + h > 1.0) {
    auto p0 = probs_vec(n, eps, phi, theta);
    auto p1 = probs_vec(n, eps - h, phi, theta);
    auto p2 = probs_vec(n, eps - 2.0 * h, phi, theta);
    std::vector<double> out(p0.size());
    for (size_t i = 0; i < p0.size(); ++i)
      out[i] = (3.0 * p0[i] - 4.0 * p1[i] + p2[i]) / (2.0 * h);
    return out;
  }
  return axpy(0.5 / h, probs_vec(n, eps + h, phi, theta), -0.5 / h,
              probs_vec(n, eps - h, phi, theta));
}

template <typename Deriv>
std::vector<double> richardson(const Deriv& d, double h) {
  // both stencil families have leading error O(h^2)
  return axpy(4.0 / 3.0, d(0.5 * h), -1.0 / 3.0, d(h));
}

}  // namespace

const std::vector<double>& hb_settings() {
  static const std::vector<double> settings = {0.0, kPi / 2.0};
  return settings;
}

const std::vector<double>& default_phase_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(181);
    for (int i = 0; i < 181; ++i) g[i] = double(i) * kPi / 181.0;
    return g;
  }();
  return grid;
}

fock::OutcomeDistribution probabilities(int n_per_arm, double epsilon, double phi,
                                        double theta_setting) {
  return fock::outcome_probabilities(
      fock::evolve_probe({n_per_arm, epsilon}, phi, theta_setting), n_per_arm);
}

HBFisherPoint fisher_hb(int n_per_arm, double epsilon, double phi,
                        const StepSpec& step) {
  if (n_per_arm < 1) throw std::invalid_argument("fisher_hb: n_per_arm must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("fisher_hb: epsilon must lie in [0,1]");
  HBFisherPoint out;
  out.n_per_arm = n_per_arm;
  out.epsilon = epsilon;
  out.phi = phi;
  out.fisher.flavor = fisher::Flavor::HbNumerical;
  out.fisher.phi = phi;
  out.fisher.second = epsilon;
  Sym2 f;
  bool divergent = false;
  for (double theta : hb_settings()) {
    const auto p = probs_vec(n_per_arm, epsilon, phi, theta);
    auto dphi_at = [&](double h) { return d_phi(n_per_arm, epsilon, phi, theta, h); };
    auto deps_at = [&](double h) { return d_eps(n_per_arm, epsilon, phi, theta, h); };
    const auto dp = step.richardson ? richardson(dphi_at, step.h_phi)
                                    : dphi_at(step.h_phi);
    std::vector<double> de;
    if (epsilon > 0.0)
      de = step.richardson ? richardson(deps_at, step.h_eps) : deps_at(step.h_eps);
    else
      de.assign(p.size(), 0.0);  // amplitudes are O(eps) in the q modes
    for (size_t x = 0; x < p.size(); ++x) {
      if (p[x] < 1e-14) {
        if (std::abs(dp[x]) > 1e-6 || std::abs(de[x]) > 1e-6) divergent = true;
        continue;
      }
      // each setting occurs with probability 1/2
      f.xx += 0.5 * dp[x] * dp[x] / p[x];
      f.yy += 0.5 * de[x] * de[x] / p[x];
      f.xy += 0.5 * dp[x] * de[x] / p[x];
    }
  }
  out.fisher.m = f;
  out.fisher.divergent = divergent;
  const double det = f.det();
  const bool eps_uninformative =
      epsilon == 0.0 || f.yy < 1e-12 * std::max(1.0, f.xx) ||
      det <= 1e-12 * f.xx * f.yy;
  if (eps_uninformative) {
    out.singular = true;
    out.eff_phi = f.xx;  // single-parameter phase information
    out.eff_eps = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.eff_phi = det / f.yy;  // 1/(F^-1)_pp
    out.eff_eps = det / f.xx;
  }
  return out;
}

PhaseOptimum optimize_phase(int n_per_arm, double epsilon, Target target,
                            std::span<const double> phase_grid,
                            const StepSpec& step) {
  if (phase_grid.empty())
    throw std::invalid_argument("optimize_phase: empty phase grid");
  PhaseOptimum best{0.0, -1.0};
  bool any = false;
  for (double phi : phase_grid) {
    const auto pt = fisher_hb(n_per_arm, epsilon, phi, step);
    double value;
    if (target == Target::Phi)
      value = pt.eff_phi;
    else {
      if (pt.singular) continue;
      value = pt.eff_eps;
    }
    if (!std::isfinite(value)) continue;
    any = true;
    if (value > best.value) best = {phi, value};
  }
  if (!any)
    throw std::runtime_error("optimize_phase: Fisher matrix singular on the "
                             "whole phase grid");
  return best;
}

ScalingPoint upsilon(int n_per_arm, double epsilon,
                     std::span<const double> phase_grid, const StepSpec& step) {
  if (phase_grid.empty()) phase_grid = default_phase_grid();
  ScalingPoint out;
  out.n_per_arm = n_per_arm;
  out.epsilon = epsilon;
  // phases where the two-parameter matrix degenerates (isolated zeros of
  // the eps sensitivity) carry no joint information and are skipped
  std::vector<double> eff_phi, eff_eps, phases;
  for (size_t i = 0; i < phase_grid.size(); ++i) {
    const auto pt = fisher_hb(n_per_arm, epsilon, phase_grid[i], step);
    if (pt.singular) continue;
    phases.push_back(phase_grid[i]);
    eff_phi.push_back(pt.eff_phi);
    eff_eps.push_back(pt.eff_eps);
  }
  if (phases.empty())
    throw std::runtime_error(
        "upsilon: two-parameter Fisher matrix singular on the whole phase grid");
  size_t arg_phi = 0, arg_eps = 0;
  for (size_t i = 1; i < phases.size(); ++i) {
    if (eff_phi[i] > eff_phi[arg_phi]) arg_phi = i;
    if (eff_eps[i] > eff_eps[arg_eps]) arg_eps = i;
  }
  out.phi_star_phi = phases[arg_phi];
  out.max_eff_phi = eff_phi[arg_phi];
  out.phi_star_eps = phases[arg_eps];
  out.max_eff_eps = eff_eps[arg_eps];
  double best = 0.0;
  for (size_t i = 0; i < phases.size(); ++i)
    best = std::max(best, eff_phi[i] / out.max_eff_phi + eff_eps[i] / out.max_eff_eps);
  out.upsilon = best;
  return out;
}

std::vector<ScalingPoint> scaling_sweep(std::span<const int> n_values,
                                        std::span<const double> epsilon_values,
                                        const StepSpec& step,
                                        std::span<const double> phase_grid) {
  if (phase_grid.empty()) phase_grid = default_phase_grid();
  struct Job {
    int n;
    double eps;
  };
  std::vector<Job> jobs;
  for (int n : n_values)
    for (double eps : epsilon_values) jobs.push_back({n, eps});
  std::vector<std::future<ScalingPoint>> futures;
  futures.reserve(jobs.size());
  for (const Job& job : jobs) {
    futures.push_back(std::async(std::launch::async, [=]() {
      ScalingPoint point;
      try {
        point = upsilon(job.n, job.eps, phase_grid, step);
      } catch (const std::exception& e) {
        point.n_per_arm = job.n;
        point.epsilon = job.eps;
        point.ok = false;
        point.error = e.what();
      }
      return point;
    }));
  }
  std::vector<ScalingPoint> out;
  out.reserve(jobs.size());
  for (auto& fut : futures) out.push_back(fut.get());
  return out;
}

}  // namespace qmet::hb
