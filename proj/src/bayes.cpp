#include "qmet/bayes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace qmet::bayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> midpoint_nodes(double lo, double hi, int n) {
  std::vector<double> nodes(n);
  const double h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) nodes[i] = lo + (i + 0.5) * h;
  return nodes;
}

void check_prior(const PriorSpec& prior) {
  if (!(prior.phi_hi > prior.phi_lo) || !(prior.v_hi > prior.v_lo))
    throw std::invalid_argument("PriorSpec: degenerate parameter range");
  if (!(prior.v_lo >= 0.0 && prior.v_hi <= 1.0))
    throw std::invalid_argument("PriorSpec: visibility range must lie in [0,1]");
  if (prior.resolution < 16)
    throw std::invalid_argument("PriorSpec: resolution must be >= 16");
}

void check_counts(const CountRecord& counts) {
  if (counts.settings.empty())
    throw std::invalid_argument("CountRecord: no settings");
  if (counts.settings.size() != counts.coincidences.size())
    throw std::invalid_argument("CountRecord: settings/coincidences length mismatch");
  for (double n : counts.coincidences)
    if (!(n >= 0.0)) throw std::invalid_argument("CountRecord: negative count");
}

// uniform double in [0,1) from the top 53 bits, deterministic across platforms
double canonical_u01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

double CountRecord::retained() const {
  double m = 0.0;
  for (double n : coincidences) m += n;
  return m;
}

Model postselected_model() {
  return [](double theta, double phi, double v) {
    return noon2::prob_postselected(theta, {phi, v});
  };
}

PosteriorGrid make_prior_grid(const PriorSpec& prior) {
  check_prior(prior);
  PosteriorGrid grid;
  grid.phi_nodes = midpoint_nodes(prior.phi_lo, prior.phi_hi, prior.resolution);
  grid.v_nodes = midpoint_nodes(prior.v_lo, prior.v_hi, prior.resolution);
  grid.mass.assign(size_t(prior.resolution) * prior.resolution, 0.0);
  double total = 0.0;
  for (int i = 0; i < prior.resolution; ++i) {
    for (int j = 0; j < prior.resolution; ++j) {
      double w = 1.0;
      if (prior.density) {
        w = prior.density(grid.phi_nodes[i], grid.v_nodes[j]);
        if (!(w >= 0.0))
          throw std::invalid_argument("PriorSpec: density must be non-negative");
      }
      grid.at(i, j) = w;
      total += w;
    }
  }
  if (total <= 0.0) throw std::invalid_argument("PriorSpec: density has no support");
  for (double& m : grid.mass) m /= total;
  grid.provenance = "prior";
  return grid;
}

PosteriorGrid bayes_update(const PosteriorGrid& prior, const CountRecord& counts,
                           const Model& model) {
  check_counts(counts);
  const int n_phi = int(prior.phi_nodes.size());
  const int n_v = int(prior.v_nodes.size());
  std::vector<double> loglik(prior.mass.size(), 0.0);
  double max_ll = kNegInf;
  for (int i = 0; i < n_phi; ++i) {
    const double phi = prior.phi_nodes[i];
    for (int j = 0; j < n_v; ++j) {
      const size_t idx = size_t(i) * n_v + j;
      if (prior.mass[idx] <= 0.0) {
        loglik[idx] = kNegInf;
        continue;
      }
      const double v = prior.v_nodes[j];
      double ll = 0.0;
      for (size_t t = 0; t < counts.settings.size(); ++t) {
        const double n = counts.coincidences[t];
        if (n == 0.0) continue;
        const double p = model(counts.settings[t], phi, v);
        if (p <= 0.0) {
          ll = kNegInf;
          break;
        }
        ll += n * std::log(p);
      }
      loglik[idx] = ll;
      if (ll > max_ll) max_ll = ll;
    }
  }
  if (max_ll == kNegInf)
    throw std::runtime_error(
        "bayes_update: posterior has no support (zero likelihood everywhere the "
        "prior is positive)");
  PosteriorGrid post;
  post.phi_nodes = prior.phi_nodes;
  post.v_nodes = prior.v_nodes;
  post.mass.assign(prior.mass.size(), 0.0);
  double total = 0.0;
  for (size_t idx = 0; idx < prior.mass.size(); ++idx) {
    if (prior.mass[idx] <= 0.0 || loglik[idx] == kNegInf) continue;
    const double m = prior.mass[idx] * std::exp(loglik[idx] - max_ll);
    post.mass[idx] = m;
    total += m;
  }
  if (!(total > 0.0))
    throw std::runtime_error("bayes_update: posterior mass underflowed to zero");
  for (double& m : post.mass) m /= total;
  post.provenance = prior.provenance + " | updated with M=" +
                    std::to_string(counts.retained());
  return post;
}

PosteriorGrid bayes_update(const PriorSpec& prior, const CountRecord& counts,
                           const Model& model) {
  return bayes_update(make_prior_grid(prior), counts, model);
}

EstimateSummary moments(const PosteriorGrid& post) {
  const int n_phi = int(post.phi_nodes.size());
  const int n_v = int(post.v_nodes.size());
  EstimateSummary est;
  int support = 0;
  for (int i = 0; i < n_phi; ++i)
    for (int j = 0; j < n_v; ++j) {
      const double m = post.at(i, j);
      if (m > 1e-12) ++support;
      est.phi_b += m * post.phi_nodes[i];
      est.v_b += m * post.v_nodes[j];
    }
  for (int i = 0; i < n_phi; ++i) {
    const double dphi = post.phi_nodes[i] - est.phi_b;
    for (int j = 0; j < n_v; ++j) {
      const double m = post.at(i, j);
      if (m == 0.0) continue;
      const double dv = post.v_nodes[j] - est.v_b;
      est.cov.xx += m * dphi * dphi;
      est.cov.yy += m * dv * dv;
      est.cov.xy += m * dphi * dv;
    }
  }
  est.under_resolved = support < 4;
  return est;
}

CountRecord sample_counts(const noon2::ModelPoint& point, long events,
                          std::uint64_t seed, SampleMode mode) {
  if (events < 1) throw std::invalid_argument("sample_counts: events must be >= 1");
  const auto& thetas = noon2::canonical_settings();
  CountRecord rec;
  rec.settings.assign(thetas.begin(), thetas.end());
  rec.coincidences.assign(thetas.size(), 0.0);
  std::mt19937_64 rng(seed);
  if (mode == SampleMode::Postselected) {
    std::array<double, 4> cdf{};
    double acc = 0.0;
    for (size_t t = 0; t < thetas.size(); ++t) {
      acc += noon2::prob_postselected(thetas[t], point);
      cdf[t] = acc;
    }
    // the four postselected probabilities sum to 1 identically
    cdf.back() = 1.0;
    for (long e = 0; e < events; ++e) {
      const double u = canonical_u01(rng);
      size_t t = 0;
      while (u >= cdf[t]) ++t;
      rec.coincidences[t] += 1.0;
    }
  } else {
    rec.bunched.emplace(thetas.size(), std::array<double, 2>{0.0, 0.0});
    for (long e = 0; e < events; ++e) {
      const size_t t =
          std::min<size_t>(thetas.size() - 1,
                           size_t(canonical_u01(rng) * double(thetas.size())));
      const auto p = noon2::probs_full(thetas[t], point);
      const double u = canonical_u01(rng);
      if (u < p.p1)
        rec.coincidences[t] += 1.0;
      else if (u < p.p1 + p.p2)
        (*rec.bunched)[t][0] += 1.0;
      else
        (*rec.bunched)[t][1] += 1.0;
    }
  }
  return rec;
}

CountRecord expected_counts(const noon2::ModelPoint& point, double events) {
  if (!(events > 0.0))
    throw std::invalid_argument("expected_counts: events must be positive");
  const auto& thetas = noon2::canonical_settings();
  CountRecord rec;
  rec.settings.assign(thetas.begin(), thetas.end());
  rec.coincidences.resize(thetas.size());
  for (size_t t = 0; t < thetas.size(); ++t)
    rec.coincidences[t] = events * noon2::prob_postselected(thetas[t], point);
  return rec;
}

LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  if (n != y.size() || n < 3)
    throw std::invalid_argument("least_squares_fit: need >= 3 matched points");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("least_squares_fit: degenerate abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  const double s2 = ssr / double(n - 2);
  fit.slope_se = std::sqrt(s2 / sxx);
  fit.intercept_se = std::sqrt(s2 * (1.0 / double(n) + mx * mx / sxx));
  return fit;
}

CalibrationResult calibration_sweep(std::span<const double> phases, double true_v,
                                    double events_per_point, std::uint64_t seed,
                                    const CalibrationOptions& opt) {
  if (phases.size() < 3)
    throw std::invalid_argument("calibration_sweep: need at least 3 phases");
  CalibrationResult result;
  result.phases.assign(phases.begin(), phases.end());
  std::vector<double> phi_hat, v_hat;
  for (size_t i = 0; i < phases.size(); ++i) {
    const noon2::ModelPoint truth{phases[i], true_v};
    CountRecord counts =
        opt.noiseless
            ? expected_counts(truth, events_per_point)
            : sample_counts(truth, long(events_per_point), substream(seed, i),
                            SampleMode::Postselected);
    PriorSpec prior;
    prior.phi_lo = phases[i] - opt.prior_phi_halfwidth;
    prior.phi_hi = phases[i] + opt.prior_phi_halfwidth;
    prior.v_lo = opt.v_lo;
    prior.v_hi = opt.v_hi;
    prior.resolution = opt.resolution;
    EstimateSummary est = moments(bayes_update(prior, counts));
    if (est.under_resolved)
      throw std::runtime_error("calibration_sweep: posterior under-resolved");
    est.events = counts.retained();
    result.points.push_back(est);
    phi_hat.push_back(est.phi_b);
    v_hat.push_back(est.v_b);
  }
  result.phi_fit = least_squares_fit(result.phases, phi_hat);
  result.v_fit = least_squares_fit(result.phases, v_hat);
  return result;
}

SingleParamEstimate estimate_single_param(const CountRecord& counts, double v0,
                                          double phi_lo, double phi_hi,
                                          int resolution) {
  check_counts(counts);
  if (!(phi_hi > phi_lo))
    throw std::invalid_argument("estimate_single_param: degenerate phase range");
  if (resolution < 16)
    throw std::invalid_argument("estimate_single_param: resolution must be >= 16");
  const std::vector<double> nodes = midpoint_nodes(phi_lo, phi_hi, resolution);
  std::vector<double> loglik(nodes.size(), 0.0);
  double max_ll = kNegInf;
  for (size_t i = 0; i < nodes.size(); ++i) {
    double ll = 0.0;
    for (size_t t = 0; t < counts.settings.size(); ++t) {
      const double n = counts.coincidences[t];
      if (n == 0.0) continue;
      const double p = noon2::prob_single_param(counts.settings[t], nodes[i], v0);
      if (p <= 0.0) {
        ll = kNegInf;
        break;
      }
      ll += n * std::log(p);
    }
    loglik[i] = ll;
    max_ll = std::max(max_ll, ll);
  }
  if (max_ll == kNegInf)
    throw std::runtime_error("estimate_single_param: posterior has no support");
  double total = 0.0, mean = 0.0;
  std::vector<double> mass(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    mass[i] = loglik[i] == kNegInf ? 0.0 : std::exp(loglik[i] - max_ll);
    total += mass[i];
  }
  for (size_t i = 0; i < nodes.size(); ++i) {
    mass[i] /= total;
    mean += mass[i] * nodes[i];
  }
  double var = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i)
    var += mass[i] * (nodes[i] - mean) * (nodes[i] - mean);
  return {mean, var};
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

}  // namespace qmet::bayes
