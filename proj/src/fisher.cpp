#include "qmet/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmet::fisher {

namespace {

// probability below which a term is treated as an exact zero of the model
constexpr double kZeroProb = 1e-15;
constexpr double kZeroDeriv = 1e-9;

void check_point(const noon2::ModelPoint& point) {
  if (!(point.v > 0.0))
    throw std::domain_error("Fisher matrix: v must be positive (no phase "
                            "information at v = 0)");
}

double interp_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::logic_error("quantile of empty sample");
  const double pos = q * double(sorted.size() - 1);
  const size_t lo = size_t(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

FisherMatrix2 fisher_postselected(const noon2::ModelPoint& point,
                                  std::span<const double> settings,
                                  PsConvention convention) {
  check_point(point);
  if (settings.empty())
    throw std::invalid_argument("fisher_postselected: no settings");
  FisherMatrix2 out;
  out.flavor = Flavor::Postselected;
  out.phi = point.phi;
  out.second = point.v;
  for (double theta : settings) {
    const double u = 8.0 * theta - 2.0 * point.phi;
    const double p = 0.25 * (1.0 + point.v * std::cos(u));
    const double dp_phi = 0.5 * point.v * std::sin(u);
    const double dp_v = 0.25 * std::cos(u);
    if (p < kZeroProb) {
      if (std::abs(dp_phi) > kZeroDeriv || std::abs(dp_v) > kZeroDeriv)
        out.divergent = true;
      continue;
    }
    out.m.xx += dp_phi * dp_phi / p;
    out.m.yy += dp_v * dp_v / p;
    out.m.xy += dp_phi * dp_v / p;
  }
  if (convention == PsConvention::PerTrial)
    out.m = out.m.scaled(1.0 / double(settings.size()));
  return out;
}

FisherMatrix2 fisher_full(const noon2::ModelPoint& point,
                          std::span<const double> settings) {
  check_point(point);
  if (settings.empty()) throw std::invalid_argument("fisher_full: no settings");
  const double v = point.v;
  FisherMatrix2 out;
  out.flavor = Flavor::Full;
  out.phi = point.phi;
  out.second = v;
  const double one_v = 1.0 + v;
  for (double theta : settings) {
    const double u = 8.0 * theta - 2.0 * point.phi;
    const double w = 4.0 * theta - point.phi;
    const double sw = std::sin(w);
    const double p1 = (1.0 + v * std::cos(u)) / one_v;
    const double p2 = v * sw * sw / one_v;
    const double dp1_phi = 2.0 * v * std::sin(u) / one_v;
    const double dp1_v = (std::cos(u) - 1.0) / (one_v * one_v);
    const double dp2_phi = -v * std::sin(2.0 * w) / one_v;
    const double dp2_v = sw * sw / (one_v * one_v);
    auto add = [&](double p, double dphi, double dv, double mult) {
      if (p < kZeroProb) {
        if (std::abs(dphi) > kZeroDeriv || std::abs(dv) > kZeroDeriv)
          out.divergent = true;
        return;
      }
      out.m.xx += mult * dphi * dphi / p;
      out.m.yy += mult * dv * dv / p;
      out.m.xy += mult * dphi * dv / p;
    };
    add(p1, dp1_phi, dp1_v, 1.0);
    add(p2, dp2_phi, dp2_v, 2.0);  // two bunched outcomes, each with probability p2
  }
  out.m = out.m.scaled(1.0 / double(settings.size()));
  return out;
}

CRBReport crb(const FisherMatrix2& fisher, double events) {
  if (!(events > 0.0)) throw std::invalid_argument("crb: events must be positive");
  const Sym2& f = fisher.m;
  const double lo = f.min_eigenvalue();
  const double hi = f.max_eigenvalue();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    const char* which = f.xx <= f.yy ? "phase" : "second parameter";
    throw std::domain_error(std::string("crb: Fisher matrix is singular; the ") +
                            which + " is uninformative");
  }
  CRBReport report;
  report.bound = f.inverse().scaled(1.0 / events);
  report.xi = f.xy / std::sqrt(f.xx * f.yy);
  report.events = events;
  return report;
}

LRTResult lrt_statistic(const Sym2& fisher, const Sym2& sigma, double events,
                        LrtForm form) {
  if (!(events > 0.0))
    throw std::invalid_argument("lrt_statistic: events must be positive");
  if (!(sigma.xx > 0.0) || !(sigma.det() > 0.0))
    throw std::domain_error("lrt_statistic: covariance not positive definite");
  if (!(fisher.det() > 0.0))
    throw std::domain_error("lrt_statistic: Fisher matrix not positive definite");
  const double m = events;
  LRTResult result;
  result.form = form;
  if (form == LrtForm::Verbatim) {
    result.statistic = m * m * trace_product(fisher, sigma) -
                       m * (std::log(sigma.det()) + std::log(m * m * fisher.det())) -
                       2.0;
  } else {
    // Sigma0^-1 = M F
    const Sym2 s0inv = fisher.scaled(m);
    result.statistic = m * (trace_product(s0inv, sigma) -
                            std::log(s0inv.det() * sigma.det()) - 2.0);
  }
  result.compatible = result.statistic <= result.critical_value;
  return result;
}

double NullCalibration::quantile_verbatim(double q) const {
  return interp_quantile(verbatim_stats, q);
}

double NullCalibration::quantile_standard(double q) const {
  return interp_quantile(standard_stats, q);
}

NullCalibration lrt_null_calibration(const noon2::ModelPoint& point, long events,
                                     int repetitions, std::uint64_t seed,
                                     const bayes::PriorSpec& prior) {
  if (events < 1)
    throw std::invalid_argument("lrt_null_calibration: events must be >= 1");
  if (repetitions < 100)
    throw std::invalid_argument("lrt_null_calibration: repetitions must be >= 100");
  const auto& settings = noon2::canonical_settings();
  const FisherMatrix2 f =
      fisher_postselected(point, settings, PsConvention::RetainedEvents);
  NullCalibration out;
  out.verbatim_stats.reserve(repetitions);
  out.standard_stats.reserve(repetitions);
  for (int r = 0; r < repetitions; ++r) {
    const auto counts = bayes::sample_counts(point, events,
                                             bayes::substream(seed, r));
    const auto est = bayes::moments(bayes::bayes_update(prior, counts));
    const double m = counts.retained();
    out.verbatim_stats.push_back(
        lrt_statistic(f.m, est.cov, m, LrtForm::Verbatim).statistic);
    out.standard_stats.push_back(
        lrt_statistic(f.m, est.cov, m, LrtForm::Standard).statistic);
  }
  std::sort(out.verbatim_stats.begin(), out.verbatim_stats.end());
  std::sort(out.standard_stats.begin(), out.standard_stats.end());
  return out;
}

}  // namespace qmet::fisher
