#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmet/bayes.hpp"
#include "qmet/noon2.hpp"
#include "qmet/sym2.hpp"

namespace qmet::fisher {

enum class Flavor { Full, Postselected, HbNumerical };

// Prefactor convention for the post-selected Fisher matrix.
// RetainedEvents: F = sum_theta dp dp / p, so that M counts retained
// coincidence events (the convention matched by M = sum n_theta).
// PerTrial: extra 1/m uniform-setting weight folded in.
enum class PsConvention { RetainedEvents, PerTrial };

struct FisherMatrix2 {
  Sym2 m;  // ordering (phi, v) or (phi, eps)
  Flavor flavor = Flavor::Postselected;
  double phi = 0.0;
  double second = 0.0;  // v or eps at the evaluation point
  // set when a zero-probability term with non-vanishing derivative was
  // dropped; the returned matrix is the limit over the remaining terms
  bool divergent = false;
};

FisherMatrix2 fisher_postselected(const noon2::ModelPoint& point,
                                  std::span<const double> settings,
                                  PsConvention convention = PsConvention::RetainedEvents);

// Per-trial Fisher matrix of the full 3-outcome POVM with the setting
// drawn uniformly from `settings`:
//   F_ij = (1/m) sum_theta [ dp1 dp1 / p1 + 2 dp2 dp2 / p2 ].
FisherMatrix2 fisher_full(const noon2::ModelPoint& point,
                          std::span<const double> settings);

struct CRBReport {
  Sym2 bound;         // F^{-1} / M
  double xi = 0.0;    // F_pv / sqrt(F_pp F_vv)
  double events = 0.0;
};

CRBReport crb(const FisherMatrix2& fisher, double events);

enum class LrtForm { Verbatim, Standard };

struct LRTResult {
  double statistic = 0.0;
  int dof = 3;
  double critical_value = 7.81;  // chi^2_3 at 95%
  bool compatible = false;
  LrtForm form = LrtForm::Verbatim;
};

// Verbatim form: l = M^2 Tr(F Sigma) - M (ln det Sigma + ln det(M F)) - 2.
// Standard form: l = M (Tr(S0^-1 Sigma) - ln det(S0^-1 Sigma) - 2) with
// S0 = F^-1 / M.
LRTResult lrt_statistic(const Sym2& fisher, const Sym2& sigma, double events,
                        LrtForm form = LrtForm::Verbatim);

struct NullCalibration {
  std::vector<double> verbatim_stats;  // sorted
  std::vector<double> standard_stats;  // sorted
  double quantile_verbatim(double q) const;
  double quantile_standard(double q) const;
  static constexpr double chi2_3_q95 = 7.815;
};

// Simulate CountRecords at the null point, estimate Sigma per run and
// collect the statistic under both forms.
NullCalibration lrt_null_calibration(const noon2::ModelPoint& point, long events,
                                     int repetitions, std::uint64_t seed,
                                     const bayes::PriorSpec& prior);

}  // namespace qmet::fisher
