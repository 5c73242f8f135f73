#include "qmet/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace qmet::fock {

namespace {

double log_factorial(int n) { return std::lgamma(double(n) + 1.0); }

// pow with the 0^0 = 1 convention needed by binomial expansions
double ipow(double x, int k) {
  if (k == 0) return 1.0;
  return std::pow(x, k);
}

void check_config(const HBConfig& cfg) {
  if (cfg.n_per_arm < 1)
    throw std::invalid_argument("HBConfig: n_per_arm must be >= 1");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0))
    throw std::invalid_argument("HBConfig: epsilon must lie in [0,1]");
}

}  // namespace

FockStateVector::FockStateVector(Map amps) : amps_(std::move(amps)) {
  // keep "absent means exactly zero" true
  for (auto it = amps_.begin(); it != amps_.end();) {
    if (it->second == Amplitude{})
      it = amps_.erase(it);
    else
      ++it;
  }
}

Amplitude FockStateVector::amplitude(const ModeOccupation& occ) const {
  auto it = amps_.find(occ);
  return it == amps_.end() ? Amplitude{} : it->second;
}

double FockStateVector::norm_sq() const {
  double n = 0.0;
  for (const auto& [occ, a] : amps_) n += std::norm(a);
  return n;
}

int FockStateVector::total_photons() const {
  if (amps_.empty())
    throw std::invalid_argument("FockStateVector: empty state has no photon number");
  const int t = amps_.begin()->first.total();
  for (const auto& [occ, a] : amps_)
    if (occ.total() != t)
      throw std::invalid_argument("FockStateVector: mixed photon-number sectors");
  return t;
}

std::vector<std::vector<double>> pair_rotation_matrix(int total, double angle) {
  if (total < 0) throw std::invalid_argument("pair_rotation_matrix: negative total");
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  std::vector<std::vector<double>> out(total + 1, std::vector<double>(total + 1, 0.0));
  for (int m = 0; m <= total; ++m) {
    const int n = total - m;
    for (int p = 0; p <= total; ++p) {
      const int q = total - p;
      // (c a1 + s a2)^m (c a2 - s a1)^n expanded over the a1 power p
      double sum = 0.0;
      const int j_lo = std::max(0, p - n);
      const int j_hi = std::min(m, p);
      for (int j = j_lo; j <= j_hi; ++j) {
        const int i = p - j;  // a1 factors taken from the second binomial
        const double log_binoms = log_factorial(m) - log_factorial(j) -
                                  log_factorial(m - j) + log_factorial(n) -
                                  log_factorial(i) - log_factorial(n - i);
        double term = std::exp(log_binoms) * ipow(c, j + n - i) * ipow(s, m - j + i);
        if (i % 2) term = -term;
        sum += term;
      }
      const double log_norm = 0.5 * (log_factorial(p) + log_factorial(q) -
                                     log_factorial(m) - log_factorial(n));
      out[p][m] = sum * std::exp(log_norm);
    }
  }
  return out;
}

FockStateVector build_hb_input(const HBConfig& cfg) {
  check_config(cfg);
  const int n = cfg.n_per_arm;
  const double eps = cfg.epsilon;
  const double c = std::sqrt(1.0 - eps * eps);
  FockStateVector::Map amps;
  for (int k = 0; k <= n; ++k) {
    const double log_binom =
        log_factorial(n) - log_factorial(k) - log_factorial(n - k);
    const double amp = std::exp(0.5 * log_binom) * ipow(c, k) * ipow(eps, n - k);
    if (amp != 0.0) amps[{n, k, 0, n - k}] = amp;
  }
  return FockStateVector(std::move(amps));
}

FockStateVector apply_pair_rotation(const FockStateVector& state, ModePair pair,
                                    double angle) {
  std::map<int, std::vector<std::vector<double>>> mats;
  FockStateVector::Map out;
  for (const auto& [occ, amp] : state.amplitudes()) {
    const int m = (pair == ModePair::A) ? occ.a_h : occ.q_h;
    const int n = (pair == ModePair::A) ? occ.a_v : occ.q_v;
    const int total = m + n;
    auto it = mats.find(total);
    if (it == mats.end())
      it = mats.emplace(total, pair_rotation_matrix(total, angle)).first;
    const auto& mat = it->second;
    for (int p = 0; p <= total; ++p) {
      const double w = mat[p][m];
      if (w == 0.0) continue;
      ModeOccupation dst = occ;
      if (pair == ModePair::A) {
        dst.a_h = p;
        dst.a_v = total - p;
      } else {
        dst.q_h = p;
        dst.q_v = total - p;
      }
      out[dst] += w * amp;
    }
  }
  return FockStateVector(std::move(out));
}

FockStateVector evolve_probe(const HBConfig& cfg, double phi, double theta_setting) {
  check_config(cfg);
  const double angle = phi + theta_setting;
  FockStateVector state = build_hb_input(cfg);
  // the rotation acts on polarization, hence on both pairs
  state = apply_pair_rotation(state, ModePair::A, angle);
  state = apply_pair_rotation(state, ModePair::Q, angle);
  return state;
}

OutcomeDistribution outcome_probabilities(const FockStateVector& state,
                                          int n_per_arm) {
  if (n_per_arm < 1)
    throw std::invalid_argument("outcome_probabilities: n_per_arm must be >= 1");
  const int expected = 2 * n_per_arm;
  if (state.total_photons() != expected)
    throw std::invalid_argument(
        "outcome_probabilities: state photon number does not match 2N");
  OutcomeDistribution dist;
  dist.probs.assign(expected + 1, 0.0);
  dist.by_split.resize(expected + 1);
  for (int x = 0; x <= expected; ++x) dist.by_split[x].assign(x + 1, 0.0);
  for (const auto& [occ, amp] : state.amplitudes()) {
    const int x = occ.a_h + occ.q_h;
    const double w = std::norm(amp);
    dist.probs[x] += w;
    dist.by_split[x][occ.a_h] += w;
  }
  return dist;
}

}  // namespace qmet::fock
