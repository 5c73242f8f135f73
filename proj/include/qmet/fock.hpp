#pragma once

#include <compare>
#include <complex>
#include <map>
#include <vector>

namespace qmet::fock {

// Photon counts in the four polarization modes: the interfering pair
// (a_H, a_V) and the distinguishable pair (q_H, q_V).
struct ModeOccupation {
  int a_h = 0;
  int a_v = 0;
  int q_h = 0;
  int q_v = 0;

  int total() const { return a_h + a_v + q_h + q_v; }
  auto operator<=>(const ModeOccupation&) const = default;
};

// Holland-Burnett probe configuration: N photons per input arm and
// mode distinguishability epsilon in [0,1].
struct HBConfig {
  int n_per_arm = 1;
  double epsilon = 0.0;
};

using Amplitude = std::complex<double>;

// Sparse state over normalized four-mode Fock basis states. Occupations
// absent from the map carry amplitude exactly zero.
class FockStateVector {
 public:
  using Map = std::map<ModeOccupation, Amplitude>;

  FockStateVector() = default;
  explicit FockStateVector(Map amps);

  const Map& amplitudes() const { return amps_; }
  Amplitude amplitude(const ModeOccupation& occ) const;
  double norm_sq() const;

  // Total photon number; throws if the state mixes photon-number sectors.
  int total_photons() const;

 private:
  Map amps_;
};

enum class ModePair { A, Q };

// Fock-basis matrix of the two-mode rotation
//   m1 -> cos(angle/2) m1 + sin(angle/2) m2
//   m2 -> cos(angle/2) m2 - sin(angle/2) m1
// restricted to the sector with `total` photons in the pair.
// Element [p][m] maps input occupation (m, total-m) to output (p, total-p).
std::vector<std::vector<double>> pair_rotation_matrix(int total, double angle);

// Probe state from first principles: expansion of
//   (a_H^+)^N (sqrt(1-eps^2) a_V^+ + eps q_V^+)^N / N! |0>.
FockStateVector build_hb_input(const HBConfig& cfg);

FockStateVector apply_pair_rotation(const FockStateVector& state, ModePair pair,
                                    double angle);

// build_hb_input followed by a rotation of angle (phi + theta_setting)
// applied to both mode pairs.
FockStateVector evolve_probe(const HBConfig& cfg, double phi,
                             double theta_setting);

// Distribution of the total count x on modes a_H and q_H, V modes
// marginalized. by_split[x][s] is the contribution with s photons in a_H.
struct OutcomeDistribution {
  std::vector<double> probs;
  std::vector<std::vector<double>> by_split;
};

OutcomeDistribution outcome_probabilities(const FockStateVector& state,
                                          int n_per_arm);

}  // namespace qmet::fock
