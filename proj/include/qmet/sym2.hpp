#pragma once

#include <cmath>
#include <stdexcept>

namespace qmet {

// Symmetric 2x2 matrix; used for Fisher information blocks and
// parameter covariances with ordering (phase, second parameter).
struct Sym2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }

  Sym2 scaled(double a) const { return {xx * a, yy * a, xy * a}; }

  Sym2 inverse() const {
    const double d = det();
    if (d == 0.0) throw std::domain_error("Sym2::inverse: singular matrix");
    return {yy / d, xx / d, -xy / d};
  }

  double min_eigenvalue() const {
    const double m = 0.5 * trace();
    const double r = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return m - r;
  }

  double max_eigenvalue() const {
    const double m = 0.5 * trace();
    const double r = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return m + r;
  }
};

inline double trace_product(const Sym2& a, const Sym2& b) {
  return a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy;
}

}  // namespace qmet
