#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qmet/noon2.hpp"

using namespace qmet;
using noon2::ModelPoint;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("canonical settings") {
  const auto& s = noon2::canonical_settings();
  REQUIRE(s.size() == 4);
  CHECK(s[0] == doctest::Approx(0.0));
  CHECK(s[1] == doctest::Approx(kPi / 16.0));
  CHECK(s[2] == doctest::Approx(kPi / 8.0));
  CHECK(s[3] == doctest::Approx(3.0 * kPi / 16.0));
}

TEST_CASE("probs_full worked examples") {
  // theta = 0, phi = 0, v = 1: p1 = 1, p2 = 0
  auto p = noon2::probs_full(0.0, {0.0, 1.0});
  CHECK(p.p1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.p2 == doctest::Approx(0.0).epsilon(1e-15));

  // theta = 0, phi = pi/2, v = 1/3:
  // p1 = (1 + (1/3) cos(-pi)) / (4/3) = (2/3)/(4/3) = 1/2
  // p2 = (1/3) sin^2(-pi/2) / (4/3) = 1/4
  p = noon2::probs_full(0.0, {kPi / 2.0, 1.0 / 3.0});
  CHECK(p.p1 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.p2 == doctest::Approx(0.25).epsilon(1e-14));

  // dark fringe: theta = pi/8, phi = 0, v = 1 -> p1 = 0, p2 = 1/2
  p = noon2::probs_full(kPi / 8.0, {0.0, 1.0});
  CHECK(p.p1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p.p2 == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("probs_full completeness p1 + 2 p2 = 1") {
  for (double theta : {0.0, 0.11, kPi / 16.0, 0.7, 2.9})
    for (double phi : {0.0, 0.3, 1.2, 3.0})
      for (double v : {0.05, 1.0 / 3.0, 0.75, 0.98, 1.0}) {
        const auto p = noon2::probs_full(theta, {phi, v});
        CHECK(p.p1 + 2.0 * p.p2 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(p.p1 >= 0.0);
        CHECK(p.p2 >= 0.0);
      }
}

TEST_CASE("postselected probabilities normalize over the settings") {
  for (double phi : {0.0, 0.4, 1.1, 2.7})
    for (double v : {0.2, 0.9, 1.0}) {
      double sum = 0.0;
      for (double theta : noon2::canonical_settings())
        sum += noon2::prob_postselected(theta, {phi, v});
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("postselected = p1 (1+v)/4 over retained events") {
  for (double theta : noon2::canonical_settings())
    for (double phi : {0.1, 0.8, 2.0})
      for (double v : {0.4, 0.98}) {
        const ModelPoint pt{phi, v};
        const auto full = noon2::probs_full(theta, pt);
        CHECK(noon2::prob_postselected(theta, pt) ==
              doctest::Approx(full.p1 * (1.0 + v) / 4.0).epsilon(1e-14));
      }
}

TEST_CASE("two-photon periodicity: pi in phi, pi/4 in theta") {
  const ModelPoint pt{0.37, 0.91};
  for (double theta : {0.0, 0.2, 0.5}) {
    const auto a = noon2::probs_full(theta, pt);
    const auto b = noon2::probs_full(theta + kPi / 4.0, pt);
    CHECK(a.p1 == doctest::Approx(b.p1).epsilon(1e-13));
    CHECK(a.p2 == doctest::Approx(b.p2).epsilon(1e-13));
    const auto c = noon2::probs_full(theta, {pt.phi + kPi, pt.v});
    CHECK(a.p1 == doctest::Approx(c.p1).epsilon(1e-13));
    CHECK(a.p2 == doctest::Approx(c.p2).epsilon(1e-13));
  }
}

TEST_CASE("limiting regimes") {
  for (double theta : {0.0, 0.3, 1.0})
    for (double phi : {0.0, 0.6, 2.2}) {
      const double u = 8.0 * theta - 2.0 * phi;
      const auto ind = noon2::limit_probs(theta, phi, noon2::Regime::Indistinguishable);
      CHECK(ind.p1 == doctest::Approx((1.0 + std::cos(u)) / 2.0).epsilon(1e-14));
      const auto dis = noon2::limit_probs(theta, phi, noon2::Regime::Distinguishable);
      CHECK(dis.p1 == doctest::Approx((3.0 + std::cos(u)) / 4.0).epsilon(1e-14));

      // limits agree with the generic law at v = 1 and v = 1/3
      const auto g1 = noon2::probs_full(theta, {phi, 1.0});
      CHECK(ind.p1 == doctest::Approx(g1.p1).epsilon(1e-14));
      CHECK(ind.p2 == doctest::Approx(g1.p2).epsilon(1e-14));
      const auto g3 = noon2::probs_full(theta, {phi, 1.0 / 3.0});
      CHECK(dis.p1 == doctest::Approx(g3.p1).epsilon(1e-14));
      CHECK(dis.p2 == doctest::Approx(g3.p2).epsilon(1e-14));
    }
}

TEST_CASE("visibility from distinguishability") {
  CHECK(noon2::visibility_from_distinguishability(0.0) == doctest::Approx(1.0));
  CHECK(noon2::visibility_from_distinguishability(1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // midpoint check of the algebraic form
  CHECK(noon2::visibility_from_distinguishability(0.5) ==
        doctest::Approx((2.0 - 0.25) / (2.0 + 0.25)).epsilon(1e-15));
  // monotonically decreasing on [0,1]
  double prev = 2.0;
  for (double eps = 0.0; eps <= 1.0; eps += 0.05) {
    const double v = noon2::visibility_from_distinguishability(eps);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("single-parameter model examples") {
  // theta = 0, phi = 0, v0 = 0.982: (1 + 0.982)/4 = 0.4955
  CHECK(noon2::prob_single_param(0.0, 0.0, 0.982) ==
        doctest::Approx(0.4955).epsilon(1e-12));
  // theta = pi/16, phi = pi/8, v0 = 0.978:
  // (1 + 0.978 cos(pi/2 - pi/4)) / 4
  CHECK(noon2::prob_single_param(kPi / 16.0, kPi / 8.0, 0.978) ==
        doctest::Approx((1.0 + 0.978 * std::cos(kPi / 4.0)) / 4.0).epsilon(1e-14));

  // agrees with the two-parameter law with the visibility pinned
  for (double theta : noon2::canonical_settings())
    CHECK(noon2::prob_single_param(theta, 0.21, 0.95) ==
          doctest::Approx(noon2::prob_postselected(theta, {0.21, 0.95})).epsilon(1e-14));
}
