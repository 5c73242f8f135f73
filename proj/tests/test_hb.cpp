#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qmet/fisher.hpp"
#include "qmet/hb.hpp"
#include "qmet/noon2.hpp"

using namespace qmet;
using namespace qmet::fisher;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("hb settings and default grid") {
  const auto& s = hb::hb_settings();
  REQUIRE(s.size() == 2);
  CHECK(s[0] == doctest::Approx(0.0));
  CHECK(s[1] == doctest::Approx(kPi / 2.0));
  const auto& g = hb::default_phase_grid();
  REQUIRE(g.size() == 181);
  CHECK(g.front() == doctest::Approx(0.0));
  CHECK(g.back() < kPi);
}

TEST_CASE("probabilities normalize for all probes") {
  for (int n : {1, 3, 5})
    for (double eps : {0.0, 0.4, 1.0})
      for (double theta : hb::hb_settings()) {
        const auto d = hb::probabilities(n, eps, 0.73, theta);
        double sum = 0.0;
        for (double p : d.probs) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
}

TEST_CASE("single-photon probe reduces to the two-photon fringe model") {
  // mapping between the two parameterizations: a probe phase phi here
  // corresponds to HWP angle -phi/4 in the fringe model, and
  // v = (2 - eps^2) / (2 + eps^2)
  for (double eps : {0.0, 0.3, 0.8, 1.0})
    for (double phi : {0.0, 0.37, 1.1, 2.6}) {
      const double v = noon2::visibility_from_distinguishability(eps);
      const auto d = hb::probabilities(1, eps, phi, 0.0);
      const auto ref = noon2::probs_full(-phi / 4.0, {0.0, v});
      REQUIRE(d.probs.size() == 3);
      CHECK(d.probs[1] == doctest::Approx(ref.p1).epsilon(1e-12));
      CHECK(d.probs[0] == doctest::Approx(ref.p2).epsilon(1e-12));
      CHECK(d.probs[2] == doctest::Approx(ref.p2).epsilon(1e-12));
    }
}

TEST_CASE("known single-parameter information at eps = 0") {
  // with indistinguishable photons only the phase is identifiable and
  // F_phi = 2N(N+1), independent of phi
  for (int n : {1, 2, 3}) {
    for (double phi : {0.21, 0.9}) {
      const auto pt = hb::fisher_hb(n, 0.0, phi);
      CHECK(pt.singular);
      CHECK(std::isnan(pt.eff_eps));
      CHECK(pt.eff_phi == doctest::Approx(2.0 * n * (n + 1)).epsilon(1e-5));
    }
  }
}

TEST_CASE("step halving keeps the Fisher matrix stable") {
  hb::StepSpec coarse;  // h = 1e-4
  hb::StepSpec fine;
  fine.h_phi = 5e-5;
  fine.h_eps = 5e-5;
  for (double eps : {0.3, 0.97}) {
    const auto a = hb::fisher_hb(3, eps, 0.6, coarse);
    const auto b = hb::fisher_hb(3, eps, 0.6, fine);
    CHECK(a.fisher.m.xx == doctest::Approx(b.fisher.m.xx).epsilon(1e-4));
    CHECK(a.fisher.m.yy == doctest::Approx(b.fisher.m.yy).epsilon(1e-4));
  }
}

TEST_CASE("N = 1 Fisher matrix agrees with the analytic fringe model") {
  // push the (phi, v) matrix through the parameter map
  // phi_probe = -4 theta_model, v(eps); dv/deps = -8 eps / (2 + eps^2)^2
  hb::StepSpec step;
  step.richardson = true;
  step.h_phi = 1e-3;
  step.h_eps = 1e-3;
  for (double eps : {0.35, 0.7})
    for (double phi : {0.3, 1.2}) {
      const auto num = hb::fisher_hb(1, eps, phi, step);
      const double v = noon2::visibility_from_distinguishability(eps);
      // probe settings {0, pi/2} map to fringe-model settings {0, -pi/8}
      const std::vector<double> mapped = {-phi / 4.0, -phi / 4.0 - kPi / 8.0};
      const auto ana = fisher_full({0.0, v}, mapped);
      const double dv = -8.0 * eps / ((2.0 + eps * eps) * (2.0 + eps * eps));
      // the probe phase enters the fringe argument exactly like the model
      // phase (both as -2 phi), so the phase Jacobian is unity
      const double jpp = 1.0;
      Sym2 expect;
      expect.xx = ana.m.xx * jpp * jpp;
      expect.yy = ana.m.yy * dv * dv;
      expect.xy = ana.m.xy * jpp * dv;
      CHECK(num.fisher.m.xx == doctest::Approx(expect.xx).epsilon(1e-6));
      CHECK(num.fisher.m.yy == doctest::Approx(expect.yy).epsilon(1e-6));
      CHECK(num.fisher.m.xy == doctest::Approx(expect.xy).epsilon(1e-6));
    }
}

TEST_CASE("effective information never exceeds the diagonal") {
  for (double eps : {0.3, 0.8})
    for (double phi : {0.4, 1.0, 2.2}) {
      const auto pt = hb::fisher_hb(2, eps, phi);
      if (pt.singular) continue;
      CHECK(pt.eff_phi <= pt.fisher.m.xx * (1.0 + 1e-12));
      CHECK(pt.eff_eps <= pt.fisher.m.yy * (1.0 + 1e-12));
      CHECK(pt.eff_phi > 0.0);
      CHECK(pt.eff_eps > 0.0);
    }
}

TEST_CASE("optimize_phase returns a grid point maximizing the target") {
  const auto& grid = hb::default_phase_grid();
  const auto opt = hb::optimize_phase(2, 0.5, hb::Target::Phi, grid);
  CHECK(opt.phi_star >= 0.0);
  CHECK(opt.phi_star < kPi);
  // no other grid point does better
  for (size_t i = 0; i < grid.size(); i += 13) {
    const auto pt = hb::fisher_hb(2, 0.5, grid[i]);
    if (!pt.singular) CHECK(pt.eff_phi <= opt.value * (1.0 + 1e-12));
  }
}

TEST_CASE("upsilon lies in [1, 2]") {
  for (int n : {1, 2, 4})
    for (double eps : {0.3, 0.7, 1.0}) {
      const auto sp = hb::upsilon(n, eps, hb::default_phase_grid());
      CHECK(sp.upsilon >= 1.0 - 1e-9);
      CHECK(sp.upsilon <= 2.0 + 1e-9);
      CHECK(sp.max_eff_phi > 0.0);
      CHECK(sp.max_eff_eps > 0.0);
    }
}

TEST_CASE("scaling sweep records failures without aborting") {
  const std::vector<int> ns = {1, 2};
  const std::vector<double> eps = {0.0, 0.5};
  const auto table = hb::scaling_sweep(ns, eps);
  REQUIRE(table.size() == 4);
  for (const auto& sp : table) {
    if (sp.epsilon == 0.0) {
      // the eps direction carries no information at eps = 0
      CHECK_FALSE(sp.ok);
      CHECK(!sp.error.empty());
    } else {
      CHECK(sp.ok);
      CHECK(sp.upsilon > 0.0);
    }
  }
  // merged in index order (n-major, eps-minor)
  CHECK(table[0].n_per_arm == 1);
  CHECK(table[0].epsilon == 0.0);
  CHECK(table[3].n_per_arm == 2);
  CHECK(table[3].epsilon == 0.5);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(hb::fisher_hb(0, 0.5, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(hb::fisher_hb(2, -0.1, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(hb::fisher_hb(2, 1.5, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(hb::optimize_phase(2, 0.5, hb::Target::Phi, {}),
                  std::invalid_argument);
}
