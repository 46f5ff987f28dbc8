#include <cmath>

#include <doctest.h>

#include "jumpcal/functional.hpp"
#include "jumpcal/operators.hpp"
#include "jumpcal/sampler.hpp"

using namespace jumpcal;

namespace {
const JumpMeasure kPoisson = JumpMeasure::standard_poisson();
const Region kBox = Region::theta(1.0, 0.0);
}  // namespace

TEST_CASE("gradient of the count functional is identically one") {
  const Functional n = functionals::count();
  const RandomField psi_n = ops::psi(n);
  const JumpConfiguration w({{0.3, 1.0}, {0.6, 1.0}});
  CHECK(psi_n({0.5, 1.0}, w) == 1.0);
  CHECK(psi_n({0.1, -2.0}, JumpConfiguration()) == 1.0);
  // adding an existing point changes nothing
  CHECK(psi_n({0.3, 1.0}, w) == 0.0);
}

TEST_CASE("S evaluates the field with the point removed") {
  // u(theta, omega) = theta.size * (count of omega)
  const RandomField u{[](const JumpPoint& th, const JumpConfiguration& w) {
                        return th.size * static_cast<double>(w.size());
                      },
                      false};
  const JumpConfiguration w({{0.2, 2.0}, {0.7, 3.0}});
  // each term sees the other point only: 2*1 + 3*1
  CHECK(ops::s_integral(u, w) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(ops::s_integral(u, JumpConfiguration()) == 0.0);
  // x-weighted variant multiplies by the point's own size
  CHECK(ops::bar_s(u, w) == doctest::Approx(2.0 * 2.0 + 3.0 * 3.0).epsilon(1e-14));
}

TEST_CASE("nu-integral splits the time axis at the path's jumps") {
  const RandomField before = fields::count_before();
  const JumpConfiguration w({{0.25, 1.0}, {0.75, 1.0}});
  // int_0^1 N(t-) dt = 0*0.25 + 1*0.5 + 2*0.25 = 1
  CHECK(ops::ecal(before, w, kPoisson, kBox, 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Phi of a predictable field is the compensated sum") {
  const RandomField before = fields::count_before();
  const JumpConfiguration w({{0.25, 1.0}, {0.75, 1.0}});
  // S(before) = N(0.25-) + N(0.75-) = 0 + 1; E = 1 (previous test)
  CHECK(ops::phi(before, w, kPoisson, kBox, 1e-12) ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("bar operators use the x^2 measure") {
  const JumpMeasure m =
      JumpMeasure::compound_poisson(2.0, SizeDist::two_point(0.5));
  const RandomField u = fields::one();
  const JumpConfiguration w({{0.5, 0.5}, {0.8, -0.5}});
  CHECK(ops::bar_s(u, w) == doctest::Approx(0.0).epsilon(1e-14));
  // int x^2 nu over [0,1]: rate 2 * E[x^2] = 2 * 0.25
  CHECK(ops::bar_ecal(u, w, m, Region::theta(1.0, 0.0), 1e-12) ==
        doctest::Approx(0.5).epsilon(1e-10));
  CHECK(ops::bar_phi(u, w, m, Region::theta(1.0, 0.0), 1e-12) ==
        doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("product rule for the gradient, exact on a fixed draw") {
  const JumpMeasure m =
      JumpMeasure::compound_poisson(1.5, SizeDist::uniform(0.2, 1.0));
  Rng rng = Rng::stream(21, 0);
  const Functional F = functionals::count();
  const Functional G = functionals::linear_integral(
      [](double t, double x) { return t * x; });
  for (int i = 0; i < 200; ++i) {
    const JumpConfiguration w = sample_config(m, 1.0, 0.0, rng);
    const JumpPoint th = m.sample_point(Region::theta(1.0, 0.0), rng);
    const double pf = F(add_point(w, th)) - F(w);
    const double pg = G(add_point(w, th)) - G(w);
    const double lhs =
        F(add_point(w, th)) * G(add_point(w, th)) - F(w) * G(w);
    CHECK(lhs == doctest::Approx(G(w) * pf + F(w) * pg + pf * pg)
                     .epsilon(1e-12));
  }
}

TEST_CASE("transfer of S: T_theta(S u) = u_theta + S(T_theta u)") {
  const JumpMeasure m =
      JumpMeasure::compound_poisson(2.0, SizeDist::uniform(-1.0, 1.0));
  const RandomField u{[](const JumpPoint& th, const JumpConfiguration& w) {
                        return th.size + 0.25 * static_cast<double>(w.size());
                      },
                      false};
  Rng rng = Rng::stream(22, 0);
  for (int i = 0; i < 200; ++i) {
    const JumpConfiguration w = sample_config(m, 1.0, 0.0, rng);
    const JumpPoint th = m.sample_point(Region::theta(1.0, 0.0), rng);
    const double lhs = ops::s_integral(u, add_point(w, th));
    double rhs = u(th, w);
    for (const auto& p : w.points())
      rhs += u(p, add_point(remove_point(w, p), th));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("ecal reports divergence instead of returning a number") {
  const JumpMeasure heavy = JumpMeasure::alpha_stable(1.0, 1.5);
  const RandomField u = fields::coordinate_x();
  // |x| is not integrable near 0 for alpha = 1.5; the size factor is
  // symmetric so the signed integral would cancel; use |x| explicitly.
  const RandomField absx = fields::deterministic(
      [](double, double x) { return std::abs(x); });
  const IntegrationResult r = heavy.integrate(
      [&](double t, double x) { return absx({t, x}, JumpConfiguration()); },
      Region(0.0, 1.0, 0.0, 1.0), 1e-9);
  CHECK(r.divergent);
  (void)u;
}
