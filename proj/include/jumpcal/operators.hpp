#pragma once

#include <vector>

#include "jumpcal/configuration.hpp"
#include "jumpcal/functional.hpp"
#include "jumpcal/measure.hpp"
#include "jumpcal/region.hpp"

namespace jumpcal::ops {

// Transfer operator: (T_theta F)(omega) = F of the configuration with theta
// added. Defined on all functionals.
inline RandomField transfer(const Functional& F) {
  return {[f = F.eval](const JumpPoint& theta, const JumpConfiguration& w) {
            return f(add_point(w, theta));
          },
          false};
}

// Intrinsic gradient: (Psi_theta F)(omega) = F(add theta) - F(omega).
inline RandomField psi(const Functional& F) {
  return {[f = F.eval](const JumpPoint& theta, const JumpConfiguration& w) {
            return f(add_point(w, theta)) - f(w);
          },
          false};
}

// x-weighted gradient: (T_theta F - F) / x.
inline RandomField bar_psi(const Functional& F) {
  return {[f = F.eval](const JumpPoint& theta, const JumpConfiguration& w) {
            return (f(add_point(w, theta)) - f(w)) / theta.size;
          },
          false};
}

// Pathwise jump integral: sum over the points of w of the field evaluated at
// the configuration with that point removed. Zero on the empty configuration.
inline double s_integral(const RandomField& u, const JumpConfiguration& w) {
  double total = 0.0;
  for (const auto& theta : w.points())
    total += u(theta, remove_point(w, theta));
  return total;
}

// x-weighted pathwise jump integral.
inline double bar_s(const RandomField& u, const JumpConfiguration& w) {
  double total = 0.0;
  for (const auto& theta : w.points())
    total += u(theta, remove_point(w, theta)) * theta.size;
  return total;
}

namespace detail {
inline std::vector<double> jump_times(const JumpConfiguration& w) {
  std::vector<double> out;
  out.reserve(w.size());
  for (const auto& p : w.points()) out.push_back(p.time);
  return out;
}
}  // namespace detail

// Pathwise integral of the field against nu over r. The time axis is split
// at the jump times of w, where theta -> u(theta, w) is typically
// discontinuous. Throws DivergenceError when the integral does not converge.
inline double ecal(const RandomField& u, const JumpConfiguration& w,
                   const JumpMeasure& m, const Region& r, double tol = 1e-9) {
  return m.integrate_or_throw(
      [&](double t, double x) { return u(JumpPoint{t, x}, w); }, r, tol,
      detail::jump_times(w));
}

// x^2-weighted pathwise integral against nu.
inline double bar_ecal(const RandomField& u, const JumpConfiguration& w,
                       const JumpMeasure& m, const Region& r,
                       double tol = 1e-9) {
  return m.integrate_or_throw(
      [&](double t, double x) { return u(JumpPoint{t, x}, w) * x * x; }, r,
      tol, detail::jump_times(w));
}

// Intrinsic divergence Phi = S - E. For predictable u this is the
// compensated sum against Ntilde.
inline double phi(const RandomField& u, const JumpConfiguration& w,
                  const JumpMeasure& m, const Region& r, double tol = 1e-9) {
  return s_integral(u, w) - ecal(u, w, m, r, tol);
}

inline double bar_phi(const RandomField& u, const JumpConfiguration& w,
                      const JumpMeasure& m, const Region& r,
                      double tol = 1e-9) {
  return bar_s(u, w) - bar_ecal(u, w, m, r, tol);
}

}  // namespace jumpcal::ops
