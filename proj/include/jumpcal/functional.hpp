#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

#include "jumpcal/configuration.hpp"
#include "jumpcal/measure.hpp"
#include "jumpcal/region.hpp"

namespace jumpcal {

// An evaluable functional F: configurations -> reals. Catalog factories set
// `mean` to the closed-form expectation under the truncation they were built
// for, when one exists; reconstruction and identity code prefers it over MC.
struct Functional {
  std::function<double(const JumpConfiguration&)> eval;
  std::optional<double> mean;

  double operator()(const JumpConfiguration& w) const { return eval(w); }
};

// An evaluable random field u(theta, omega). `predictable` marks fields whose
// value at theta = (s, x) depends only on the jumps strictly before s.
struct RandomField {
  std::function<double(const JumpPoint&, const JumpConfiguration&)> eval;
  bool predictable = false;

  double operator()(const JumpPoint& theta, const JumpConfiguration& w) const {
    return eval(theta, w);
  }
};

namespace functionals {

inline Functional constant(double c) {
  return {[c](const JumpConfiguration&) { return c; }, c};
}

// Jump count n(omega); mean nu(Theta_{T,eps}) when the truncation is given.
inline Functional count() {
  return {[](const JumpConfiguration& w) {
            return static_cast<double>(w.size());
          },
          std::nullopt};
}

inline Functional count(const JumpMeasure& m, double T, double eps) {
  Functional f = count();
  f.mean = m.mass(Region::theta(T, eps));
  return f;
}

// Terminal path value J_T at truncation eps. Mean is the big-jump drift.
inline Functional path_terminal(const JumpMeasure& m, double T, double eps) {
  Functional f;
  f.eval = [m, T, eps](const JumpConfiguration& w) {
    return path_value(w, T, m, eps);
  };
  f.mean = m.time_factor(0.0, T) *
           m.size_first_moment(1.0, std::numeric_limits<double>::infinity());
  return f;
}

// Sum over the configuration of a deterministic kernel: int f dN.
inline Functional linear_integral(std::function<double(double, double)> f) {
  return {[f = std::move(f)](const JumpConfiguration& w) {
            double total = 0.0;
            for (const auto& p : w.points()) total += f(p.time, p.size);
            return total;
          },
          std::nullopt};
}

// Discounted exponential-Levy terminal price
//   S_T = exp(log S0 + (r - c2) T + int int y Ntilde(ds, dy)),
// c2 = int (e^y - 1 - y) nu_L(dy). Requires a finite-activity driver; the
// discounted price is then a martingale and E[S_T] = S0 e^{rT}.
struct ExpLevy {
  JumpMeasure measure;
  double s0 = 1.0;
  double r = 0.0;
  double T = 1.0;
  double c2 = 0.0;
  double mean_jump = 0.0;  // int y nu_L(dy) over all sizes

  double price(const JumpConfiguration& w, double t) const {
    double jumps = 0.0;
    for (const auto& p : w.points()) {
      if (p.time > t) break;
      jumps += p.size;
    }
    const double drift = measure.time_factor(0.0, t) * mean_jump;
    return s0 * std::exp((r - c2) * t + jumps - drift);
  }
};

inline ExpLevy make_exp_levy(const JumpMeasure& m, double s0, double r,
                             double T) {
  if (m.infinite_activity())
    throw std::invalid_argument("exp_levy: finite-activity driver required");
  if (m.time_intensity().b != 0.0)
    throw std::invalid_argument("exp_levy: stationary (Levy) driver required");
  ExpLevy e;
  e.measure = m;
  e.s0 = s0;
  e.r = r;
  e.T = T;
  const double inf = std::numeric_limits<double>::infinity();
  e.c2 = m.time_factor(0.0, 1.0) *
         m.size_integral([](double y) { return std::exp(y) - 1.0 - y; }, 0.0,
                         inf, 1e-13);
  e.mean_jump = m.size_first_moment(0.0, inf);
  return e;
}

inline Functional exp_levy(const JumpMeasure& m, double s0, double r,
                           double T) {
  ExpLevy e = make_exp_levy(m, s0, r, T);
  Functional f;
  f.eval = [e](const JumpConfiguration& w) { return e.price(w, e.T); };
  f.mean = s0 * std::exp(r * T);
  return f;
}

inline Functional sum(Functional a, Functional b) {
  std::optional<double> mean;
  if (a.mean && b.mean) mean = *a.mean + *b.mean;
  return {[a = std::move(a.eval), b = std::move(b.eval)](
              const JumpConfiguration& w) { return a(w) + b(w); },
          mean};
}

inline Functional product(Functional a, Functional b) {
  return {[a = std::move(a.eval), b = std::move(b.eval)](
              const JumpConfiguration& w) { return a(w) * b(w); },
          std::nullopt};
}

inline Functional scale(double c, Functional a) {
  std::optional<double> mean;
  if (a.mean) mean = c * *a.mean;
  return {[c, a = std::move(a.eval)](const JumpConfiguration& w) {
            return c * a(w);
          },
          mean};
}

}  // namespace functionals

namespace fields {

// Deterministic field u(theta); trivially predictable.
inline RandomField deterministic(std::function<double(double, double)> f) {
  return {[f = std::move(f)](const JumpPoint& theta, const JumpConfiguration&) {
            return f(theta.time, theta.size);
          },
          true};
}

inline RandomField one() {
  return deterministic([](double, double) { return 1.0; });
}

inline RandomField coordinate_x() {
  return deterministic([](double, double x) { return x; });
}

inline RandomField indicator(const Region& r) {
  return deterministic([r](double t, double x) {
    return r.contains(t, x) ? 1.0 : 0.0;
  });
}

// Jump count strictly before the field's time argument; the canonical
// nontrivial predictable field of the catalog.
inline RandomField count_before() {
  return {[](const JumpPoint& theta, const JumpConfiguration& w) {
            return static_cast<double>(restrict_before(w, theta.time).size());
          },
          true};
}

inline RandomField product(RandomField a, RandomField b) {
  const bool pred = a.predictable && b.predictable;
  return {[a = std::move(a.eval), b = std::move(b.eval)](
              const JumpPoint& theta, const JumpConfiguration& w) {
            return a(theta, w) * b(theta, w);
          },
          pred};
}

inline RandomField scale(double c, RandomField a) {
  return {[c, a = std::move(a.eval)](const JumpPoint& theta,
                                     const JumpConfiguration& w) {
            return c * a(theta, w);
          },
          a.predictable};
}

// F(omega) as a field constant in theta.
inline RandomField of_functional(Functional f) {
  return {[f = std::move(f.eval)](const JumpPoint&,
                                  const JumpConfiguration& w) { return f(w); },
          false};
}

}  // namespace fields

}  // namespace jumpcal
