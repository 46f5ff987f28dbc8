#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace jumpcal {

// Thrown when an integral is detected to diverge (refinement or magnitude
// cap exceeded). Callers that must report rather than fail catch this and
// produce an IntegrationResult with divergent = true.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

struct QuadratureLimits {
  long max_panels = 1'000'000;
  double magnitude_cap = 1e12;
};

struct IntegrationResult {
  double value = 0.0;
  bool divergent = false;
};

namespace detail {

struct SimpsonState {
  long panels = 0;
  QuadratureLimits limits;
};

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            SimpsonState& st, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  st.panels += 2;
  if (st.panels > st.limits.max_panels)
    throw DivergenceError("quadrature panel cap exceeded");
  const double delta = left + right - whole;
  if (std::abs(left + right) > st.limits.magnitude_cap)
    throw DivergenceError("quadrature magnitude cap exceeded");
  if ((depth > 0 && std::abs(delta) <= 15.0 * tol) || depth > 48)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, st,
                              depth + 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, st,
                              depth + 1);
}

}  // namespace detail

// Adaptive Simpson on [a, b] with absolute tolerance tol. The integrand must
// be finite on the closed interval.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double tol,
                          const QuadratureLimits& limits = {}) {
  if (a == b) return 0.0;
  detail::SimpsonState st{0, limits};
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, st, 0);
}

// Integral over (a, b] where f may blow up as x -> a+. Works down a dyadic
// ladder of subintervals toward the singular endpoint; declares divergence
// when the running sum exceeds the magnitude cap or the ladder terms do not
// fade below tolerance.
template <typename F>
double integrate_singular_lower(const F& f, double a, double b, double tol,
                                const QuadratureLimits& limits = {}) {
  if (b <= a) return 0.0;
  const double width = b - a;
  double sum = 0.0;
  double hi = b;
  int consecutive_small = 0;
  for (int k = 0; k < 360; ++k) {
    const double lo = a + width * std::ldexp(1.0, -(k + 1));
    if (!(lo > a) || !(lo < hi)) break;  // ladder exhausted in double precision
    const double term = integrate_adaptive(f, lo, hi, tol * 0.25, limits);
    sum += term;
    if (std::abs(sum) > limits.magnitude_cap)
      throw DivergenceError("singular integral exceeds magnitude cap");
    hi = lo;
    consecutive_small = std::abs(term) <= tol * 0.25 ? consecutive_small + 1 : 0;
    if (consecutive_small >= 3 && k >= 8) return sum;
  }
  // Terms never faded: either genuinely divergent or ladder exhausted while
  // the last rung still contributed.
  const double probe = std::abs(
      integrate_adaptive(f, a + width * 0x1.0p-300, a + width * 0x1.0p-299,
                         tol, limits));
  if (probe > tol) throw DivergenceError("endpoint singularity not integrable");
  return sum;
}

// Integral over [a, infinity). Doubling windows; divergence when the window
// contributions do not fade.
template <typename F>
double integrate_to_infinity(const F& f, double a, double tol,
                             const QuadratureLimits& limits = {}) {
  double lo = a;
  double width = std::max(1.0, std::abs(a));
  double sum = 0.0;
  int consecutive_small = 0;
  for (int k = 0; k < 2200; ++k) {
    const double hi = lo + width;
    const double term = integrate_adaptive(f, lo, hi, tol * 0.25, limits);
    sum += term;
    if (std::abs(sum) > limits.magnitude_cap)
      throw DivergenceError("integral to infinity exceeds magnitude cap");
    lo = hi;
    width *= 2.0;
    consecutive_small = std::abs(term) <= tol * 0.25 ? consecutive_small + 1 : 0;
    if (consecutive_small >= 3 && k >= 4) return sum;
    if (!std::isfinite(lo)) break;
  }
  throw DivergenceError("tail of integral to infinity does not fade");
}

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
// Legendre polynomial. Used where fixed-node rules beat adaptive refinement
// (nested Monte Carlo integrands that are expensive and smooth).
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace jumpcal
