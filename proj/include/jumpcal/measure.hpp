#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jumpcal/quadrature.hpp"
#include "jumpcal/region.hpp"
#include "jumpcal/rng.hpp"

namespace jumpcal {

class InfiniteMassError : public std::runtime_error {
 public:
  explicit InfiniteMassError(const std::string& what)
      : std::runtime_error(what) {}
};

// Time intensity h(t) = a + b*t with closed-form antiderivative and inverse.
// Covers the catalog: homogeneous (b = 0) and linearly modulated rates.
struct TimeIntensity {
  double a = 1.0;
  double b = 0.0;

  double operator()(double t) const { return a + b * t; }
  double antiderivative(double t) const { return a * t + 0.5 * b * t * t; }
  double integral(double t0, double t1) const {
    return antiderivative(t1) - antiderivative(t0);
  }

  // Solve H(t) - H(t0) = target for t >= t0; target in [0, H(t1)-H(t0)].
  double inverse(double t0, double target) const {
    if (b == 0.0) return t0 + target / a;
    // 0.5 b (t^2 - t0^2) + a (t - t0) = target
    const double c0 = a * t0 + 0.5 * b * t0 * t0 + target;
    const double disc = a * a + 2.0 * b * c0;
    return (-a + std::sqrt(std::max(0.0, disc))) / b;
  }

  bool valid_on(double t0, double t1) const {
    return (*this)(t0) >= 0.0 && (*this)(t1) >= 0.0;
  }
};

// Jump-size distribution catalog for the compound-Poisson family.
struct SizeDist {
  enum class Type { dirac, uniform, two_point };
  Type type = Type::dirac;
  double p0 = 1.0;  // dirac: atom; uniform: lower bound; two_point: +/- atom
  double p1 = 0.0;  // uniform: upper bound

  static SizeDist dirac(double x) {
    if (x == 0.0) throw std::invalid_argument("size atom must be nonzero");
    return {Type::dirac, x, 0.0};
  }
  static SizeDist uniform(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform: lo < hi required");
    return {Type::uniform, lo, hi};
  }
  static SizeDist two_point(double x) {
    if (x <= 0.0) throw std::invalid_argument("two_point: need x > 0");
    return {Type::two_point, x, 0.0};
  }
};

// Piecewise-constant tabulated density on |R_0 for the product family.
struct TabulatedDensity {
  std::vector<double> edges;   // strictly increasing, 0 not interior
  std::vector<double> values;  // density on [edges[i], edges[i+1])

  void validate() const {
    if (edges.size() < 2 || values.size() + 1 != edges.size())
      throw std::invalid_argument("tabulated density: bad table shape");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      if (!(edges[i] < edges[i + 1]))
        throw std::invalid_argument("tabulated density: edges not increasing");
      if (values[i] < 0.0)
        throw std::invalid_argument("tabulated density: negative density");
      if (edges[i] < 0.0 && edges[i + 1] > 0.0 && values[i] != 0.0)
        throw std::invalid_argument("tabulated density: mass at 0");
    }
  }
};

enum class MeasureKind { standard_poisson, compound_poisson, alpha_stable, product };

struct TruncationErrorL1 {
  double value = 0.0;       // the |x| integral, or the x^2 integral when flagged
  bool x2_proxy = false;    // true when the |x| integral diverges
};

// Deterministic jump measure nu(dt, dx) on [0,inf) x |R_0. All families are
// products h(t)dt (x) rho(dx); the size factor may have infinite mass near 0
// (alpha-stable). Immutable after construction.
class JumpMeasure {
 public:
  static JumpMeasure standard_poisson() {
    JumpMeasure m;
    m.kind_ = MeasureKind::standard_poisson;
    m.rate_ = 1.0;
    m.rho_ = SizeDist::dirac(1.0);
    return m;
  }

  static JumpMeasure compound_poisson(double rate, SizeDist rho,
                                      TimeIntensity h = {1.0, 0.0}) {
    if (rate < 0.0) throw std::invalid_argument("rate must be >= 0");
    JumpMeasure m;
    m.kind_ = MeasureKind::compound_poisson;
    m.rate_ = rate;
    m.rho_ = rho;
    m.h_ = h;
    return m;
  }

  static JumpMeasure alpha_stable(double c, double alpha,
                                  TimeIntensity h = {1.0, 0.0}) {
    if (c <= 0.0) throw std::invalid_argument("alpha-stable: c > 0 required");
    if (!(alpha > 0.0 && alpha < 2.0))
      throw std::invalid_argument("alpha-stable: alpha in (0,2) required");
    JumpMeasure m;
    m.kind_ = MeasureKind::alpha_stable;
    m.c_ = c;
    m.alpha_ = alpha;
    m.h_ = h;
    return m;
  }

  static JumpMeasure product(TimeIntensity h, TabulatedDensity rho) {
    rho.validate();
    JumpMeasure m;
    m.kind_ = MeasureKind::product;
    m.h_ = h;
    m.table_ = std::move(rho);
    return m;
  }

  MeasureKind kind() const { return kind_; }
  double stable_alpha() const { return alpha_; }
  double stable_c() const { return c_; }
  const TimeIntensity& time_intensity() const { return h_; }
  bool infinite_activity() const { return kind_ == MeasureKind::alpha_stable; }

  // Density of the time factor at t (rate * h(t)); the size factor is
  // normalized separately by size_mass / size_integral.
  double time_density(double t) const { return rate_scale() * h_(t); }

  double time_factor(double t0, double t1) const {
    if (!h_.valid_on(t0, t1))
      throw std::invalid_argument("time intensity negative on interval");
    const double scale =
        kind_ == MeasureKind::compound_poisson ? rate_ : 1.0;
    return scale * h_.integral(t0, t1);
  }

  // nu(r). Closed form per family; throws InfiniteMassError when infinite.
  double mass(const Region& r) const {
    if (r.empty()) return 0.0;
    return time_factor(r.t_min, r.t_max) * size_mass(r.x_inner, r.x_outer);
  }

  // One point from nu restricted to r, normalized.
  JumpPoint sample_point(const Region& r, Rng& rng) const {
    const double m = mass(r);
    if (!(m > 0.0)) throw std::invalid_argument("sample_point: zero mass region");
    JumpPoint p;
    p.time = sample_time(r.t_min, r.t_max, rng);
    p.size = sample_size(r.x_inner, r.x_outer, rng);
    return p;
  }

  // Adaptive estimate of the integral of f over r against nu, absolute
  // tolerance tol. Divergent integrals are reported, not returned as numbers.
  IntegrationResult integrate(
      const std::function<double(double, double)>& f, const Region& r,
      double tol = 1e-9, const std::vector<double>& time_breaks = {}) const {
    try {
      return {integrate_or_throw(f, r, tol, time_breaks), false};
    } catch (const DivergenceError&) {
      return {0.0, true};
    }
  }

  double integrate_or_throw(const std::function<double(double, double)>& f,
                            const Region& r, double tol = 1e-9,
                            const std::vector<double>& time_breaks = {}) const {
    if (r.empty()) return 0.0;
    const double span = r.t_max - r.t_min;
    const double inner_tol = tol * 0.1 / std::max(1.0, span);
    auto g = [&](double t) {
      return rate_scale() * h_(t) *
             size_integral([&](double x) { return f(t, x); }, r.x_inner,
                           r.x_outer, inner_tol);
    };
    // Integrate piecewise between supplied breakpoints (typically the jump
    // times of a configuration) so the time integrand is smooth per piece.
    std::vector<double> cuts{r.t_min, r.t_max};
    for (double b : time_breaks)
      if (b > r.t_min && b < r.t_max) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    const double piece_tol = tol * 0.8 / static_cast<double>(cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      total += integrate_adaptive(g, cuts[i], cuts[i + 1], piece_tol, limits_);
    return total;
  }

  // c_eps(t) = int_0^t int_{eps<|x|<=1} x nu(ds, dx). Exact per family.
  double compensator(double t, double eps) const {
    if (eps < 0.0) throw std::invalid_argument("compensator: eps >= 0");
    if (infinite_activity() && eps == 0.0)
      throw std::invalid_argument("compensator: eps > 0 required for infinite activity");
    if (eps >= 1.0) return 0.0;
    const double value = time_factor(0.0, t) * size_first_moment(eps, 1.0);
#ifndef NDEBUG
    if (!(infinite_activity() && eps == 0.0)) {
      const double bound = mass(Region(0.0, t, std::min(eps, 1.0), 1.0)) + 1e-12;
      assert(std::abs(value) <= bound * (1.0 + 1e-12) + 1e-12);
    }
#endif
    return value;
  }

  // L1 truncation error of discarding jumps with |x| <= eps on [0, T]:
  // the |x| integral when finite, else the x^2 integral with a proxy flag.
  TruncationErrorL1 truncation_error_l1(double T, double eps) const {
    if (eps <= 0.0) throw std::invalid_argument("truncation_error_l1: eps > 0");
    const double tf = time_factor(0.0, T);
    if (kind_ == MeasureKind::alpha_stable) {
      if (alpha_ < 1.0)
        return {tf * c_ * 2.0 * std::pow(eps, 1.0 - alpha_) / (1.0 - alpha_),
                false};
      return {tf * c_ * 2.0 * std::pow(eps, 2.0 - alpha_) / (2.0 - alpha_),
              true};
    }
    return {tf * size_abs_moment(0.0, eps), false};
  }

  // True when the size factor is symmetric about 0 (odd integrands vanish).
  bool symmetric_sizes() const {
    switch (kind_) {
      case MeasureKind::alpha_stable:
        return true;
      case MeasureKind::compound_poisson:
      case MeasureKind::standard_poisson:
        if (rho_.type == SizeDist::Type::two_point) return true;
        if (rho_.type == SizeDist::Type::uniform) return rho_.p0 == -rho_.p1;
        return false;
      case MeasureKind::product:
        return false;  // not detected for tables
    }
    return false;
  }

  // Size-factor mass of the annulus {a < |x| <= b}.
  double size_mass(double a, double b) const {
    if (b <= a) return 0.0;
    switch (kind_) {
      case MeasureKind::standard_poisson:
      case MeasureKind::compound_poisson:
        switch (rho_.type) {
          case SizeDist::Type::dirac:
            return in_annulus(rho_.p0, a, b) ? 1.0 : 0.0;
          case SizeDist::Type::two_point:
            return 0.5 * (in_annulus(rho_.p0, a, b) ? 1.0 : 0.0) +
                   0.5 * (in_annulus(-rho_.p0, a, b) ? 1.0 : 0.0);
          case SizeDist::Type::uniform: {
            const double dens = 1.0 / (rho_.p1 - rho_.p0);
            return dens * annulus_overlap_length(rho_.p0, rho_.p1, a, b);
          }
        }
        return 0.0;
      case MeasureKind::alpha_stable: {
        if (a <= 0.0)
          throw InfiniteMassError(
              "alpha-stable measure has infinite mass near 0; use x_inner > 0");
        const double hi = std::isinf(b) ? 0.0 : std::pow(b, -alpha_);
        return c_ * 2.0 / alpha_ * (std::pow(a, -alpha_) - hi);
      }
      case MeasureKind::product: {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < table_.edges.size(); ++i)
          total += table_.values[i] *
                   annulus_overlap_length(table_.edges[i], table_.edges[i + 1],
                                          a, b);
        return total;
      }
    }
    return 0.0;
  }

  // Size-factor integral of f over the annulus {a < |x| <= b}.
  double size_integral(const std::function<double(double)>& f, double a,
                       double b, double tol) const {
    switch (kind_) {
      case MeasureKind::standard_poisson:
      case MeasureKind::compound_poisson:
        switch (rho_.type) {
          case SizeDist::Type::dirac:
            return in_annulus(rho_.p0, a, b) ? f(rho_.p0) : 0.0;
          case SizeDist::Type::two_point:
            return 0.5 * (in_annulus(rho_.p0, a, b) ? f(rho_.p0) : 0.0) +
                   0.5 * (in_annulus(-rho_.p0, a, b) ? f(-rho_.p0) : 0.0);
          case SizeDist::Type::uniform: {
            const double dens = 1.0 / (rho_.p1 - rho_.p0);
            double total = 0.0;
            for (auto [lo, hi] : annulus_overlaps(rho_.p0, rho_.p1, a, b))
              total += dens * integrate_adaptive(f, lo, hi, tol, limits_);
            return total;
          }
        }
        return 0.0;
      case MeasureKind::alpha_stable:
        return stable_size_integral(f, a, b, tol);
      case MeasureKind::product: {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < table_.edges.size(); ++i) {
          if (table_.values[i] == 0.0) continue;
          for (auto [lo, hi] : annulus_overlaps(table_.edges[i],
                                                table_.edges[i + 1], a, b))
            total += table_.values[i] *
                     integrate_adaptive(f, lo, hi, tol, limits_);
        }
        return total;
      }
    }
    return 0.0;
  }

  // Exact first moment int x rho(dx) over the annulus.
  double size_first_moment(double a, double b) const {
    switch (kind_) {
      case MeasureKind::alpha_stable:
        return 0.0;  // symmetric
      case MeasureKind::standard_poisson:
      case MeasureKind::compound_poisson:
        switch (rho_.type) {
          case SizeDist::Type::dirac:
            return in_annulus(rho_.p0, a, b) ? rho_.p0 : 0.0;
          case SizeDist::Type::two_point:
            return 0.0;
          case SizeDist::Type::uniform: {
            const double dens = 1.0 / (rho_.p1 - rho_.p0);
            double total = 0.0;
            for (auto [lo, hi] : annulus_overlaps(rho_.p0, rho_.p1, a, b))
              total += dens * 0.5 * (hi * hi - lo * lo);
            return total;
          }
        }
        return 0.0;
      case MeasureKind::product: {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < table_.edges.size(); ++i)
          for (auto [lo, hi] : annulus_overlaps(table_.edges[i],
                                                table_.edges[i + 1], a, b))
            total += table_.values[i] * 0.5 * (hi * hi - lo * lo);
        return total;
      }
    }
    return 0.0;
  }

  double size_abs_moment(double a, double b) const {
    switch (kind_) {
      case MeasureKind::alpha_stable:
        if (alpha_ >= 1.0 && a <= 0.0)
          throw DivergenceError("|x| not nu-integrable near 0 for alpha >= 1");
        if (alpha_ == 1.0) return c_ * 2.0 * std::log(b / a);
        return c_ * 2.0 / (1.0 - alpha_) *
               (std::pow(b, 1.0 - alpha_) -
                (a > 0.0 ? std::pow(a, 1.0 - alpha_) : 0.0));
      default:
        return size_integral([](double x) { return std::abs(x); }, a, b, 1e-12);
    }
  }

  // Fixed quadrature nodes (x_i, w_i) with sum w_i f(x_i) ~ int f over the
  // size factor on the annulus {a < |x| <= b}. Exact for atomic families;
  // Gauss-Legendre per smooth piece otherwise. Used by nested-MC integrators
  // where the integrand is expensive and adaptivity would misfire on noise.
  std::vector<std::pair<double, double>> size_nodes(double a, double b,
                                                    int n) const {
    std::vector<std::pair<double, double>> out;
    auto add_gl = [&](double lo, double hi, double density,
                      const std::function<double(double)>& map) {
      const GaussLegendreRule rule = gauss_legendre(n);
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (int i = 0; i < n; ++i) {
        const double y = mid + half * rule.nodes[i];
        out.emplace_back(map(y), density * half * rule.weights[i]);
      }
    };
    auto identity = [](double y) { return y; };
    switch (kind_) {
      case MeasureKind::standard_poisson:
      case MeasureKind::compound_poisson:
        switch (rho_.type) {
          case SizeDist::Type::dirac:
            if (in_annulus(rho_.p0, a, b)) out.emplace_back(rho_.p0, 1.0);
            return out;
          case SizeDist::Type::two_point:
            if (in_annulus(rho_.p0, a, b)) out.emplace_back(rho_.p0, 0.5);
            if (in_annulus(-rho_.p0, a, b)) out.emplace_back(-rho_.p0, 0.5);
            return out;
          case SizeDist::Type::uniform: {
            const double dens = 1.0 / (rho_.p1 - rho_.p0);
            for (auto [lo, hi] : annulus_overlaps(rho_.p0, rho_.p1, a, b))
              add_gl(lo, hi, dens, identity);
            return out;
          }
        }
        return out;
      case MeasureKind::product:
        for (std::size_t i = 0; i + 1 < table_.edges.size(); ++i)
          for (auto [lo, hi] : annulus_overlaps(table_.edges[i],
                                                table_.edges[i + 1], a, b))
            add_gl(lo, hi, table_.values[i], identity);
        return out;
      case MeasureKind::alpha_stable: {
        if (a <= 0.0)
          throw InfiniteMassError("size_nodes: alpha-stable needs a > 0");
        // y = |x|^{-alpha} flattens the power law; GL in y per sign branch.
        const double y_lo = std::isinf(b) ? 0.0 : std::pow(b, -alpha_);
        const double y_hi = std::pow(a, -alpha_);
        for (int sign : {+1, -1})
          add_gl(y_lo, y_hi, c_ / alpha_, [sign, this](double y) {
            return sign * std::pow(y, -1.0 / alpha_);
          });
        return out;
      }
    }
    return out;
  }

  double sample_time(double t0, double t1, Rng& rng) const {
    const double total = h_.integral(t0, t1);
    return h_.inverse(t0, rng.uniform() * total);
  }

  double sample_size(double a, double b, Rng& rng) const {
    switch (kind_) {
      case MeasureKind::standard_poisson:
      case MeasureKind::compound_poisson:
        switch (rho_.type) {
          case SizeDist::Type::dirac:
            if (!in_annulus(rho_.p0, a, b))
              throw std::invalid_argument("sample_size: empty restriction");
            return rho_.p0;
          case SizeDist::Type::two_point: {
            const bool plus = in_annulus(rho_.p0, a, b);
            const bool minus = in_annulus(-rho_.p0, a, b);
            if (!plus && !minus)
              throw std::invalid_argument("sample_size: empty restriction");
            if (plus && minus) return rng.uniform() < 0.5 ? rho_.p0 : -rho_.p0;
            return plus ? rho_.p0 : -rho_.p0;
          }
          case SizeDist::Type::uniform:
            return sample_from_intervals(
                annulus_overlaps(rho_.p0, rho_.p1, a, b), rng);
        }
        throw std::logic_error("unreachable");
      case MeasureKind::alpha_stable: {
        if (a <= 0.0)
          throw InfiniteMassError("cannot sample alpha-stable sizes down to 0");
        // |x| by inverse power transform, sign by a fair coin.
        const double pa = std::pow(a, -alpha_);
        const double pb = std::isinf(b) ? 0.0 : std::pow(b, -alpha_);
        const double y = pa - rng.uniform() * (pa - pb);
        const double mag = std::pow(y, -1.0 / alpha_);
        return rng.uniform() < 0.5 ? mag : -mag;
      }
      case MeasureKind::product: {
        // Choose a bin by its annulus-restricted mass, then uniformly inside.
        std::vector<std::pair<double, double>> segs;
        std::vector<double> weights;
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < table_.edges.size(); ++i) {
          for (auto seg : annulus_overlaps(table_.edges[i],
                                           table_.edges[i + 1], a, b)) {
            const double w = table_.values[i] * (seg.second - seg.first);
            if (w > 0.0) {
              segs.push_back(seg);
              weights.push_back(w);
              total += w;
            }
          }
        }
        if (total <= 0.0)
          throw std::invalid_argument("sample_size: empty restriction");
        double u = rng.uniform() * total;
        for (std::size_t i = 0; i < segs.size(); ++i) {
          if (u <= weights[i] || i + 1 == segs.size())
            return segs[i].first +
                   (segs[i].second - segs[i].first) * rng.uniform();
          u -= weights[i];
        }
        throw std::logic_error("unreachable");
      }
    }
    throw std::logic_error("unreachable");
  }

 private:
  // Intervals of {x in [lo, hi]} intersected with the annulus {a < |x| <= b}.
  static std::vector<std::pair<double, double>> annulus_overlaps(double lo,
                                                                 double hi,
                                                                 double a,
                                                                 double b) {
    std::vector<std::pair<double, double>> out;
    auto clip = [&](double l, double h) {
      const double cl = std::max(l, lo);
      const double ch = std::min(h, hi);
      if (ch > cl) out.emplace_back(cl, ch);
    };
    if (std::isinf(b)) {
      clip(-std::numeric_limits<double>::max(), -a);
      clip(a, std::numeric_limits<double>::max());
    } else {
      clip(-b, -a);
      clip(a, b);
    }
    return out;
  }

  static double annulus_overlap_length(double lo, double hi, double a,
                                       double b) {
    double len = 0.0;
    for (auto [l, h] : annulus_overlaps(lo, hi, a, b)) len += h - l;
    return len;
  }

  static bool in_annulus(double x, double a, double b) {
    const double ax = std::abs(x);
    return ax > a && ax <= b;
  }

  static double sample_from_intervals(
      const std::vector<std::pair<double, double>>& segs, Rng& rng) {
    double total = 0.0;
    for (auto [l, h] : segs) total += h - l;
    if (total <= 0.0)
      throw std::invalid_argument("sample_size: empty restriction");
    double u = rng.uniform() * total;
    for (auto [l, h] : segs) {
      if (u <= h - l) return l + u;
      u -= h - l;
    }
    return segs.back().second;
  }

  double rate_scale() const {
    return kind_ == MeasureKind::compound_poisson ||
                   kind_ == MeasureKind::standard_poisson
               ? rate_
               : 1.0;
  }

  // int f(x) c|x|^{-1-alpha} dx over the annulus, substitution y = |x|^{-alpha}
  // near the origin and a doubling ladder toward infinity.
  double stable_size_integral(const std::function<double(double)>& f, double a,
                              double b, double tol) const {
    double total = 0.0;
    for (int sign : {+1, -1}) {
      auto g = [&](double x) {
        return f(sign * x) * c_ * std::pow(x, -1.0 - alpha_);
      };
      if (a > 0.0) {
        if (std::isinf(b))
          total += integrate_to_infinity(g, a, 0.5 * tol, limits_);
        else
          total += integrate_adaptive(g, a, b, 0.5 * tol, limits_);
      } else {
        // y = x^{-alpha}: int_0^b f c x^{-1-alpha} dx
        //               = (c/alpha) int_{b^{-alpha}}^{inf} f(y^{-1/alpha}) dy.
        auto gy = [&](double y) {
          return c_ / alpha_ * f(sign * std::pow(y, -1.0 / alpha_));
        };
        const double cap = std::isinf(b) ? 1.0 : b;
        total += integrate_to_infinity(gy, std::pow(cap, -alpha_), 0.5 * tol,
                                       limits_);
        if (std::isinf(b))
          total += integrate_to_infinity(g, 1.0, 0.5 * tol, limits_);
      }
    }
    return total;
  }

  MeasureKind kind_ = MeasureKind::standard_poisson;
  TimeIntensity h_{1.0, 0.0};
  double rate_ = 1.0;              // compound poisson
  SizeDist rho_ = SizeDist::dirac(1.0);
  double c_ = 1.0;                 // alpha-stable
  double alpha_ = 0.5;
  TabulatedDensity table_;
  QuadratureLimits limits_;
};

}  // namespace jumpcal
