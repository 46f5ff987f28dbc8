#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jumpcal {

// A single jump: time of occurrence and (nonzero) size.
struct JumpPoint {
  double time = 0.0;
  double size = 0.0;

  friend bool operator==(const JumpPoint& a, const JumpPoint& b) {
    return a.time == b.time && a.size == b.size;
  }
};

// Time-size rectangle [t_min, t_max] x {x_inner < |x| <= x_outer}.
struct Region {
  double t_min = 0.0;
  double t_max = 0.0;
  double x_inner = 0.0;
  double x_outer = std::numeric_limits<double>::infinity();

  Region() = default;
  Region(double tmin, double tmax, double xin, double xout)
      : t_min(tmin), t_max(tmax), x_inner(xin), x_outer(xout) {
    if (t_min < 0.0 || t_max < t_min)
      throw std::invalid_argument("region: bad time bounds");
    if (x_inner < 0.0 || x_outer < x_inner)
      throw std::invalid_argument("region: bad size bounds");
  }

  // [0, T] x {eps < |x|}
  static Region theta(double T, double eps) {
    return Region(0.0, T, eps, std::numeric_limits<double>::infinity());
  }

  bool empty() const { return t_min == t_max || x_inner == x_outer; }

  bool contains(double t, double x) const {
    const double ax = std::abs(x);
    return t >= t_min && t <= t_max && ax > x_inner && ax <= x_outer;
  }

  bool contains(const JumpPoint& p) const { return contains(p.time, p.size); }
};

inline bool disjoint(const Region& a, const Region& b) {
  if (a.empty() || b.empty()) return true;
  const bool time_disjoint = a.t_max <= b.t_min || b.t_max <= a.t_min;
  const bool size_disjoint = a.x_outer <= b.x_inner || b.x_outer <= a.x_inner;
  return time_disjoint || size_disjoint;
}

}  // namespace jumpcal
