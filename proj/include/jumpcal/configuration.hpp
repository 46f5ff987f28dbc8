#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumpcal/measure.hpp"
#include "jumpcal/region.hpp"

namespace jumpcal {

// A point of the canonical sample space: a finite, time-sorted,
// duplicate-free set of jump points. The empty configuration plays the role
// of the null path. Immutable; perturbations return copies.
class JumpConfiguration {
 public:
  JumpConfiguration() = default;

  explicit JumpConfiguration(std::vector<JumpPoint> points)
      : points_(std::move(points)) {
    normalize();
  }

  const std::vector<JumpPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  bool contains(const JumpPoint& theta) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), theta, order);
    return it != points_.end() && *it == theta;
  }

  // Number of points inside a region.
  std::size_t count_in(const Region& r) const {
    std::size_t n = 0;
    for (const auto& p : points_)
      if (r.contains(p)) ++n;
    return n;
  }

  friend bool operator==(const JumpConfiguration& a,
                         const JumpConfiguration& b) {
    return a.points_ == b.points_;
  }

  static bool order(const JumpPoint& a, const JumpPoint& b) {
    return a.time != b.time ? a.time < b.time : a.size < b.size;
  }

 private:
  void normalize() {
    std::sort(points_.begin(), points_.end(), order);
    for (const auto& p : points_)
      if (p.size == 0.0)
        throw std::invalid_argument("configuration: zero jump size");
    auto last = std::unique(points_.begin(), points_.end());
    points_.erase(last, points_.end());
  }

  std::vector<JumpPoint> points_;
};

// Creation map: insert theta in sorted position. If theta is already a point
// of w, returns w unchanged (the exact-coincidence convention).
inline JumpConfiguration add_point(const JumpConfiguration& w,
                                   const JumpPoint& theta) {
  if (theta.size == 0.0)
    throw std::invalid_argument("add_point: zero jump size");
  if (w.contains(theta)) return w;
  std::vector<JumpPoint> pts = w.points();
  pts.insert(std::upper_bound(pts.begin(), pts.end(), theta,
                              JumpConfiguration::order),
             theta);
  return JumpConfiguration(std::move(pts));
}

// Annihilation map: remove theta if present, otherwise return w unchanged.
inline JumpConfiguration remove_point(const JumpConfiguration& w,
                                      const JumpPoint& theta) {
  if (!w.contains(theta)) return w;
  std::vector<JumpPoint> pts;
  pts.reserve(w.size() - 1);
  for (const auto& p : w.points())
    if (!(p == theta)) pts.push_back(p);
  return JumpConfiguration(std::move(pts));
}

// Truncation projection: keep points with time <= m and |size| > 1/m.
inline JumpConfiguration project(const JumpConfiguration& w, int m) {
  if (m < 1) throw std::invalid_argument("project: m >= 1 required");
  std::vector<JumpPoint> pts;
  for (const auto& p : w.points())
    if (p.time <= static_cast<double>(m) &&
        std::abs(p.size) > 1.0 / static_cast<double>(m))
      pts.push_back(p);
  return JumpConfiguration(std::move(pts));
}

// Points of w with time strictly before s.
inline JumpConfiguration restrict_before(const JumpConfiguration& w,
                                         double s) {
  std::vector<JumpPoint> pts;
  for (const auto& p : w.points())
    if (p.time < s) pts.push_back(p);
  return JumpConfiguration(std::move(pts));
}

// Union of configurations with disjoint point sets (e.g. disjoint supports).
inline JumpConfiguration merge(const JumpConfiguration& a,
                               const JumpConfiguration& b) {
  std::vector<JumpPoint> pts = a.points();
  pts.insert(pts.end(), b.points().begin(), b.points().end());
  return JumpConfiguration(std::move(pts));
}

// Pathwise value of the truncated pure jump process at time t: sum of sizes
// of points up to t minus the small-jump compensator c_eps(t).
inline double path_value(const JumpConfiguration& w, double t,
                         const JumpMeasure& m, double eps) {
  double total = 0.0;
  for (const auto& p : w.points()) {
    if (p.time > t) break;
    total += p.size;
  }
  return total - m.compensator(t, eps);
}

inline std::string to_csv(const JumpConfiguration& w) {
  std::string out;
  char buf[64];
  for (const auto& p : w.points()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.time, p.size);
    out += buf;
  }
  return out;
}

inline JumpConfiguration config_from_csv(const std::string& text) {
  std::vector<JumpPoint> pts;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("configuration csv: missing comma");
    pts.push_back({std::stod(line.substr(0, comma)),
                   std::stod(line.substr(comma + 1))});
  }
  return JumpConfiguration(std::move(pts));
}

}  // namespace jumpcal
