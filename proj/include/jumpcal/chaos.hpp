#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "jumpcal/configuration.hpp"
#include "jumpcal/functional.hpp"
#include "jumpcal/measure.hpp"
#include "jumpcal/operators.hpp"
#include "jumpcal/region.hpp"
#include "jumpcal/rng.hpp"
#include "jumpcal/sampler.hpp"

namespace jumpcal {

// Product kernel 1_{A_1 x ... x A_k} with pairwise disjoint rectangular
// factors, optionally extended by a field region A (for divergence-side
// kernels g(theta_1..theta_k, theta) = 1^{(x)k} . 1_A(theta)). Kernels of
// this form vanish on the diagonal sets by construction.
struct ProductKernel {
  std::vector<Region> factors;
  std::optional<Region> extra;

  ProductKernel(std::vector<Region> f, std::optional<Region> a = std::nullopt)
      : factors(std::move(f)), extra(std::move(a)) {
    if (factors.empty() || factors.size() > 3)
      throw std::invalid_argument("product kernel: order k in {1,2,3}");
    std::vector<Region> all = factors;
    if (extra) all.push_back(*extra);
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j)
        if (!disjoint(all[i], all[j]))
          throw std::invalid_argument("product kernel: factors not disjoint");
  }

  std::size_t order() const { return factors.size(); }
};

// Ntilde(A)(omega) = N(A)(omega) - nu(A).
inline double compensated_count(const JumpConfiguration& w,
                                const JumpMeasure& m, const Region& r) {
  return static_cast<double>(w.count_in(r)) - m.mass(r);
}

// Pathwise multiple integral of a product kernel: the product of the
// compensated counts of its factors. Exact (counts plus closed-form masses).
inline double multiple_integral(const ProductKernel& g,
                                const JumpConfiguration& w,
                                const JumpMeasure& m) {
  double prod = 1.0;
  for (const auto& a : g.factors) prod *= compensated_count(w, m, a);
  return prod;
}

inline Functional chaos_functional(const ProductKernel& g,
                                   const JumpMeasure& m) {
  return {[g, m](const JumpConfiguration& w) {
            return multiple_integral(g, w, m);
          },
          0.0};  // centered: E[I_k] = 0
}

// The field u_theta = I_k(g(., theta)) = 1_A(theta) prod_j Ntilde(A_j).
inline RandomField chaos_field(const ProductKernel& g, const JumpMeasure& m) {
  if (!g.extra)
    throw std::invalid_argument("chaos_field: kernel needs the extra region");
  return {[g, m](const JumpPoint& theta, const JumpConfiguration& w) {
            if (!g.extra->contains(theta)) return 0.0;
            return multiple_integral(g, w, m);
          },
          false};
}

struct BridgeReport {
  int samples = 0;
  double max_abs_discrepancy = 0.0;
};

// Gradient bridge: Psi_theta I_k(g) against the chaos-side derivative
// sum_j 1_{A_j}(theta) prod_{l != j} Ntilde(A_l), at random (theta, omega).
inline BridgeReport verify_gradient_bridge(const ProductKernel& g,
                                           const JumpMeasure& m, double T,
                                           double eps, int samples, Rng& rng) {
  const Region box = Region::theta(T, eps);
  const Functional F = chaos_functional(g, m);
  const RandomField dF = ops::psi(F);
  BridgeReport report;
  for (int i = 0; i < samples; ++i) {
    const JumpConfiguration w = sample_config(m, T, eps, rng);
    const JumpPoint theta = m.sample_point(box, rng);
    const double lhs = dF(theta, w);
    double rhs = 0.0;
    for (std::size_t j = 0; j < g.factors.size(); ++j) {
      if (!g.factors[j].contains(theta)) continue;
      double prod = 1.0;
      for (std::size_t l = 0; l < g.factors.size(); ++l)
        if (l != j) prod *= compensated_count(w, m, g.factors[l]);
      rhs += prod;
    }
    report.max_abs_discrepancy =
        std::max(report.max_abs_discrepancy, std::abs(lhs - rhs));
    ++report.samples;
  }
  return report;
}

// Divergence bridge: Phi of the field I_k(g(., theta)) against the order
// k+1 multiple integral of the full product kernel.
inline BridgeReport verify_divergence_bridge(const ProductKernel& g,
                                             const JumpMeasure& m, double T,
                                             double eps, int samples,
                                             Rng& rng) {
  if (!g.extra)
    throw std::invalid_argument("divergence bridge: kernel needs extra region");
  const RandomField u = chaos_field(g, m);
  std::vector<Region> full = g.factors;
  full.push_back(*g.extra);
  BridgeReport report;
  for (int i = 0; i < samples; ++i) {
    const JumpConfiguration w = sample_config(m, T, eps, rng);
    // u vanishes off the extra region, so Phi's integral part lives on it.
    const double lhs = ops::phi(u, w, m, *g.extra, 1e-12);
    double rhs = 1.0;
    for (const auto& a : full) rhs *= compensated_count(w, m, a);
    report.max_abs_discrepancy =
        std::max(report.max_abs_discrepancy, std::abs(lhs - rhs));
    ++report.samples;
  }
  return report;
}

}  // namespace jumpcal
