#pragma once

#include <stdexcept>
#include <vector>

#include "jumpcal/configuration.hpp"
#include "jumpcal/measure.hpp"
#include "jumpcal/region.hpp"
#include "jumpcal/rng.hpp"

namespace jumpcal {

// One draw from the canonical law on a region: Poisson point count with mean
// nu(r), locations i.i.d. from the normalized restriction.
inline JumpConfiguration sample_config_on(const JumpMeasure& m, const Region& r,
                                          Rng& rng) {
  double lambda;
  try {
    lambda = m.mass(r);
  } catch (const InfiniteMassError&) {
    throw InfiniteMassError(
        "sample_config: region has infinite mass; choose eps > 0");
  }
  if (lambda == 0.0) return JumpConfiguration();
  const std::uint64_t n = rng.poisson(lambda);
  std::vector<JumpPoint> pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) pts.push_back(m.sample_point(r, rng));
  return JumpConfiguration(std::move(pts));
}

// Draw from the canonical law at truncation (T, eps).
inline JumpConfiguration sample_config(const JumpMeasure& m, double T,
                                       double eps, Rng& rng) {
  return sample_config_on(m, Region::theta(T, eps), rng);
}

// Refine a configuration sampled at truncation eps_old on [0, T] down to
// eps_new by superimposing an independent draw from the annulus
// {eps_new < |x| <= eps_old}. Disjoint supports, so the marginal law of the
// result is the canonical law at eps_new.
inline JumpConfiguration refine(const JumpConfiguration& w,
                                const JumpMeasure& m, double T, double eps_old,
                                double eps_new, Rng& rng) {
  if (!(eps_new < eps_old) || eps_new <= 0.0)
    throw std::invalid_argument("refine: need 0 < eps_new < eps_old");
  const Region annulus(0.0, T, eps_new, eps_old);
  return merge(w, sample_config_on(m, annulus, rng));
}

// L1 size of what truncation at eps discards on [0, T]; see
// JumpMeasure::truncation_error_l1. The criterion (|x| integral when finite,
// x^2 proxy otherwise) is this artifact's choice; the underlying theory is
// qualitative about the limit eps -> 0.
inline TruncationErrorL1 truncation_error_l1(const JumpMeasure& m, double T,
                                             double eps) {
  return m.truncation_error_l1(T, eps);
}

}  // namespace jumpcal
