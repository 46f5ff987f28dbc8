#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace jumpcal {

// SplitMix64 step, used to mix (master seed, stream index) pairs into
// independent engine seeds. Substream i of a master seed is the same on
// every platform and thread schedule.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= index * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ULL);
}

// Counter-seeded RNG. Draw routines are hand-rolled on top of the raw
// engine output so that results are bit-identical across standard library
// implementations (std::uniform_real_distribution et al. are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master, std::uint64_t index) {
    return Rng(stream_seed(master, index));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
  }

  // Poisson by multiplicative (Knuth) method, chunked so the running
  // product never underflows for large means.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_knuth(30.0);
      mean -= 30.0;
    }
    return total + poisson_knuth(mean);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::uint64_t poisson_knuth(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 engine_;
};

}  // namespace jumpcal
