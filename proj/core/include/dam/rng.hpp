#pragma once

#include <cmath>
#include <cstdint>

namespace dam {

// Counter-based deterministic RNG. Every random quantity in the project is a
// pure function of a 64-bit key chain, so datasets, initializations and
// training runs replay bit-exactly from their seeds.
//
// Mixing function: splitmix64 finalizer (Steele, Lea, Flood 2014).
// Key derivation: child = mix(parent_state ^ mix(tag + GAMMA)).
// Stream: i-th draw = mix(state + (i+1) * GAMMA).
//
// Uniform doubles come from the top 53 bits; the normal generator uses the
// Marsaglia polar method (sqrt/log only, no trig).
inline constexpr std::uint64_t kRngGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kRngGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  // Independent child stream identified by `tag`.
  Rng fork(std::uint64_t tag) const {
    Rng r(0);
    r.state_ = splitmix64(state_ ^ splitmix64(tag + kRngGamma));
    return r;
  }

  std::uint64_t next_u64() { return splitmix64(state_ + (++counter_) * kRngGamma); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal, Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Unit 2-vector drawn by rejection; uses only +,*,/ and sqrt so results are
  // identical on any IEEE-754 platform (used by the bit-exact renderer).
  void unit_vector(double& cx, double& sx) {
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s > 1.0 || s < 1e-4);
    const double n = std::sqrt(s);
    cx = u / n;
    sx = v / n;
  }

  std::uint64_t state() const { return state_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dam
