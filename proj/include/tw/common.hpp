#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tw {

using Complex = std::complex<double>;

inline constexpr double kMergeTol = 1e-12;   // duplicate-atom merge tolerance
inline constexpr double kBoundaryTol = 1e-12;

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline double sq(double v) { return v * v; }

inline double dist2(const Point2& a, const Point2& b) {
  return std::hypot(a.x1 - b.x1, a.x2 - b.x2);
}

/// Distance from point t to the closed interval [a,b].
inline double dist_to_interval(double t, double a, double b) {
  if (t < a) return a - t;
  if (t > b) return t - b;
  return 0.0;
}

/// Euclidean distance from a point to the closed axis-aligned box
/// [a1,b1] x [a2,b2].
inline double dist_to_box(const Point2& p, double a1, double b1, double a2, double b2) {
  const double dx = dist_to_interval(p.x1, a1, b1);
  const double dy = dist_to_interval(p.x2, a2, b2);
  return std::hypot(dx, dy);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// xorshift-based engine kept deliberately small: suite reports must be
// byte-identical across runs with the same seed, so we avoid distribution
// classes whose output the standard leaves unspecified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool bit() { return (next_u64() & 1u) != 0; }

  /// Child stream with an independent state, for per-trial parallel seeding.
  Rng fork(std::uint64_t tag) {
    Rng r(state_ ^ (0xd1342543de82ef95ULL * (tag + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
};

}  // namespace tw
