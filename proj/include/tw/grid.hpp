#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tw/common.hpp"
#include "tw/measure.hpp"

namespace tw {

struct GridParams {
  double epsilon = 0.5;  // goodness exponent, in (0,1)
  int r = 2;             // goodness scale gap
  int k_min = -8;        // finest scale: interval lengths lambda*2^k
  int k_max = 0;         // coarsest scale

  void validate() const {
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0,1)");
    require(r >= 1, "r must be a positive integer");
    require(k_min <= k_max, "empty scale window");
  }
  int num_scales() const { return k_max - k_min + 1; }
};

struct DyadicInterval {
  int k = 0;
  long n = 0;
  double a = 0.0;
  double b = 0.0;
  double len() const { return b - a; }
  double center() const { return 0.5 * (a + b); }
  bool operator==(const DyadicInterval& o) const { return k == o.k && n == o.n; }
};

struct DyadicCube {
  DyadicInterval iv;
  long m = 0;  // vertical index; m = 0 is the Carleson cube Q_I
  double y_lo() const { return iv.len() * static_cast<double>(m); }
  double y_hi() const { return iv.len() * static_cast<double>(m + 1); }
  Point2 center() const { return {iv.center(), 0.5 * (y_lo() + y_hi())}; }
};

// A shifted/dilated dyadic lattice restricted to a finite scale window.
// Scale-k intervals are lambda*(2^k n + shift(k)) with shift(k) the partial
// sum of the shift bits at scales below k.
class Grid {
 public:
  Grid() { shifts_.assign(2, 0.0); }
  Grid(GridParams params, std::vector<int> xi, double lambda)
      : params_(params), xi_(std::move(xi)), lambda_(lambda) {
    params_.validate();
    require(static_cast<int>(xi_.size()) == params_.num_scales() - 1,
            "expected one shift bit per scale step");
    require(lambda_ >= 1.0 && lambda_ <= 2.0, "dilation must lie in [1,2]");
    shifts_.assign(params_.num_scales(), 0.0);
    for (int i = 1; i < params_.num_scales(); ++i) {
      require(xi_[i - 1] == 0 || xi_[i - 1] == 1, "shift bits must be 0 or 1");
      shifts_[i] = shifts_[i - 1] + std::ldexp(static_cast<double>(xi_[i - 1]), params_.k_min + i - 1);
    }
  }

  const GridParams& params() const { return params_; }
  const std::vector<int>& xi() const { return xi_; }
  double lambda() const { return lambda_; }

  double shift(int k) const {
    require(k >= params_.k_min && k <= params_.k_max, "scale outside window");
    return shifts_[k - params_.k_min];
  }
  int bit(int k) const {  // bit that splits scale k+1 into scale-k children
    require(k >= params_.k_min && k < params_.k_max, "bit scale outside window");
    return xi_[k - params_.k_min];
  }

  double length(int k) const { return lambda_ * std::ldexp(1.0, k); }

  DyadicInterval interval(int k, long n) const {
    const double a = lambda_ * (std::ldexp(static_cast<double>(n), k) + shift(k));
    return {k, n, a, a + length(k)};
  }

  DyadicCube cube(int k, long n, long m) const {
    require(m >= 0, "cube vertical index must be nonnegative");
    return {interval(k, n), m};
  }

  /// Index of the scale-k interval containing x.
  long locate(int k, double x) const {
    return static_cast<long>(std::floor(std::ldexp(x / lambda_ - shift(k), -k)));
  }

  DyadicInterval containing(int k, double x) const { return interval(k, locate(k, x)); }

  std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& iv) const {
    require(iv.k > params_.k_min, "no children below the finest scale");
    const long base = 2 * iv.n + bit(iv.k - 1);
    return {interval(iv.k - 1, base), interval(iv.k - 1, base + 1)};
  }

  DyadicInterval parent(const DyadicInterval& iv) const {
    require(iv.k < params_.k_max, "no parent above the coarsest scale");
    const long shifted = iv.n - bit(iv.k);
    return interval(iv.k + 1, shifted >= 0 ? shifted / 2 : (shifted - 1) / 2);
  }

  /// The four scale-(k-1) children of a cube.
  std::vector<DyadicCube> cube_children(const DyadicCube& q) const {
    auto [l, r] = children(q.iv);
    return {DyadicCube{l, 2 * q.m}, DyadicCube{r, 2 * q.m},
            DyadicCube{l, 2 * q.m + 1}, DyadicCube{r, 2 * q.m + 1}};
  }

  Region::Ptr region(const DyadicInterval& iv) const { return Region::interval(iv.a, iv.b); }
  Region::Ptr region(const DyadicCube& q) const {
    return Region::carleson_cube(q.iv.a, q.iv.b, q.m);
  }
  Region::Ptr carleson_cube_region(int k, long n) const {
    const auto iv = interval(k, n);
    return Region::carleson_cube(iv.a, iv.b, 0);
  }

  /// Distance from [a,b] to the endpoint lattice of scale k.
  double dist_to_lattice(double a, double b, int k) const {
    const double step = length(k);
    const double off = lambda_ * shift(k);
    const double lo = std::floor((a - off) / step) * step + off;  // lattice point <= a
    if (lo + step <= b) return 0.0;  // a lattice point lies inside [a,b]
    return std::min(a - lo, std::max(lo + step - b, 0.0));
  }

  /// Distance from [a,b] with a >= 0 to {0, s, 2s, ...} with s = length(k);
  /// used for the horizontal grid lines of the extended lattice on the upper
  /// half-plane.
  double dist_to_vertical_lattice(double a, double b, int k) const {
    const double step = length(k);
    const double lo = std::max(std::floor(a / step), 0.0) * step;  // lattice point <= a
    const double hi = lo + step;
    if (hi <= b) return 0.0;
    return std::min(a - lo, hi - b);
  }

  bool is_good(const DyadicInterval& iv) const {
    const double eps = params_.epsilon;
    for (int kj = iv.k + params_.r + 1; kj <= params_.k_max; ++kj) {
      const double threshold = std::pow(iv.len(), eps) * std::pow(length(kj), 1.0 - eps);
      if (dist_to_lattice(iv.a, iv.b, kj) < threshold) return false;
    }
    return true;
  }

  bool is_good(const DyadicCube& q) const {
    const double eps = params_.epsilon;
    for (int kj = q.iv.k + params_.r + 1; kj <= params_.k_max; ++kj) {
      const double threshold = std::pow(q.iv.len(), eps) * std::pow(length(kj), 1.0 - eps);
      const double d = std::min(dist_to_lattice(q.iv.a, q.iv.b, kj),
                                dist_to_vertical_lattice(q.y_lo(), q.y_hi(), kj));
      if (d < threshold) return false;
    }
    return true;
  }

 private:
  GridParams params_;
  std::vector<int> xi_;
  double lambda_ = 1.0;
  std::vector<double> shifts_;
};

inline Grid standard_grid(const GridParams& params) {
  params.validate();
  return Grid(params, std::vector<int>(params.num_scales() - 1, 0), 1.0);
}

/// Random grid: i.i.d. fair shift bits per scale step and dilation drawn from
/// the normalized d(lambda)/lambda measure on [1,2].
inline Grid sample_grid(std::uint64_t seed, const GridParams& params) {
  params.validate();
  Rng rng(seed);
  std::vector<int> xi(params.num_scales() - 1);
  for (auto& b : xi) b = rng.bit() ? 1 : 0;
  const double lambda = std::exp2(rng.uniform());
  return Grid(params, std::move(xi), lambda);
}

struct WhitneyResult {
  std::vector<DyadicInterval> members;    // pairwise disjoint, maximal
  std::vector<DyadicInterval> remainder;  // uncovered slivers at the finest scale
};

/// Maximal K strongly contained in I (2^r |K| <= |I|) with
/// dist(K, boundary of I) >= |K|^eps |I|^(1-eps), recursing to the finest scale.
inline WhitneyResult whitney(const Grid& grid, const DyadicInterval& iv) {
  const auto& p = grid.params();
  WhitneyResult out;
  const int k_top = iv.k - p.r;
  if (k_top < p.k_min) return out;

  const double ilen = iv.len();
  auto qualifies = [&](const DyadicInterval& K) {
    const double d = std::min(K.a - iv.a, iv.b - K.b);
    return d >= std::pow(K.len(), p.epsilon) * std::pow(ilen, 1.0 - p.epsilon);
  };

  std::vector<DyadicInterval> stack;
  const long n_lo = grid.locate(k_top, iv.a + 0.5 * grid.length(k_top));
  const long count = 1L << (iv.k - k_top);
  for (long i = count - 1; i >= 0; --i) stack.push_back(grid.interval(k_top, n_lo + i));
  while (!stack.empty()) {
    DyadicInterval K = stack.back();
    stack.pop_back();
    if (qualifies(K)) {
      out.members.push_back(K);
    } else if (K.k == p.k_min) {
      out.remainder.push_back(K);
    } else {
      auto [l, r] = grid.children(K);
      stack.push_back(r);
      stack.push_back(l);
    }
  }
  return out;
}

/// No sigma atom within 1e-12 of an interval endpoint at any window scale and
/// no tau atom on an interior grid line of the extended lattice. Atoms on the
/// x-axis itself do not obstruct: the half-open cube convention makes the
/// bottom edge unambiguous.
inline bool is_admissible(const Grid& grid, const Measure1D& sigma, const Measure2D& tau) {
  const auto& p = grid.params();
  for (int k = p.k_min; k <= p.k_max; ++k) {
    const double step = grid.length(k);
    const double off = grid.lambda() * grid.shift(k);
    auto on_lattice = [&](double x) {
      const double q = (x - off) / step;
      return std::abs(q - std::round(q)) * step <= kBoundaryTol;
    };
    for (const auto& a : sigma.atoms())
      if (on_lattice(a.position)) return false;
    for (const auto& a : tau.atoms()) {
      if (on_lattice(a.x1)) return false;
      const double qy = a.x2 / step;
      if (std::abs(qy - std::round(qy)) * step <= kBoundaryTol && std::round(qy) >= 1.0)
        return false;
    }
  }
  return true;
}

/// Monte Carlo badness frequency of the interval at the finest window scale.
inline double estimate_pbad(const GridParams& params, int trials, std::uint64_t seed = 1) {
  require(trials >= 1, "trials must be positive");
  Rng rng(seed);
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    Grid g = sample_grid(rng.next_u64(), params);
    if (!g.is_good(g.interval(params.k_min, 0))) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(trials);
}

inline nlohmann::json to_json(const Grid& g) {
  return {{"xi", g.xi()},
          {"lambda", g.lambda()},
          {"epsilon", g.params().epsilon},
          {"r", g.params().r},
          {"window", {g.params().k_min, g.params().k_max}}};
}

inline Grid grid_from_json(const nlohmann::json& j) {
  GridParams p;
  p.epsilon = j.at("epsilon").get<double>();
  p.r = j.at("r").get<int>();
  p.k_min = j.at("window").at(0).get<int>();
  p.k_max = j.at("window").at(1).get<int>();
  return Grid(p, j.at("xi").get<std::vector<int>>(), j.at("lambda").get<double>());
}

/// All window-scale intervals meeting [lo, hi); the workhorse for supremum
/// families and sweep loops.
inline std::vector<DyadicInterval> intervals_meeting(const Grid& grid, double lo, double hi) {
  std::vector<DyadicInterval> out;
  const auto& p = grid.params();
  for (int k = p.k_min; k <= p.k_max; ++k) {
    const long n0 = grid.locate(k, lo);
    const long n1 = grid.locate(k, hi - kBoundaryTol);
    for (long n = n0; n <= n1; ++n) out.push_back(grid.interval(k, n));
  }
  return out;
}

}  // namespace tw
