#pragma once

#include <array>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "tw/common.hpp"
#include "tw/grid.hpp"
#include "tw/measure.hpp"

namespace tw {

// Measure-adapted Haar function on an interval: constant on each child,
// mean zero and unit norm in L^2(sigma) unless a child is starved of mass.
struct HaarFunction {
  DyadicInterval iv;
  double split = 0.0;        // boundary between the two children
  double value_minus = 0.0;  // value on the left child
  double value_plus = 0.0;   // value on the right child (larger coordinates)
  bool is_zero = true;

  double operator()(double t) const {
    if (is_zero || t < iv.a || t >= iv.b) return 0.0;
    return t < split ? value_minus : value_plus;
  }
};

inline HaarFunction haar_function(const Measure1D& sigma, const Grid& grid,
                                  const DyadicInterval& iv) {
  HaarFunction h;
  h.iv = iv;
  auto [left, right] = grid.children(iv);
  h.split = right.a;
  const double ml = sigma.mass_in(left.a, left.b);
  const double mr = sigma.mass_in(right.a, right.b);
  if (ml <= 0.0 || mr <= 0.0) return h;  // convention: zero object
  const double scale = std::sqrt(ml * mr / (ml + mr));
  h.value_plus = scale / mr;
  h.value_minus = -scale / ml;
  h.is_zero = false;
  return h;
}

// ---------------------------------------------------------------------------
// Haar expansion of a function given by its values on the atoms of sigma.
// Coefficients live on window scales above the finest; each root at the
// coarsest scale carries its plain average.
// ---------------------------------------------------------------------------
struct HaarEntry {
  DyadicInterval iv;
  double coeff = 0.0;
  double split = 0.0;
  double value_minus = 0.0;
  double value_plus = 0.0;
};

struct HaarExpansion {
  Grid grid;
  std::map<std::pair<int, long>, HaarEntry> entries;
  std::map<long, double> root_means;  // scale k_max interval index -> mean
  std::map<long, double> root_mass;

  double norm_sq() const {
    double s = 0.0;
    for (const auto& [key, e] : entries) s += e.coeff * e.coeff;
    for (const auto& [n, m] : root_means) s += m * m * root_mass.at(n);
    return s;
  }

  double coefficient(int k, long n) const {
    auto it = entries.find({k, n});
    return it == entries.end() ? 0.0 : it->second.coeff;
  }
};

inline HaarExpansion analyze(const Measure1D& sigma, const std::vector<double>& f,
                             const Grid& grid) {
  require(f.size() == sigma.size(), "one value per atom expected");
  for (const auto& a : sigma.atoms()) {
    // admissibility of the grid for sigma alone
    for (int k = grid.params().k_min; k <= grid.params().k_max; ++k) {
      const double q = (a.position - grid.lambda() * grid.shift(k)) / grid.length(k);
      require(std::abs(q - std::round(q)) * grid.length(k) > kBoundaryTol,
              "grid is not admissible for sigma");
    }
  }
  HaarExpansion ex{grid, {}, {}, {}};
  const auto& p = grid.params();
  // aggregate mass and f-mass per interval, finest to coarsest
  std::map<long, std::pair<double, double>> cur;  // n -> (mass, f*mass)
  for (size_t i = 0; i < sigma.size(); ++i) {
    const long n = grid.locate(p.k_min, sigma.atoms()[i].position);
    auto& c = cur[n];
    c.first += sigma.atoms()[i].mass;
    c.second += f[i] * sigma.atoms()[i].mass;
  }
  for (int k = p.k_min + 1; k <= p.k_max; ++k) {
    std::map<long, std::pair<double, double>> up;
    for (const auto& [n, agg] : cur) {
      const long np = (n - grid.bit(k - 1)) >= 0 ? (n - grid.bit(k - 1)) / 2
                                                 : (n - grid.bit(k - 1) - 1) / 2;
      auto& u = up[np];
      u.first += agg.first;
      u.second += agg.second;
    }
    for (const auto& [np, agg] : up) {
      const DyadicInterval iv = grid.interval(k, np);
      auto [left, right] = grid.children(iv);
      const auto itl = cur.find(left.n);
      const auto itr = cur.find(right.n);
      const double ml = itl == cur.end() ? 0.0 : itl->second.first;
      const double mr = itr == cur.end() ? 0.0 : itr->second.first;
      if (ml <= 0.0 || mr <= 0.0) continue;
      const double scale = std::sqrt(ml * mr / (ml + mr));
      const double vp = scale / mr;
      const double vm = -scale / ml;
      ex.entries[{k, np}] =
          HaarEntry{iv, vp * itr->second.second + vm * itl->second.second, right.a, vm, vp};
    }
    cur = std::move(up);
  }
  for (const auto& [n, agg] : cur) {
    if (agg.first <= 0.0) continue;
    ex.root_means[n] = agg.second / agg.first;
    ex.root_mass[n] = agg.first;
  }
  return ex;
}

/// Reconstruct atom values: root mean plus the telescoping Haar series.
inline std::vector<double> synthesize(const Measure1D& sigma, const HaarExpansion& ex) {
  std::vector<double> out(sigma.size(), 0.0);
  const auto& p = ex.grid.params();
  for (size_t i = 0; i < sigma.size(); ++i) {
    const double t = sigma.atoms()[i].position;
    const long nr = ex.grid.locate(p.k_max, t);
    auto itr = ex.root_means.find(nr);
    double v = itr == ex.root_means.end() ? 0.0 : itr->second;
    for (int k = p.k_max; k > p.k_min; --k) {
      auto it = ex.entries.find({k, ex.grid.locate(k, t)});
      if (it == ex.entries.end()) continue;
      const auto& e = it->second;
      v += e.coeff * (t < e.split ? e.value_minus : e.value_plus);
    }
    out[i] = v;
  }
  return out;
}

inline std::pair<HaarExpansion, HaarExpansion> split_good_bad(const HaarExpansion& ex) {
  HaarExpansion good{ex.grid, {}, ex.root_means, ex.root_mass};
  HaarExpansion bad{ex.grid, {}, {}, {}};
  for (const auto& [key, e] : ex.entries) {
    if (ex.grid.is_good(e.iv))
      good.entries[key] = e;
    else
      bad.entries[key] = e;
  }
  return {std::move(good), std::move(bad)};
}

// ---------------------------------------------------------------------------
// Martingale differences on the extended lattice of cubes
// ---------------------------------------------------------------------------
struct MartingaleDifference2D {
  DyadicCube cube;
  double parent_mean = 0.0;
  std::array<double, 4> child_means{};  // order of Grid::cube_children
  std::array<bool, 4> charged{};
  bool is_zero = true;

  /// Value of Delta_Q g at a point of the cube (child constants minus mean).
  double value_at(const Grid& grid, const Point2& x) const {
    if (is_zero) return 0.0;
    auto kids = grid.cube_children(cube);
    for (int i = 0; i < 4; ++i) {
      const auto& c = kids[i];
      if (x.x1 >= c.iv.a && x.x1 < c.iv.b && x.x2 >= c.y_lo() && x.x2 < c.y_hi())
        return (charged[i] ? child_means[i] : 0.0) - parent_mean;
    }
    return 0.0;
  }
};

inline MartingaleDifference2D martingale_difference_cube(const Measure2D& tau, const Grid& grid,
                                                         const DyadicCube& q,
                                                         const std::vector<double>& g) {
  require(g.size() == tau.size(), "one value per atom expected");
  MartingaleDifference2D d;
  d.cube = q;
  auto kids = grid.cube_children(q);
  double tot_mass = 0.0, tot_gm = 0.0;
  int ncharged = 0;
  for (int i = 0; i < 4; ++i) {
    double m = 0.0, gm = 0.0;
    for (size_t a = 0; a < tau.size(); ++a) {
      const auto& at = tau.atoms()[a];
      const auto& c = kids[i];
      if (at.x1 >= c.iv.a && at.x1 < c.iv.b && at.x2 >= c.y_lo() && at.x2 < c.y_hi()) {
        m += at.mass;
        gm += g[a] * at.mass;
      }
    }
    tot_mass += m;
    tot_gm += gm;
    if (m > 0.0) {
      d.charged[i] = true;
      d.child_means[i] = gm / m;
      ++ncharged;
    }
  }
  if (ncharged < 2) return d;  // convention: zero unless two children charged
  d.parent_mean = tot_gm / tot_mass;
  d.is_zero = false;
  return d;
}

struct CubeKey {
  int k;
  long n;
  long m;
  bool operator<(const CubeKey& o) const { return std::tie(k, n, m) < std::tie(o.k, o.n, o.m); }
};

struct CubeEntry {
  MartingaleDifference2D diff;
  double norm_sq = 0.0;  // ||Delta_Q g||^2_tau
};

struct CubeExpansion {
  Grid grid;
  std::map<CubeKey, CubeEntry> entries;
  std::map<std::pair<long, long>, double> root_means;  // (n, m) at k_max
  std::map<std::pair<long, long>, double> root_mass;

  double norm_sq() const {
    double s = 0.0;
    for (const auto& [key, e] : entries) s += e.norm_sq;
    for (const auto& [nm, mean] : root_means) s += mean * mean * root_mass.at(nm);
    return s;
  }
};

inline CubeKey key_of(const DyadicCube& q) { return {q.iv.k, q.iv.n, q.m}; }

inline CubeExpansion analyze_cubes(const Measure2D& tau, const std::vector<double>& g,
                                   const Grid& grid) {
  require(g.size() == tau.size(), "one value per atom expected");
  CubeExpansion ex{grid, {}, {}, {}};
  const auto& p = grid.params();
  struct Agg {
    double mass = 0.0;
    double gm = 0.0;
  };
  std::map<std::pair<long, long>, Agg> cur;  // (n,m) at current scale
  for (size_t i = 0; i < tau.size(); ++i) {
    const auto& at = tau.atoms()[i];
    const long n = grid.locate(p.k_min, at.x1);
    const long m = static_cast<long>(std::floor(at.x2 / grid.length(p.k_min)));
    auto& c = cur[{n, m}];
    c.mass += at.mass;
    c.gm += g[i] * at.mass;
  }
  for (int k = p.k_min + 1; k <= p.k_max; ++k) {
    std::map<std::pair<long, long>, Agg> up;
    std::map<std::pair<long, long>, std::array<Agg, 4>> kids_of;
    for (const auto& [nm, agg] : cur) {
      const long shifted = nm.first - grid.bit(k - 1);
      const long np = shifted >= 0 ? shifted / 2 : (shifted - 1) / 2;
      const long mp = nm.second / 2;
      const int child_x = static_cast<int>(nm.first - (2 * np + grid.bit(k - 1)));
      const int child_y = static_cast<int>(nm.second - 2 * mp);
      auto& u = up[{np, mp}];
      u.mass += agg.mass;
      u.gm += agg.gm;
      kids_of[{np, mp}][child_x + 2 * child_y] = agg;  // matches cube_children order
    }
    for (const auto& [nm, agg] : up) {
      const auto& kids = kids_of[nm];
      int ncharged = 0;
      for (const auto& kd : kids)
        if (kd.mass > 0.0) ++ncharged;
      if (ncharged < 2) continue;
      MartingaleDifference2D d;
      d.cube = grid.cube(k, nm.first, nm.second);
      d.parent_mean = agg.gm / agg.mass;
      d.is_zero = false;
      double nsq = 0.0;
      for (int i = 0; i < 4; ++i) {
        if (kids[i].mass <= 0.0) continue;
        d.charged[i] = true;
        d.child_means[i] = kids[i].gm / kids[i].mass;
        nsq += sq(d.child_means[i] - d.parent_mean) * kids[i].mass;
      }
      ex.entries[key_of(d.cube)] = CubeEntry{d, nsq};
    }
    cur = std::move(up);
  }
  for (const auto& [nm, agg] : cur) {
    if (agg.mass <= 0.0) continue;
    ex.root_means[nm] = agg.gm / agg.mass;
    ex.root_mass[nm] = agg.mass;
  }
  return ex;
}

inline std::vector<double> synthesize_cubes(const Measure2D& tau, const CubeExpansion& ex) {
  std::vector<double> out(tau.size(), 0.0);
  const auto& p = ex.grid.params();
  for (size_t i = 0; i < tau.size(); ++i) {
    const auto& at = tau.atoms()[i];
    const Point2 x{at.x1, at.x2};
    const long nr = ex.grid.locate(p.k_max, at.x1);
    const long mr = static_cast<long>(std::floor(at.x2 / ex.grid.length(p.k_max)));
    auto itr = ex.root_means.find({nr, mr});
    double v = itr == ex.root_means.end() ? 0.0 : itr->second;
    for (int k = p.k_max; k > p.k_min; --k) {
      const long n = ex.grid.locate(k, at.x1);
      const long m = static_cast<long>(std::floor(at.x2 / ex.grid.length(k)));
      auto it = ex.entries.find({k, n, m});
      if (it == ex.entries.end()) continue;
      v += it->second.diff.value_at(ex.grid, x);
    }
    out[i] = v;
  }
  return out;
}

inline std::pair<CubeExpansion, CubeExpansion> split_good_bad(const CubeExpansion& ex) {
  CubeExpansion good{ex.grid, {}, ex.root_means, ex.root_mass};
  CubeExpansion bad{ex.grid, {}, {}, {}};
  for (const auto& [key, e] : ex.entries) {
    if (ex.grid.is_good(e.diff.cube))
      good.entries[key] = e;
    else
      bad.entries[key] = e;
  }
  return {std::move(good), std::move(bad)};
}

}  // namespace tw
