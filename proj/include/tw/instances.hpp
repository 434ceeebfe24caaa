#pragma once

#include <string>
#include <vector>

#include "tw/grid.hpp"
#include "tw/measure.hpp"

namespace tw {

enum class InstanceFamily { well_separated, nested, boundary_accumulating, lebesgue };

inline const char* family_name(InstanceFamily f) {
  switch (f) {
    case InstanceFamily::well_separated: return "well-separated";
    case InstanceFamily::nested: return "nested";
    case InstanceFamily::boundary_accumulating: return "boundary-accumulating";
    case InstanceFamily::lebesgue: return "lebesgue";
  }
  return "?";
}

struct Instance {
  InstanceFamily family = InstanceFamily::nested;
  std::uint64_t seed = 0;
  Measure1D sigma;
  Measure2D tau;
};

namespace detail {

/// Positions in distinct cells of width 2^(k_min+2), jittered into the middle
/// so that any window-scale interval of any admissible grid separates them.
inline std::vector<double> separated_positions(Rng& rng, int count, const GridParams& p,
                                               double lo, double hi) {
  const double cell = std::ldexp(1.0, p.k_min + 2);
  const long n_cells = std::max<long>(1, static_cast<long>((hi - lo) / cell));
  require(count <= n_cells, "too many atoms for the requested support");
  std::vector<long> used;
  std::vector<double> out;
  while (static_cast<int>(out.size()) < count) {
    const long c = rng.uniform_int(0, static_cast<int>(n_cells - 1));
    if (std::find(used.begin(), used.end(), c) != used.end()) continue;
    used.push_back(c);
    out.push_back(lo + (static_cast<double>(c) + rng.uniform(0.3, 0.7)) * cell);
  }
  return out;
}

}  // namespace detail

/// Deterministic instance families at desk scale. Supports sit inside [0,1)
/// horizontally (tau shifted right for the separated family), heights stay
/// off the horizontal grid lines, and atom cells are chosen so that window
/// grids resolve every atom.
inline Instance make_instance(InstanceFamily family, int n_sigma, int n_tau,
                              const GridParams& params, std::uint64_t seed) {
  Rng rng(seed ^ 0xabcd1234u);
  Instance inst;
  inst.family = family;
  inst.seed = seed;
  const double cell = std::ldexp(1.0, params.k_min + 2);

  std::vector<Atom1D> satoms;
  std::vector<Atom2D> tatoms;
  switch (family) {
    case InstanceFamily::well_separated: {
      for (double t : detail::separated_positions(rng, n_sigma, params, 0.0, 1.0))
        satoms.push_back({t, rng.uniform(0.2, 1.0)});
      auto xs = detail::separated_positions(rng, n_tau, params, 2.0, 3.0);
      for (double x : xs) {
        const long jy = rng.uniform_int(0, static_cast<int>(0.5 / cell));
        tatoms.push_back({x, (static_cast<double>(jy) + rng.uniform(0.3, 0.7)) * cell,
                          rng.uniform(0.2, 1.0)});
      }
      break;
    }
    case InstanceFamily::nested: {
      for (double t : detail::separated_positions(rng, n_sigma, params, 0.0, 1.0))
        satoms.push_back({t, rng.uniform(0.2, 1.0)});
      auto xs = detail::separated_positions(rng, n_tau, params, 0.0, 1.0);
      for (double x : xs) {
        const long jy = rng.uniform_int(0, static_cast<int>(0.9 / cell));
        tatoms.push_back({x, (static_cast<double>(jy) + rng.uniform(0.3, 0.7)) * cell,
                          rng.uniform(0.2, 1.0)});
      }
      break;
    }
    case InstanceFamily::boundary_accumulating: {
      auto ts = detail::separated_positions(rng, n_sigma, params, 0.0, 1.0);
      for (double t : ts) satoms.push_back({t, rng.uniform(0.2, 1.0)});
      // tau accumulates vertically above a sigma-charged location
      const double anchor = ts.front();
      for (int j = 0; j < n_tau; ++j) {
        const double h = std::ldexp(rng.uniform(0.55, 0.95), -(j % 12) - 1);
        const double x = anchor + (rng.bit() ? 1.0 : -1.0) * rng.uniform(0.1, 0.9) * h;
        tatoms.push_back({x, h, rng.uniform(0.2, 1.0) / (1 + j)});
      }
      break;
    }
    case InstanceFamily::lebesgue: {
      for (int j = 0; j < n_sigma; ++j)
        satoms.push_back({(j + rng.uniform(0.3, 0.7)) / n_sigma, 1.0 / n_sigma});
      const int g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_tau))));
      for (int jx = 0; jx < g; ++jx)
        for (int jy = 0; jy < g; ++jy)
          tatoms.push_back({(jx + rng.uniform(0.3, 0.7)) / g, (jy + rng.uniform(0.3, 0.7)) / g,
                            1.0 / (g * g)});
      break;
    }
  }
  inst.sigma = Measure1D(Domain1D::line, std::move(satoms));
  inst.tau = Measure2D(Domain2D::half_plane, std::move(tatoms));
  return inst;
}

/// Refinement used by the stability criterion: every atom splits into two
/// half-mass atoms a quarter of the finest window scale apart.
inline Measure1D refine(const Measure1D& m, const GridParams& params) {
  const double d = std::ldexp(1.0, params.k_min - 3);
  std::vector<Atom1D> out;
  for (const auto& a : m.atoms()) {
    out.push_back({a.position - d, 0.5 * a.mass});
    out.push_back({a.position + d, 0.5 * a.mass});
  }
  return Measure1D(m.domain(), std::move(out));
}

inline Measure2D refine(const Measure2D& m, const GridParams& params) {
  const double d = std::ldexp(1.0, params.k_min - 3);
  std::vector<Atom2D> out;
  for (const auto& a : m.atoms()) {
    out.push_back({a.x1 - d, a.x2, 0.5 * a.mass});
    out.push_back({a.x1 + d, a.x2, 0.5 * a.mass});
  }
  return Measure2D(m.domain(), std::move(out));
}

}  // namespace tw
