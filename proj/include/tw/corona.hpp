#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tw/constants.hpp"
#include "tw/grid.hpp"
#include "tw/haar.hpp"
#include "tw/kernels.hpp"
#include "tw/measure.hpp"

namespace tw {

enum class StopCause { root, large_average, energy };
enum class StopSide { g_side, f_side };

struct StopNode {
  DyadicInterval iv;
  int parent = -1;
  StopCause cause = StopCause::root;
  double stopping_average = 0.0;  // average of |g| over Q_F, or of |f| over F
  std::vector<int> children;
};

struct StoppingTree {
  StopSide side = StopSide::g_side;
  Grid grid;
  std::vector<StopNode> nodes;  // nodes[0] is the root
  double c0 = 64.0;
  double r_char = 0.0;

  const StopNode& root() const { return nodes.front(); }

  /// Index of the deepest node whose interval contains [a,b); the tree parent
  /// map pi_F in interval form.
  int locate_node(double a, double b) const {
    int cur = 0;
    bool moved = true;
    while (moved) {
      moved = false;
      for (int c : nodes[cur].children) {
        if (nodes[c].iv.a <= a + kBoundaryTol && b <= nodes[c].iv.b + kBoundaryTol) {
          cur = c;
          moved = true;
          break;
        }
      }
    }
    return cur;
  }

  /// pi-tilde: the smallest node F with J strongly contained at gap scale_gap.
  int locate_node_strong(const DyadicInterval& j, int scale_gap) const {
    int cur = locate_node(j.a, j.b);
    while (cur != -1) {
      if (nodes[cur].iv.k >= j.k + scale_gap) return cur;
      cur = nodes[cur].parent;
    }
    return 0;
  }
};

namespace corona_detail {

struct EnergyCache {
  std::map<std::pair<int, long>, double> line;   // E(sigma, K)
  std::map<std::pair<int, long>, double> plane;  // E(tau, K)
};

inline double cached_energy_line(const Measure1D& sigma, const Grid& grid,
                                 const DyadicInterval& K, EnergyCache& cache) {
  auto it = cache.line.find({K.k, K.n});
  if (it != cache.line.end()) return it->second;
  const double e = energy_line(sigma, grid, K);
  cache.line[{K.k, K.n}] = e;
  return e;
}

inline double cached_energy_plane(const Measure2D& tau, const DyadicInterval& K,
                                  EnergyCache& cache) {
  auto it = cache.plane.find({K.k, K.n});
  if (it != cache.plane.end()) return it->second;
  const double e = energy_plane(tau, K.a, K.b);
  cache.plane[{K.k, K.n}] = e;
  return e;
}

}  // namespace corona_detail

/// Energy-stopping functional of the g-side rule: the Whitney sum with holes
/// at the cubes, against tau(Q_I).
inline double energy_stopping_sum_g(const Measure1D& sigma, const Measure2D& tau,
                                    const Grid& grid, const DyadicInterval& F,
                                    const DyadicInterval& I,
                                    corona_detail::EnergyCache& cache) {
  const auto qf = Region::carleson_cube(F.a, F.b);
  double lhs = 0.0;
  for (const auto& K : whitney(grid, I).members) {
    const double sk = sigma.mass_in(K.a, K.b);
    if (sk == 0.0) continue;
    const auto hole =
        Region::intersect({qf, Region::complement(Region::carleson_cube(K.a, K.b))});
    const Point2 xq{K.center(), 0.5 * K.len()};
    const double tval = t_tau_on_region(tau, hole, xq);
    lhs += sq(tval) * corona_detail::cached_energy_line(sigma, grid, K, cache) * sk;
  }
  return lhs;
}

/// Dual-side energy functional: Poisson averages with holes against sigma(I).
inline double energy_stopping_sum_f(const Measure1D& sigma, const Measure2D& tau,
                                    const Grid& grid, const DyadicInterval& F,
                                    const DyadicInterval& I,
                                    corona_detail::EnergyCache& cache) {
  double lhs = 0.0;
  for (const auto& K : whitney(grid, I).members) {
    const double tk = tau.mass_in_box(K.a, K.b, 0.0, K.len());
    if (tk == 0.0) continue;
    double pval = 0.0;
    for (const auto& at : sigma.atoms()) {
      if (at.position < F.a || at.position >= F.b) continue;
      if (at.position >= K.a && at.position < K.b) continue;
      pval += at.mass * poisson_profile(dist_to_interval(at.position, K.a, K.b), K.len());
    }
    const double e = corona_detail::cached_energy_plane(tau, K, cache);
    lhs += sq(pval) * sq(e) * tk;
  }
  return lhs;
}

inline StoppingTree build_stopping_tree(StopSide side, const Measure1D& sigma,
                                        const Measure2D& tau, const std::vector<double>& func,
                                        const Grid& grid, const DyadicInterval& root, double c0,
                                        double r_char) {
  require(c0 > 0.0, "stopping constant must be positive");
  if (side == StopSide::g_side)
    require(func.size() == tau.size(), "g must assign a value to each tau atom");
  else
    require(func.size() == sigma.size(), "f must assign a value to each sigma atom");

  StoppingTree tree;
  tree.side = side;
  tree.grid = grid;
  tree.c0 = c0;
  tree.r_char = r_char;
  corona_detail::EnergyCache cache;

  auto avg_abs = [&](const DyadicInterval& iv) -> std::pair<double, double> {
    // returns (mass, integral of |func|) over Q_iv or iv
    double mass = 0.0, acc = 0.0;
    if (side == StopSide::g_side) {
      auto [lo, hi] = tau.range_in_x1(iv.a, iv.b);
      for (size_t j = lo; j < hi; ++j) {
        if (tau.atoms()[j].x2 >= iv.len()) continue;
        mass += tau.atoms()[j].mass;
        acc += std::abs(func[j]) * tau.atoms()[j].mass;
      }
    } else {
      auto [lo, hi] = sigma.range_in(iv.a, iv.b);
      for (size_t i = lo; i < hi; ++i) {
        mass += sigma.atoms()[i].mass;
        acc += std::abs(func[i]) * sigma.atoms()[i].mass;
      }
    }
    return {mass, acc};
  };

  auto push_node = [&](const DyadicInterval& iv, int parent, StopCause cause) {
    auto [mass, acc] = avg_abs(iv);
    StopNode node;
    node.iv = iv;
    node.parent = parent;
    node.cause = cause;
    node.stopping_average = mass > 0.0 ? acc / mass : 0.0;
    tree.nodes.push_back(node);
    if (parent >= 0) tree.nodes[parent].children.push_back(static_cast<int>(tree.nodes.size()) - 1);
    return static_cast<int>(tree.nodes.size()) - 1;
  };

  auto prune = [&](const DyadicInterval& iv) {
    return sigma.mass_in(iv.a, iv.b) == 0.0 &&
           tau.mass_in_box(iv.a, iv.b, 0.0, iv.len()) == 0.0;
  };

  const int root_id = push_node(root, -1, StopCause::root);

  // depth-first over stopping nodes; for each, scan descendants for maximal
  // intervals firing either rule
  std::vector<int> agenda{root_id};
  while (!agenda.empty()) {
    const int fid = agenda.back();
    agenda.pop_back();
    const DyadicInterval F = tree.nodes[fid].iv;
    const double f_avg = tree.nodes[fid].stopping_average;

    std::vector<DyadicInterval> scan;
    if (F.k > grid.params().k_min) {
      auto [l, r] = grid.children(F);
      scan.push_back(l);
      scan.push_back(r);
    }
    while (!scan.empty()) {
      const DyadicInterval I = scan.back();
      scan.pop_back();
      if (prune(I)) continue;

      StopCause cause = StopCause::root;
      auto [mass, acc] = avg_abs(I);
      if (mass > 0.0 && f_avg > 0.0 && acc / mass >= 10.0 * f_avg)
        cause = StopCause::large_average;
      if (cause == StopCause::root) {
        const double lhs = side == StopSide::g_side
                               ? energy_stopping_sum_g(sigma, tau, grid, F, I, cache)
                               : energy_stopping_sum_f(sigma, tau, grid, F, I, cache);
        if (lhs > 0.0 && lhs >= c0 * sq(r_char) * mass) cause = StopCause::energy;
      }

      if (cause != StopCause::root) {
        agenda.push_back(push_node(I, fid, cause));
      } else if (I.k > grid.params().k_min) {
        auto [l, r] = grid.children(I);
        scan.push_back(l);
        scan.push_back(r);
      }
    }
  }
  return tree;
}

/// Max over nodes of the children-to-parent Carleson mass ratio (0/0 -> 0).
inline double carleson_ratio(const StoppingTree& tree, const Measure2D& tau) {
  double worst = 0.0;
  for (const auto& node : tree.nodes) {
    const double parent_mass = tau.mass_in_box(node.iv.a, node.iv.b, 0.0, node.iv.len());
    double child_mass = 0.0;
    for (int c : node.children) {
      const auto& iv = tree.nodes[c].iv;
      child_mass += tau.mass_in_box(iv.a, iv.b, 0.0, iv.len());
    }
    if (parent_mass > 0.0)
      worst = std::max(worst, child_mass / parent_mass);
    else if (child_mass > 0.0)
      return std::numeric_limits<double>::infinity();
  }
  return worst;
}

/// Dual-side Carleson ratio over sigma masses of the intervals themselves.
inline double carleson_ratio(const StoppingTree& tree, const Measure1D& sigma) {
  double worst = 0.0;
  for (const auto& node : tree.nodes) {
    const double parent_mass = sigma.mass_in(node.iv.a, node.iv.b);
    double child_mass = 0.0;
    for (int c : node.children) child_mass += sigma.mass_in(tree.nodes[c].iv.a, tree.nodes[c].iv.b);
    if (parent_mass > 0.0)
      worst = std::max(worst, child_mass / parent_mass);
    else if (child_mass > 0.0)
      return std::numeric_limits<double>::infinity();
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Quasi-orthogonality
// ---------------------------------------------------------------------------
inline double quasi_orthogonality_ratio(const StoppingTree& tree, const Measure1D& sigma,
                                        const std::vector<double>& f, const Measure2D& tau,
                                        const std::vector<double>& g) {
  double f_norm_sq = 0.0, g_norm_sq = 0.0;
  for (size_t i = 0; i < sigma.size(); ++i) f_norm_sq += sq(f[i]) * sigma.atoms()[i].mass;
  for (size_t j = 0; j < tau.size(); ++j) g_norm_sq += sq(g[j]) * tau.atoms()[j].mass;
  if (f_norm_sq == 0.0 || g_norm_sq == 0.0) return 0.0;

  const Grid& grid = tree.grid;
  auto f_ex = analyze(sigma, f, grid);
  auto g_ex = analyze_cubes(tau, g, grid);
  const int gap = 4 * grid.params().r;

  // ||H-tilde^sigma_F f||^2 per node
  std::vector<double> f_proj(tree.nodes.size(), 0.0);
  for (const auto& [key, e] : f_ex.entries) {
    if (e.coeff == 0.0) continue;
    const int node = tree.locate_node_strong(e.iv, gap);
    f_proj[node] += sq(e.coeff);
  }
  // ||H^tau_F g||^2 per node, over Carleson-cube differences
  std::vector<double> g_proj(tree.nodes.size(), 0.0);
  for (const auto& [key, e] : g_ex.entries) {
    if (key.m != 0) continue;
    const int node = tree.locate_node(e.diff.cube.iv.a, e.diff.cube.iv.b);
    g_proj[node] += e.norm_sq;
  }

  double acc = 0.0;
  for (size_t idx = 0; idx < tree.nodes.size(); ++idx) {
    const auto& node = tree.nodes[idx];
    const double qmass = tau.mass_in_box(node.iv.a, node.iv.b, 0.0, node.iv.len());
    acc += (node.stopping_average * std::sqrt(qmass) + std::sqrt(g_proj[idx])) *
           std::sqrt(f_proj[idx]);
  }
  return acc / std::sqrt(f_norm_sq * g_norm_sq);
}

// ---------------------------------------------------------------------------
// Pair collections, lambda, sawtooth, size
// ---------------------------------------------------------------------------
struct IntervalPair {
  DyadicInterval p1;
  DyadicInterval p2;
};

struct PairCollection {
  std::vector<IntervalPair> pairs;
};

/// Child of p1 containing p2 (the tilde-P1 interval of a pair).
inline DyadicInterval tilde_p1(const Grid& grid, const IntervalPair& pr) {
  auto [l, r] = grid.children(pr.p1);
  return pr.p2.a >= r.a ? r : l;
}

inline std::vector<DyadicInterval> tilde_p1_set(const Grid& grid, const PairCollection& pc) {
  std::vector<DyadicInterval> out;
  for (const auto& pr : pc.pairs) {
    const auto t = tilde_p1(grid, pr);
    bool seen = false;
    for (const auto& iv : out)
      if (iv == t) seen = true;
    if (!seen) out.push_back(t);
  }
  return out;
}

/// Maximal grid intervals K with 10*K inside I, recursing to the window floor.
inline std::vector<DyadicInterval> k_family(const Grid& grid, const DyadicInterval& iv) {
  std::vector<DyadicInterval> out;
  const auto& p = grid.params();
  auto qualifies = [&](const DyadicInterval& K) {
    const double c = K.center(), h = 5.0 * K.len();
    return c - h >= iv.a - kBoundaryTol && c + h <= iv.b + kBoundaryTol;
  };
  const int k_top = iv.k - 4;  // 10|K| <= |I| requires at least 4 scale steps
  if (k_top < p.k_min) return out;
  const long n_lo = grid.locate(k_top, iv.a + 0.5 * grid.length(k_top));
  std::vector<DyadicInterval> stack;
  for (long i = (1L << (iv.k - k_top)) - 1; i >= 0; --i)
    stack.push_back(grid.interval(k_top, n_lo + i));
  while (!stack.empty()) {
    DyadicInterval K = stack.back();
    stack.pop_back();
    if (qualifies(K)) {
      out.push_back(K);
    } else if (K.k > p.k_min) {
      auto [l, r] = grid.children(K);
      stack.push_back(r);
      stack.push_back(l);
    }
  }
  return out;
}

struct AdmissibilityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Validates the three admissibility clauses against a list of energy
/// stopping intervals; throws naming the violated clause.
inline void validate_admissible(const PairCollection& pc, const Grid& grid,
                                const std::vector<DyadicInterval>& energy_stops) {
  const int gap = 4 * grid.params().r;
  for (const auto& pr : pc.pairs) {
    if (!(pr.p2.k + gap <= pr.p1.k && pr.p2.a >= pr.p1.a - kBoundaryTol &&
          pr.p2.b <= pr.p1.b + kBoundaryTol))
      throw AdmissibilityError("admissibility (1): pairs must be strongly nested");
    if (!grid.is_good(pr.p1) || !grid.is_good(pr.p2))
      throw AdmissibilityError("admissibility (1): both coordinates must be good");
  }
  for (const auto& fstop : energy_stops) {
    for (const auto& pr : pc.pairs) {
      const auto tp = tilde_p1(grid, pr);
      if (tp.a >= fstop.a - kBoundaryTol && tp.b <= fstop.b + kBoundaryTol)
        throw AdmissibilityError(
            "admissibility (2): tilde-P1 interval inside an energy stopping interval");
      if (pr.p2.k + grid.params().r <= fstop.k && pr.p2.a >= fstop.a - kBoundaryTol &&
          pr.p2.b <= fstop.b + kBoundaryTol)
        throw AdmissibilityError(
            "admissibility (2): P2 strongly inside an energy stopping interval");
    }
  }
  // convexity in P1 for fixed P2
  for (const auto& pr : pc.pairs) {
    for (const auto& other : pc.pairs) {
      if (!(other.p2 == pr.p2) || other.p1.k <= pr.p1.k) continue;
      // ancestors of pr.p1 at the lacunary scales strictly between
      DyadicInterval walk = pr.p1;
      while (walk.k + gap <= other.p1.k) {
        for (int s = 0; s < gap; ++s) walk = grid.parent(walk);
        if (walk.k >= other.p1.k) break;
        if (!grid.is_good(walk)) continue;
        bool found = false;
        for (const auto& mid : pc.pairs)
          if (mid.p2 == pr.p2 && mid.p1 == walk) found = true;
        if (!found)
          throw AdmissibilityError("admissibility (3): convexity gap in the P1 slice");
      }
    }
  }
}

struct SizeReport {
  Measure2D lambda;                 // the point-mass measure of the pairs
  std::vector<DyadicInterval> t_family;  // the K-family union
  double size = 0.0;
  std::optional<DyadicInterval> witness;
  double lambda_total = 0.0;
};

inline double lambda_weight(const Measure1D& sigma, const Grid& grid, const DyadicInterval& p2) {
  const auto h = haar_function(sigma, grid, p2);
  if (h.is_zero) return 0.0;
  double coeff = 0.0;
  auto [lo, hi] = sigma.range_in(p2.a, p2.b);
  for (size_t i = lo; i < hi; ++i)
    coeff += sigma.atoms()[i].position * h(sigma.atoms()[i].position) * sigma.atoms()[i].mass;
  return sq(coeff);
}

inline Measure2D lambda_measure(const Measure1D& sigma, const Grid& grid,
                                const PairCollection& pc) {
  std::vector<Atom2D> atoms;
  std::vector<std::pair<int, long>> seen;
  for (const auto& pr : pc.pairs) {
    const std::pair<int, long> key{pr.p2.k, pr.p2.n};
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    const double w = lambda_weight(sigma, grid, pr.p2);
    if (w > 0.0) atoms.push_back({pr.p2.center(), 0.5 * pr.p2.len(), w});
  }
  return Measure2D(Domain2D::half_plane, std::move(atoms));
}

/// lambda(Saw_P I): mass at centers of cubes over P2 intervals strongly inside I.
inline double sawtooth_mass(const Measure1D& sigma, const Grid& grid, const PairCollection& pc,
                            const DyadicInterval& iv) {
  double acc = 0.0;
  std::vector<std::pair<int, long>> seen;
  for (const auto& pr : pc.pairs) {
    if (!(pr.p2.k + grid.params().r <= iv.k && pr.p2.a >= iv.a - kBoundaryTol &&
          pr.p2.b <= iv.b + kBoundaryTol))
      continue;
    const std::pair<int, long> key{pr.p2.k, pr.p2.n};
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    acc += lambda_weight(sigma, grid, pr.p2);
  }
  return acc;
}

inline SizeReport size_functional(const PairCollection& pc, const Measure1D& sigma,
                                  const Measure2D& tau, const Grid& grid,
                                  const DyadicInterval& F,
                                  const std::vector<DyadicInterval>& energy_stops = {}) {
  validate_admissible(pc, grid, energy_stops);
  SizeReport rep;
  rep.lambda = lambda_measure(sigma, grid, pc);
  rep.lambda_total = rep.lambda.total_mass();
  const auto qf = Region::carleson_cube(F.a, F.b);
  for (const auto& tp : tilde_p1_set(grid, pc)) {
    for (const auto& K : k_family(grid, tp)) {
      rep.t_family.push_back(K);
      const double tq = tau.mass_in_box(K.a, K.b, 0.0, K.len());
      if (tq <= 0.0) continue;
      const double saw = sawtooth_mass(sigma, grid, pc, K);
      if (saw == 0.0) continue;
      const auto hole =
          Region::intersect({qf, Region::complement(Region::carleson_cube(K.a, K.b))});
      const double tval = t_tau_on_region(tau, hole, {K.center(), 0.5 * K.len()});
      const double s_sq = sq(tval) * saw / (tq * sq(K.len()));
      if (s_sq > sq(rep.size)) {
        rep.size = std::sqrt(s_sq);
        rep.witness = K;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// The layered L-collection selection
// ---------------------------------------------------------------------------
struct LSelection {
  std::vector<std::vector<DyadicInterval>> layers;
  bool l0_empty = false;
};

inline LSelection select_l_collection(const PairCollection& pc, const Measure1D& sigma,
                                      const Measure2D& tau, const Grid& grid,
                                      const DyadicInterval& F, double c,
                                      const std::vector<DyadicInterval>& energy_stops = {}) {
  require(c > 0.0 && c < 1.0, "c must lie in (0,1)");
  LSelection sel;
  const auto size_rep = size_functional(pc, sigma, tau, grid, F, energy_stops);
  const double s_sq = sq(size_rep.size);
  const auto qf = Region::carleson_cube(F.a, F.b);

  // layer 0: minimal tilde-P1 intervals passing the threshold, ties included
  std::vector<DyadicInterval> eligible;
  for (const auto& tp : tilde_p1_set(grid, pc)) {
    const double saw = sawtooth_mass(sigma, grid, pc, tp);
    const auto hole =
        Region::intersect({qf, Region::complement(Region::carleson_cube(tp.a, tp.b))});
    const double tval = t_tau_on_region(tau, hole, {tp.center(), 0.5 * tp.len()});
    const double lhs = sq(tval) * saw / sq(tp.len());
    const double rhs = sq(c) * s_sq * tau.mass_in_box(tp.a, tp.b, 0.0, tp.len());
    if (lhs >= rhs) eligible.push_back(tp);
  }
  std::vector<DyadicInterval> l0;
  for (const auto& cand : eligible) {
    bool minimal = true;
    for (const auto& other : eligible)
      if (!(other == cand) && other.a >= cand.a - kBoundaryTol &&
          other.b <= cand.b + kBoundaryTol && other.k < cand.k)
        minimal = false;
    if (minimal) l0.push_back(cand);
  }
  sel.l0_empty = l0.empty();
  if (l0.empty()) return sel;
  sel.layers.push_back(std::move(l0));

  // inductive layers: minimal dyadic intervals with the accretion property
  while (true) {
    const auto& prev = sel.layers.back();
    std::vector<DyadicInterval> candidates;
    for (const auto& L : prev) {
      DyadicInterval walk = L;
      while (walk.k < grid.params().k_max) {
        walk = grid.parent(walk);
        bool seen = false;
        for (const auto& c2 : candidates)
          if (c2 == walk) seen = true;
        if (!seen) candidates.push_back(walk);
      }
    }
    std::vector<DyadicInterval> passing;
    for (const auto& L : candidates) {
      double prev_sum = 0.0;
      for (const auto& Lp : prev)
        if (Lp.a >= L.a - kBoundaryTol && Lp.b <= L.b + kBoundaryTol &&
            !(Lp == L))
          prev_sum += sawtooth_mass(sigma, grid, pc, Lp);
      if (prev_sum == 0.0) continue;
      if (sawtooth_mass(sigma, grid, pc, L) >= (1.0 + sq(c)) * prev_sum) passing.push_back(L);
    }
    std::vector<DyadicInterval> layer;
    for (const auto& cand : passing) {
      bool minimal = true;
      for (const auto& other : passing)
        if (!(other == cand) && other.a >= cand.a - kBoundaryTol &&
            other.b <= cand.b + kBoundaryTol && other.k < cand.k)
          minimal = false;
      if (minimal) layer.push_back(cand);
    }
    if (layer.empty()) break;
    sel.layers.push_back(std::move(layer));
  }
  return sel;
}

// ---------------------------------------------------------------------------
// Triangular forms
// ---------------------------------------------------------------------------
struct TriangularReport {
  Complex above{0.0, 0.0};
  Complex below{0.0, 0.0};
  Complex full{0.0, 0.0};
  Complex residual{0.0, 0.0};
  double carleson_residual_ratio = 0.0;  // ||R*_tau (g - P_Car g)||_sigma / ||g||_tau
  double f_norm = 0.0;
  double g_norm = 0.0;
};

namespace corona_detail {

inline void check_lacunary(const std::vector<int>& scales, int gap, const char* who) {
  if (scales.empty()) return;
  for (int k : scales)
    if (((k - scales.front()) % gap + gap) % gap != 0)
      throw std::invalid_argument(std::string(who) +
                                  " violates the lacunary scale restriction");
}

}  // namespace corona_detail

inline TriangularReport triangular_forms(const Measure1D& sigma, const std::vector<double>& f,
                                         const Measure2D& tau, const std::vector<double>& g,
                                         const Grid& grid) {
  TriangularReport rep;
  const int gap = 4 * grid.params().r;
  auto f_ex = analyze(sigma, f, grid);
  auto g_ex = analyze_cubes(tau, g, grid);

  std::vector<int> f_scales, g_scales;
  for (const auto& [key, e] : f_ex.entries)
    if (std::abs(e.coeff) > 1e-14) f_scales.push_back(key.first);
  for (const auto& [key, e] : g_ex.entries)
    if (e.norm_sq > 1e-28 && key.m == 0) g_scales.push_back(key.k);
  corona_detail::check_lacunary(f_scales, gap, "f Haar support");
  corona_detail::check_lacunary(g_scales, gap, "g Haar support");

  for (size_t i = 0; i < sigma.size(); ++i) rep.f_norm += sq(f[i]) * sigma.atoms()[i].mass;
  for (size_t j = 0; j < tau.size(); ++j) rep.g_norm += sq(g[j]) * tau.atoms()[j].mass;
  rep.f_norm = std::sqrt(rep.f_norm);
  rep.g_norm = std::sqrt(rep.g_norm);

  rep.full = bilinear_form(sigma, f, tau, g);

  // B_above: J strongly below I, argument the child cube of Q_I over I_J
  for (const auto& [gkey, ge] : g_ex.entries) {
    if (gkey.m != 0 || ge.diff.is_zero) continue;
    const DyadicInterval I = ge.diff.cube.iv;
    auto [il, ir] = grid.children(I);
    for (const auto& [fkey, fe] : f_ex.entries) {
      if (fe.coeff == 0.0) continue;
      const DyadicInterval J = fe.iv;
      if (!(J.k + gap <= I.k && J.a >= I.a - kBoundaryTol && J.b <= I.b + kBoundaryTol))
        continue;
      const DyadicInterval child = J.a >= ir.a ? ir : il;
      const double e_val = ge.diff.value_at(grid, {child.center(), 0.25 * child.len()});
      if (e_val == 0.0) continue;
      // <R*_tau Q_{IJ}, Delta_J f>_sigma
      Complex pairing{0.0, 0.0};
      auto [slo, shi] = sigma.range_in(J.a, J.b);
      auto [tlo, thi] = tau.range_in_x1(child.a, child.b);
      for (size_t i = slo; i < shi; ++i) {
        const auto& t = sigma.atoms()[i];
        const double df = fe.coeff * (t.position < fe.split ? fe.value_minus : fe.value_plus);
        if (df == 0.0) continue;
        for (size_t j = tlo; j < thi; ++j) {
          const auto& x = tau.atoms()[j];
          if (x.x2 >= 0.5 * I.len()) continue;  // child cube height
          pairing += riesz_kernel({x.x1, x.x2}, t.position) * (df * t.mass * x.mass);
        }
      }
      rep.above += e_val * pairing;
    }
  }

  // B_below: Carleson cube index strongly below the f interval
  for (const auto& [fkey, fe] : f_ex.entries) {
    if (fe.coeff == 0.0) continue;
    const DyadicInterval J = fe.iv;
    auto [jl, jr] = grid.children(J);
    for (const auto& [gkey, ge] : g_ex.entries) {
      if (gkey.m != 0 || ge.diff.is_zero) continue;
      const DyadicInterval I = ge.diff.cube.iv;
      if (!(I.k + gap <= J.k && I.a >= J.a - kBoundaryTol && I.b <= J.b + kBoundaryTol))
        continue;
      const DyadicInterval child = I.a >= jr.a ? jr : jl;
      const double e_val =
          fe.coeff * (child.center() < fe.split ? fe.value_minus : fe.value_plus);
      if (e_val == 0.0) continue;
      // <Delta_{Q_I} g, R_sigma 1_{child}>_tau over the cube Q_I
      Complex pairing{0.0, 0.0};
      auto [tlo, thi] = tau.range_in_x1(I.a, I.b);
      auto [slo, shi] = sigma.range_in(child.a, child.b);
      for (size_t j = tlo; j < thi; ++j) {
        const auto& x = tau.atoms()[j];
        if (x.x2 >= I.len()) continue;
        const double dg = ge.diff.value_at(grid, {x.x1, x.x2});
        if (dg == 0.0) continue;
        for (size_t i = slo; i < shi; ++i) {
          const auto& t = sigma.atoms()[i];
          pairing += riesz_kernel({x.x1, x.x2}, t.position) * (dg * x.mass * t.mass);
        }
      }
      rep.below += e_val * pairing;
    }
  }

  rep.residual = rep.full - rep.above - rep.below;

  // Carleson-cube projection defect of g
  std::vector<double> g_proj(g.size(), 0.0);
  {
    // synthesize the Carleson part: root means plus m = 0 differences
    CubeExpansion car{grid, {}, g_ex.root_means, g_ex.root_mass};
    for (const auto& [key, e] : g_ex.entries)
      if (key.m == 0) car.entries[key] = e;
    g_proj = synthesize_cubes(tau, car);
  }
  std::vector<double> defect(g.size());
  for (size_t j = 0; j < g.size(); ++j) defect[j] = g[j] - g_proj[j];
  double defect_norm_sq = 0.0;
  std::vector<double> line_points;
  for (const auto& at : sigma.atoms()) line_points.push_back(at.position);
  auto dual_vals = apply_riesz_dual(tau, defect, line_points);
  for (size_t i = 0; i < sigma.size(); ++i)
    defect_norm_sq += std::norm(dual_vals[i]) * sigma.atoms()[i].mass;
  if (rep.g_norm > 0.0) rep.carleson_residual_ratio = std::sqrt(defect_norm_sq) / rep.g_norm;
  return rep;
}

// ---------------------------------------------------------------------------
// The stopping-derived measure and its strip bound
// ---------------------------------------------------------------------------
inline Measure2D mu_measure(const StoppingTree& tree, const Measure1D& sigma) {
  const Grid& grid = tree.grid;
  const int gap = 4 * grid.params().r;
  std::vector<Atom2D> atoms;
  for (const auto& node : tree.nodes) {
    const auto wf = whitney(grid, node.iv);
    for (const auto& K : wf.members) {
      double weight = 0.0;
      // all Haar-bearing J inside K whose strong stopping parent is this node
      std::vector<DyadicInterval> stack{K};
      while (!stack.empty()) {
        DyadicInterval J = stack.back();
        stack.pop_back();
        auto [lo, hi] = sigma.range_in(J.a, J.b);
        if (hi - lo < 2) continue;
        if (J.k > grid.params().k_min) {
          auto [l, r] = grid.children(J);
          stack.push_back(l);
          stack.push_back(r);
        }
        const int owner = tree.locate_node_strong(J, gap);
        if (&tree.nodes[owner] != &node) continue;
        weight += lambda_weight(sigma, grid, J);
      }
      if (weight > 0.0) atoms.push_back({K.center(), 0.5 * K.len(), weight});
    }
  }
  return Measure2D(Domain2D::half_plane, std::move(atoms));
}

struct StripCheck {
  bool ok = true;
  double worst_ratio = 0.0;  // max of mu(W^k_K) / (|K|^2 sigma(K))
};

/// mu(W^k_K) <= |K|^2 sigma(K) over every Whitney interval of the tree and
/// every strip index with mass.
inline StripCheck strip_bound_check(const StoppingTree& tree, const Measure1D& sigma,
                                    const Measure2D& mu) {
  StripCheck out;
  const Grid& grid = tree.grid;
  for (const auto& node : tree.nodes) {
    for (const auto& K : whitney(grid, node.iv).members) {
      const double cap = sq(K.len()) * sigma.mass_in(K.a, K.b);
      const int depth = K.k - grid.params().k_min + 1;
      for (int k = 0; k <= depth; ++k) {
        const double hi = std::ldexp(K.len(), -k);
        const double strip_mass = mu.mass_in_box(K.a, K.b, 0.5 * hi, hi);
        if (strip_mass == 0.0) continue;
        if (cap > 0.0)
          out.worst_ratio = std::max(out.worst_ratio, strip_mass / cap);
        if (strip_mass > cap * (1.0 + 1e-12)) out.ok = false;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------
inline nlohmann::json to_json(const StoppingTree& tree) {
  std::function<nlohmann::json(int)> dump = [&](int idx) {
    const auto& n = tree.nodes[idx];
    nlohmann::json j{{"k", n.iv.k},
                     {"n", n.iv.n},
                     {"a", n.iv.a},
                     {"b", n.iv.b},
                     {"cause", n.cause == StopCause::root          ? "root"
                               : n.cause == StopCause::large_average ? "large-average"
                                                                     : "energy"},
                     {"average", n.stopping_average}};
    nlohmann::json kids = nlohmann::json::array();
    for (int c : n.children) kids.push_back(dump(c));
    j["children"] = kids;
    return j;
  };
  return {{"side", tree.side == StopSide::g_side ? "g" : "f"},
          {"c0", tree.c0},
          {"r_char", tree.r_char},
          {"root", dump(0)}};
}

inline nlohmann::json to_json(const PairCollection& pc) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& pr : pc.pairs)
    arr.push_back({{"p1", {pr.p1.k, pr.p1.n}}, {"p2", {pr.p2.k, pr.p2.n}}});
  return {{"pairs", arr}};
}

inline PairCollection pair_collection_from_json(const Grid& grid, const nlohmann::json& j) {
  PairCollection pc;
  for (const auto& it : j.at("pairs")) {
    const auto p1 = it.at("p1");
    const auto p2 = it.at("p2");
    pc.pairs.push_back({grid.interval(p1.at(0).get<int>(), p1.at(1).get<long>()),
                        grid.interval(p2.at(0).get<int>(), p2.at(1).get<long>())});
  }
  return pc;
}

}  // namespace tw
