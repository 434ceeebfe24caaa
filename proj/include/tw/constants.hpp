#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tw/grid.hpp"
#include "tw/haar.hpp"
#include "tw/kernels.hpp"
#include "tw/measure.hpp"

namespace tw {

// ---------------------------------------------------------------------------
// Interval families for the suprema: dyadic intervals of the standard grid
// plus N_shift independently sampled grids, restricted to those meeting the
// support of either weight.
// ---------------------------------------------------------------------------
struct FamilyInterval {
  int grid_id = 0;  // 0 = standard grid
  DyadicInterval iv;
};

inline std::vector<FamilyInterval> interval_family(const Measure1D& sigma, const Measure2D& tau,
                                                   const GridParams& params, int n_shift,
                                                   std::uint64_t seed) {
  std::vector<FamilyInterval> fam;
  Rng rng(seed);
  for (int gid = 0; gid <= n_shift; ++gid) {
    Grid g = gid == 0 ? standard_grid(params) : sample_grid(rng.next_u64(), params);
    std::vector<std::pair<int, long>> keys;
    for (int k = params.k_min; k <= params.k_max; ++k) {
      for (const auto& a : sigma.atoms()) keys.emplace_back(k, g.locate(k, a.position));
      for (const auto& a : tau.atoms())
        if (a.x2 < g.length(k)) keys.emplace_back(k, g.locate(k, a.x1));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (const auto& [k, n] : keys) fam.push_back({gid, g.interval(k, n)});
  }
  return fam;
}

// ---------------------------------------------------------------------------
// A2 products and testing ratios for one interval
// ---------------------------------------------------------------------------
inline double a2_product_line(const Measure1D& sigma, const Measure2D& tau, double a, double b) {
  const double len = b - a;
  const double tq = tau.mass_in_box(a, b, 0.0, len);
  if (tq == 0.0) return 0.0;
  double integral = 0.0;
  for (const auto& at : sigma.atoms()) {
    if (at.position >= a && at.position < b) continue;
    integral += at.mass * poisson_profile(dist_to_interval(at.position, a, b), len);
  }
  return tq / len * integral;
}

inline double a2_product_plane(const Measure1D& sigma, const Measure2D& tau, double a, double b) {
  const double len = b - a;
  const double si = sigma.mass_in(a, b);
  if (si == 0.0) return 0.0;
  double integral = 0.0;
  for (const auto& at : tau.atoms()) {
    if (at.x1 >= a && at.x1 < b && at.x2 >= 0.0 && at.x2 < len) continue;
    integral += at.mass * poisson_profile(dist_to_box({at.x1, at.x2}, a, b, 0.0, len), len);
  }
  return si / len * integral;
}

/// sigma(I)^{-1} int_{Q_I} |R_sigma 1_I|^2 dtau
inline double forward_testing_sq(const Measure1D& sigma, const Measure2D& tau, double a,
                                 double b) {
  const double si = sigma.mass_in(a, b);
  if (si == 0.0) return 0.0;
  const double len = b - a;
  auto [slo, shi] = sigma.range_in(a, b);
  auto [tlo, thi] = tau.range_in_x1(a, b);
  double integral = 0.0;
  for (size_t j = tlo; j < thi; ++j) {
    const auto& x = tau.atoms()[j];
    if (x.x2 >= len || x.mass == 0.0) continue;
    Complex v{0.0, 0.0};
    for (size_t i = slo; i < shi; ++i) {
      const auto& t = sigma.atoms()[i];
      if (t.mass == 0.0) continue;
      if (sq(x.x1 - t.position) + x.x2 * x.x2 <= 0.0)
        throw std::domain_error("coincident singular atom pair in forward testing");
      v += riesz_kernel({x.x1, x.x2}, t.position) * t.mass;
    }
    integral += std::norm(v) * x.mass;
  }
  return integral / si;
}

/// tau(Q_I)^{-1} int_I |R*_tau 1_{Q_I}|^2 dsigma
inline double backward_testing_sq(const Measure1D& sigma, const Measure2D& tau, double a,
                                  double b) {
  const double len = b - a;
  const double tq = tau.mass_in_box(a, b, 0.0, len);
  if (tq == 0.0) return 0.0;
  auto [slo, shi] = sigma.range_in(a, b);
  auto [tlo, thi] = tau.range_in_x1(a, b);
  double integral = 0.0;
  for (size_t i = slo; i < shi; ++i) {
    const auto& t = sigma.atoms()[i];
    if (t.mass == 0.0) continue;
    Complex v{0.0, 0.0};
    for (size_t j = tlo; j < thi; ++j) {
      const auto& x = tau.atoms()[j];
      if (x.x2 >= len || x.mass == 0.0) continue;
      if (sq(x.x1 - t.position) + x.x2 * x.x2 <= 0.0)
        throw std::domain_error("coincident singular atom pair in backward testing");
      v += riesz_kernel({x.x1, x.x2}, t.position) * x.mass;
    }
    integral += std::norm(v) * t.mass;
  }
  return integral / tq;
}

struct Witness {
  int grid_id = -1;
  DyadicInterval iv;
  double value = 0.0;
};

struct ConstantsReport {
  double a2 = 0.0;
  double t_forward = 0.0;
  double t_backward = 0.0;
  double n_direct = 0.0;
  double r_char = 0.0;
  Witness a2_witness, tf_witness, tb_witness;
  // maxima over the standard grid plus the first half of the shifted grids;
  // reports the sensitivity of the suprema to N_shift
  double a2_half_family = 0.0;
  double testing_half_family = 0.0;
  size_t family_size = 0;

  double testing() const { return std::max(t_forward, t_backward); }
};

struct ConstantsOptions {
  GridParams params;
  int n_shift = 8;
  std::uint64_t seed = 1;
  double tol = 1e-10;
};

struct IntervalStat {
  FamilyInterval where;
  double sigma_mass = 0.0, tau_mass = 0.0;
  double a2_line = 0.0, a2_plane = 0.0, tf_sq = 0.0, tb_sq = 0.0;
};

inline std::vector<IntervalStat> per_interval_stats(const Measure1D& sigma, const Measure2D& tau,
                                                    const std::vector<FamilyInterval>& fam) {
  std::vector<IntervalStat> out;
  out.reserve(fam.size());
  for (const auto& fi : fam) {
    IntervalStat s;
    s.where = fi;
    const double a = fi.iv.a, b = fi.iv.b;
    s.sigma_mass = sigma.mass_in(a, b);
    s.tau_mass = tau.mass_in_box(a, b, 0.0, b - a);
    s.a2_line = a2_product_line(sigma, tau, a, b);
    s.a2_plane = a2_product_plane(sigma, tau, a, b);
    s.tf_sq = forward_testing_sq(sigma, tau, a, b);
    s.tb_sq = backward_testing_sq(sigma, tau, a, b);
    out.push_back(s);
  }
  return out;
}

inline ConstantsReport compute_constants(const Measure1D& sigma, const Measure2D& tau,
                                         const ConstantsOptions& opts) {
  auto fam = interval_family(sigma, tau, opts.params, opts.n_shift, opts.seed);
  require(!fam.empty() || (sigma.size() == 0 && tau.size() == 0), "empty interval family");
  ConstantsReport rep;
  rep.family_size = fam.size();
  const int half = opts.n_shift / 2;
  for (const auto& fi : fam) {
    const double a = fi.iv.a, b = fi.iv.b;
    const double p = std::max(a2_product_line(sigma, tau, a, b),
                              a2_product_plane(sigma, tau, a, b));
    if (p > rep.a2) {
      rep.a2 = p;
      rep.a2_witness = {fi.grid_id, fi.iv, p};
    }
    const double tf = forward_testing_sq(sigma, tau, a, b);
    if (tf > sq(rep.t_forward)) {
      rep.t_forward = std::sqrt(tf);
      rep.tf_witness = {fi.grid_id, fi.iv, rep.t_forward};
    }
    const double tb = backward_testing_sq(sigma, tau, a, b);
    if (tb > sq(rep.t_backward)) {
      rep.t_backward = std::sqrt(tb);
      rep.tb_witness = {fi.grid_id, fi.iv, rep.t_backward};
    }
    if (fi.grid_id <= half) {
      rep.a2_half_family = std::max(rep.a2_half_family, p);
      rep.testing_half_family =
          std::max(rep.testing_half_family, std::sqrt(std::max(tf, tb)));
    }
  }
  rep.n_direct = operator_norm(sigma, tau, opts.tol).norm;
  rep.r_char = std::sqrt(rep.a2) + rep.testing();
  return rep;
}

inline nlohmann::json to_json(const ConstantsReport& r) {
  auto wit = [](const Witness& w) {
    return nlohmann::json{{"grid", w.grid_id}, {"k", w.iv.k}, {"n", w.iv.n},
                          {"a", w.iv.a},       {"b", w.iv.b}, {"value", w.value}};
  };
  return {{"a2", r.a2},
          {"t_forward", r.t_forward},
          {"t_backward", r.t_backward},
          {"n_direct", r.n_direct},
          {"r_char", r.r_char},
          {"a2_witness", wit(r.a2_witness)},
          {"t_forward_witness", wit(r.tf_witness)},
          {"t_backward_witness", wit(r.tb_witness)},
          {"a2_half_family", r.a2_half_family},
          {"testing_half_family", r.testing_half_family},
          {"family_size", r.family_size}};
}

// ---------------------------------------------------------------------------
// Energies
// ---------------------------------------------------------------------------

/// E(sigma, I)^2 = sigma(I)^{-1} sum over good J inside I of <t/|I|, h_J>^2.
/// J runs over the Haar-bearing window scales of the grid that produced I,
/// including I itself.
inline double energy_line(const Measure1D& sigma, const Grid& grid, const DyadicInterval& iv) {
  const double si = sigma.mass_in(iv.a, iv.b);
  if (si == 0.0) return 0.0;
  double acc = 0.0;
  std::vector<DyadicInterval> stack{iv};
  while (!stack.empty()) {
    DyadicInterval J = stack.back();
    stack.pop_back();
    auto [lo, hi] = sigma.range_in(J.a, J.b);
    if (hi - lo < 2) continue;  // zero Haar function below
    if (J.k > grid.params().k_min) {
      auto [l, r] = grid.children(J);
      stack.push_back(l);
      stack.push_back(r);
      if (grid.is_good(J)) {
        const auto h = haar_function(sigma, grid, J);
        if (!h.is_zero) {
          double coeff = 0.0;
          for (size_t i = lo; i < hi; ++i)
            coeff += sigma.atoms()[i].position * h(sigma.atoms()[i].position) *
                     sigma.atoms()[i].mass;
          acc += sq(coeff / iv.len());
        }
      }
    }
  }
  return std::sqrt(acc / si);
}

/// E(tau, I)^2 = tau(Q_I)^{-1} || x / |I| ||^2 over Q_I less the mean, with x
/// the full 2-vector; cross-checked against the doubled-integral identity.
inline double energy_plane(const Measure2D& tau, double a, double b) {
  const double len = b - a;
  std::vector<const Atom2D*> in;
  auto [lo, hi] = tau.range_in_x1(a, b);
  double mass = 0.0;
  for (size_t j = lo; j < hi; ++j) {
    const auto& x = tau.atoms()[j];
    if (x.x2 >= len) continue;
    in.push_back(&x);
    mass += x.mass;
  }
  if (mass == 0.0 || in.size() < 2) return 0.0;
  double m1 = 0.0, m2 = 0.0;
  for (const auto* x : in) {
    m1 += x->x1 * x->mass;
    m2 += x->x2 * x->mass;
  }
  m1 /= mass;
  m2 /= mass;
  double var = 0.0;
  for (const auto* x : in) var += (sq(x->x1 - m1) + sq(x->x2 - m2)) * x->mass;
  const double e_sq = var / (mass * len * len);

  // identity check: 2 ||g||^2_{L^2_0} equals the mean of the doubled integral
  double dbl = 0.0;
  for (const auto* x : in)
    for (const auto* y : in) dbl += (sq(x->x1 - y->x1) + sq(x->x2 - y->x2)) * x->mass * y->mass;
  dbl /= (2.0 * mass * len * len);
  require(std::abs(dbl - var / (len * len)) <= 1e-10 * std::max(1.0, std::abs(dbl)),
          "doubled-integral energy identity violated");
  return std::sqrt(e_sq);
}

struct EnergyReport {
  std::vector<double> energies;  // per Whitney interval, in traversal order
  double lhs = 0.0;
  double mass = 0.0;     // tau(Q_I0) for part I, sigma(I0) for part II
  double r_char = 0.0;
  double ratio = 0.0;    // LHS / (R^2 * mass)
  bool infinite = false;
};

enum class EnergySide { I, II };

inline EnergyReport energy_inequality_report(const Measure1D& sigma, const Measure2D& tau,
                                             const Grid& grid, const DyadicInterval& root,
                                             const std::vector<DyadicInterval>& partition,
                                             EnergySide side, double r_char) {
  for (const auto& iv : partition)
    require(iv.a >= root.a - kBoundaryTol && iv.b <= root.b + kBoundaryTol,
            "partition member escapes the root interval");
  EnergyReport rep;
  rep.r_char = r_char;
  const auto q_root = Region::carleson_cube(root.a, root.b);
  for (const auto& iv : partition) {
    auto w = whitney(grid, iv);
    for (const auto& K : w.members) {
      if (side == EnergySide::I) {
        const double sk = sigma.mass_in(K.a, K.b);
        if (sk == 0.0) continue;
        const auto hole = Region::intersect(
            {q_root, Region::complement(Region::carleson_cube(K.a, K.b))});
        const Point2 xq{K.center(), 0.5 * K.len()};
        const double tval = t_tau_on_region(tau, hole, xq);
        const double e = energy_line(sigma, grid, K);
        rep.energies.push_back(e);
        rep.lhs += sq(tval) * sq(e) * sk;
      } else {
        const double tk = tau.mass_in_box(K.a, K.b, 0.0, K.len());
        if (tk == 0.0) continue;
        double pval = 0.0;
        for (const auto& at : sigma.atoms()) {
          if (at.position < root.a || at.position >= root.b) continue;
          if (at.position >= K.a && at.position < K.b) continue;
          pval += at.mass * poisson_profile(dist_to_interval(at.position, K.a, K.b), K.len());
        }
        const double e = energy_plane(tau, K.a, K.b);
        rep.energies.push_back(e);
        rep.lhs += sq(pval) * sq(e) * tk;
      }
    }
  }
  rep.mass = side == EnergySide::I ? tau.mass_in_box(root.a, root.b, 0.0, root.len())
                                   : sigma.mass_in(root.a, root.b);
  const double denom = sq(r_char) * rep.mass;
  if (denom > 0.0)
    rep.ratio = rep.lhs / denom;
  else if (rep.lhs > 0.0)
    rep.infinite = true;
  return rep;
}

// ---------------------------------------------------------------------------
// V regions
// ---------------------------------------------------------------------------
struct VMembership {
  bool in_v = false;
  bool in_top = false;
  bool in_bottom = false;
};

inline VMembership v_region_tools(double a, double b, const Point2& x) {
  require(x.x2 >= 0.0, "point below the half-plane");
  VMembership m;
  m.in_v = Region::v_region(a, b)->contains(x);
  m.in_top = Region::v_top(a, b)->contains(x);
  m.in_bottom = Region::v_bottom(a, b)->contains(x);
  return m;
}

inline int overlap_max(const std::vector<DyadicInterval>& partition,
                       const std::vector<Point2>& samples) {
  int worst = 0;
  for (const auto& x : samples) {
    int c = 0;
    for (const auto& iv : partition)
      if (Region::v_bottom(iv.a, iv.b)->contains(x)) ++c;
    worst = std::max(worst, c);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Monotonicity functionals
// ---------------------------------------------------------------------------
struct MonoConfig {
  DyadicInterval I;   // outer interval
  DyadicInterval J;   // inner, 10*J inside I
  DyadicInterval Jp;  // J' inside J (part I); defaults to J
  Measure1D sigma;
  Measure2D tau;
  std::vector<double> phi;  // nonnegative density on tau atoms
  std::vector<double> f;    // density on sigma atoms (part I third display / part II)
  Grid grid;
};

struct MonoReportI {
  double equiv_ratio_low = 0.0;   // (e:monoI2) lhs/rhs
  double equiv_ratio_high = 0.0;  // rhs/lhs
  double mono_ratio = 0.0;        // (e:MONO) lhs/rhs
  double l1_ratio = 0.0;          // (e:monoI1) lhs/rhs
};

namespace detail {
inline void check_ten_j(const DyadicInterval& J, const DyadicInterval& I) {
  const double c = J.center(), h = 5.0 * J.len();
  require(c - h >= I.a - kBoundaryTol && c + h <= I.b + kBoundaryTol,
          "hypothesis violated: 10*J must sit inside I");
}
}  // namespace detail

inline MonoReportI monotonicity_report_I(const MonoConfig& cfg) {
  detail::check_ten_j(cfg.J, cfg.I);
  require(cfg.phi.size() == cfg.tau.size(), "phi must assign a value to each tau atom");
  for (double v : cfg.phi) require(v >= 0.0, "hypothesis violated: phi must be nonnegative");
  const auto v_I = Region::v_region(cfg.I.a, cfg.I.b);
  const auto q_I = Region::carleson_cube(cfg.I.a, cfg.I.b);
  bool off_v = true, off_q = true;
  for (size_t j = 0; j < cfg.tau.size(); ++j) {
    if (cfg.phi[j] == 0.0) continue;
    const Point2 x{cfg.tau.atoms()[j].x1, cfg.tau.atoms()[j].x2};
    if (v_I->contains(x)) off_v = false;
    if (q_I->contains(x)) off_q = false;
  }
  require(off_v || off_q, "hypothesis violated: phi must be supported off V_I or off Q_I");

  MonoReportI rep;
  const Point2 xqj{cfg.J.center(), 0.5 * cfg.J.len()};
  const double t_phi = apply_t_tau(cfg.tau, cfg.phi, xqj);

  const auto h = haar_function(cfg.sigma, cfg.grid, cfg.Jp);
  if (!h.is_zero) {
    Complex pair{0.0, 0.0};
    double t_coeff = 0.0;
    for (const auto& at : cfg.sigma.atoms()) {
      const double hv = h(at.position);
      if (hv == 0.0) continue;
      t_coeff += at.position * hv * at.mass;
      for (size_t j = 0; j < cfg.tau.size(); ++j) {
        if (cfg.phi[j] == 0.0) continue;
        const auto& x = cfg.tau.atoms()[j];
        pair += riesz_kernel({x.x1, x.x2}, at.position) * (hv * at.mass * cfg.phi[j] * x.mass);
      }
    }
    const double lhs = std::abs(pair);
    const double rhs = t_phi * (t_coeff / cfg.J.len());
    if (off_v) {
      if (rhs > 0.0) rep.equiv_ratio_low = lhs / rhs;
      if (lhs > 0.0) rep.equiv_ratio_high = rhs / lhs;
    }
    if (off_q && rhs > 0.0) rep.mono_ratio = lhs / rhs;
  }

  if (!cfg.f.empty()) {
    require(off_q, "hypothesis violated: phi must be supported off Q_I");
    require(cfg.f.size() == cfg.sigma.size(), "f must assign a value to each sigma atom");
    double mean = 0.0, l1 = 0.0;
    for (size_t i = 0; i < cfg.sigma.size(); ++i) {
      const auto& at = cfg.sigma.atoms()[i];
      if (cfg.f[i] != 0.0)
        require(at.position >= cfg.J.a && at.position < cfg.J.b,
                "hypothesis violated: f must be supported on J");
      mean += cfg.f[i] * at.mass;
      l1 += std::abs(cfg.f[i]) * at.mass;
    }
    require(std::abs(mean) <= 1e-10 * std::max(1.0, l1),
            "hypothesis violated: f must have sigma-integral zero");
    Complex pair{0.0, 0.0};
    for (size_t i = 0; i < cfg.sigma.size(); ++i) {
      if (cfg.f[i] == 0.0) continue;
      const auto& at = cfg.sigma.atoms()[i];
      for (size_t j = 0; j < cfg.tau.size(); ++j) {
        if (cfg.phi[j] == 0.0) continue;
        const auto& x = cfg.tau.atoms()[j];
        pair += riesz_kernel({x.x1, x.x2}, at.position) *
                (cfg.f[i] * at.mass * cfg.phi[j] * x.mass);
      }
    }
    const double rhs = t_phi * l1;
    if (rhs > 0.0) rep.l1_ratio = std::abs(pair) / rhs;
  }
  return rep;
}

struct MonoReportII {
  double upper_ratio = 0.0;  // (e:monoII<) lhs/rhs
  double lower_ratio = 0.0;  // (e:monoII>) lhs/rhs
};

/// L^2_0(Q_J, tau) norm of the vector transform R_sigma f.
inline double riesz_centered_norm(const Measure1D& sigma, const std::vector<double>& f,
                                  const Measure2D& tau, double a, double b) {
  const double len = b - a;
  std::vector<size_t> in;
  double mass = 0.0;
  auto [lo, hi] = tau.range_in_x1(a, b);
  for (size_t j = lo; j < hi; ++j)
    if (tau.atoms()[j].x2 < len) {
      in.push_back(j);
      mass += tau.atoms()[j].mass;
    }
  if (mass == 0.0) return 0.0;
  std::vector<Point2> pts;
  for (size_t j : in) pts.push_back({tau.atoms()[j].x1, tau.atoms()[j].x2});
  auto vals = apply_riesz(sigma, f, pts);
  Complex mean{0.0, 0.0};
  for (size_t idx = 0; idx < in.size(); ++idx) mean += vals[idx] * tau.atoms()[in[idx]].mass;
  mean /= mass;
  double s = 0.0;
  for (size_t idx = 0; idx < in.size(); ++idx)
    s += std::norm(vals[idx] - mean) * tau.atoms()[in[idx]].mass;
  return std::sqrt(s);
}

/// Centered L^2(Q_J, tau) norm of a coordinate function.
inline double coordinate_centered_norm(const Measure2D& tau, double a, double b,
                                       bool second_coord_included) {
  const double len = b - a;
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  auto [lo, hi] = tau.range_in_x1(a, b);
  std::vector<size_t> in;
  for (size_t j = lo; j < hi; ++j)
    if (tau.atoms()[j].x2 < len) {
      in.push_back(j);
      mass += tau.atoms()[j].mass;
      m1 += tau.atoms()[j].x1 * tau.atoms()[j].mass;
      m2 += tau.atoms()[j].x2 * tau.atoms()[j].mass;
    }
  if (mass == 0.0) return 0.0;
  m1 /= mass;
  m2 /= mass;
  double s = 0.0;
  for (size_t j : in) {
    s += sq(tau.atoms()[j].x1 - m1) * tau.atoms()[j].mass;
    if (second_coord_included) s += sq(tau.atoms()[j].x2 - m2) * tau.atoms()[j].mass;
  }
  return std::sqrt(s) / len;
}

inline MonoReportII monotonicity_report_II(const MonoConfig& cfg) {
  detail::check_ten_j(cfg.J, cfg.I);
  require(cfg.f.size() == cfg.sigma.size(), "f must assign a value to each sigma atom");
  for (size_t i = 0; i < cfg.sigma.size(); ++i) {
    const double t = cfg.sigma.atoms()[i].position;
    if (cfg.f[i] != 0.0)
      require(t < cfg.I.a || t >= cfg.I.b, "hypothesis violated: f must vanish on I");
  }
  MonoReportII rep;
  std::vector<double> f_abs(cfg.f.size());
  bool nonneg = true;
  for (size_t i = 0; i < cfg.f.size(); ++i) {
    f_abs[i] = std::abs(cfg.f[i]);
    if (cfg.f[i] < 0.0) nonneg = false;
  }
  const double p_abs = poisson_avg(cfg.sigma, f_abs, cfg.J.a, cfg.J.b);
  const double lhs_full = riesz_centered_norm(cfg.sigma, cfg.f, cfg.tau, cfg.J.a, cfg.J.b);
  const double rhs_full = p_abs * coordinate_centered_norm(cfg.tau, cfg.J.a, cfg.J.b, true);
  if (rhs_full > 0.0) rep.upper_ratio = lhs_full / rhs_full;

  if (nonneg) {
    const double p = poisson_avg(cfg.sigma, cfg.f, cfg.J.a, cfg.J.b);
    const double lhs = p * coordinate_centered_norm(cfg.tau, cfg.J.a, cfg.J.b, false);
    const double rhs = lhs_full;
    if (rhs > 0.0) rep.lower_ratio = lhs / rhs;
  }
  return rep;
}

/// Pointwise ratio of the first-coordinate kernel difference against the
/// Poisson-profile minorant; the sign claim is ratio >= 0.
inline double bigger_ratio(const DyadicInterval& J, double t, const Point2& x) {
  const double t_j = J.center();
  if (t == t_j) return std::numeric_limits<double>::infinity();
  const double g_t = (x.x1 - t) / (sq(x.x1 - t) + x.x2 * x.x2);
  const double g_tj = (x.x1 - t_j) / (sq(x.x1 - t_j) + x.x2 * x.x2);
  const double lhs = (t > t_j ? 1.0 : -1.0) * (g_t - g_tj);
  const double rhs =
      std::abs(t - t_j) / (sq(J.len()) + sq(dist_to_interval(x.x1, J.a, J.b)));
  return lhs / rhs;
}

// ---------------------------------------------------------------------------
// Muckenhoupt two weight Hardy constant
// ---------------------------------------------------------------------------
struct HardyReport {
  double b = 0.0;
  double direct_norm = 0.0;
};

inline HardyReport hardy(const Measure1D& w_hat, const Measure1D& sigma_hat,
                         double tol = 1e-10) {
  for (const auto& a : w_hat.atoms()) require(a.position > 0.0, "hardy weight atom at or below 0");
  for (const auto& a : sigma_hat.atoms())
    require(a.position > 0.0, "hardy weight atom at or below 0");
  HardyReport rep;
  if (w_hat.size() == 0 || sigma_hat.size() == 0) return rep;

  std::vector<double> cuts;
  for (const auto& a : w_hat.atoms()) cuts.push_back(a.position);
  for (const auto& a : sigma_hat.atoms()) cuts.push_back(a.position);
  std::sort(cuts.begin(), cuts.end());
  double best = 0.0;
  for (double r : cuts) {
    const double tail = w_hat.total_mass() - w_hat.mass_in(0.0, r + kBoundaryTol);
    const double head = sigma_hat.mass_in(0.0, r + kBoundaryTol);  // closed at r
    best = std::max(best, tail * head);
  }
  rep.b = std::sqrt(best);

  Eigen::MatrixXcd M(w_hat.size(), sigma_hat.size());
  for (size_t i = 0; i < w_hat.size(); ++i)
    for (size_t j = 0; j < sigma_hat.size(); ++j) {
      const bool inside = sigma_hat.atoms()[j].position < w_hat.atoms()[i].position;
      M(i, j) = inside ? std::sqrt(w_hat.atoms()[i].mass * sigma_hat.atoms()[j].mass) : 0.0;
    }
  rep.direct_norm = power_iteration_norm(M, tol).norm;
  return rep;
}

// ---------------------------------------------------------------------------
// Weak boundedness
// ---------------------------------------------------------------------------
inline double weak_boundedness_ratio(const Measure1D& sigma, const Measure2D& tau, double ia,
                                     double ib, double ja, double jb, double a2_value,
                                     double tol = 1e-10) {
  require(std::min(ib, jb) <= std::max(ia, ja) + kBoundaryTol,
          "intervals must intersect only at their boundaries");
  auto [slo, shi] = sigma.range_in(ia, ib);
  if (shi == slo) return 0.0;
  const double jlen = jb - ja;
  std::vector<size_t> tin;
  auto [tlo, thi] = tau.range_in_x1(ja, jb);
  for (size_t j = tlo; j < thi; ++j)
    if (tau.atoms()[j].x2 < jlen) tin.push_back(j);
  if (tin.empty() || a2_value <= 0.0) return 0.0;

  Eigen::MatrixXcd M(tin.size(), shi - slo);
  for (size_t jj = 0; jj < tin.size(); ++jj) {
    const auto& x = tau.atoms()[tin[jj]];
    for (size_t i = slo; i < shi; ++i) {
      const auto& t = sigma.atoms()[i];
      M(jj, i - slo) = riesz_kernel({x.x1, x.x2}, t.position) * std::sqrt(x.mass * t.mass);
    }
  }
  return power_iteration_norm(M, tol).norm / std::sqrt(a2_value);
}

}  // namespace tw
