#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "json.hpp"
#include "tw/kernels.hpp"
#include "tw/measure.hpp"

namespace tw {

// ---------------------------------------------------------------------------
// Inner functions: finite Blaschke part and finitely atomic singular part
// ---------------------------------------------------------------------------
struct InnerFunction {
  std::vector<Complex> zeros;                      // inside the open disk, with multiplicity
  std::vector<std::pair<double, double>> singular;  // (boundary angle, mass >= 0)

  void validate() const {
    for (const auto& z : zeros) require(std::abs(z) < 1.0, "Blaschke zero outside the open disk");
    for (const auto& [ang, m] : singular) require(m >= 0.0, "singular mass must be nonnegative");
  }
  int degree() const { return static_cast<int>(zeros.size()); }
};

inline Complex inner_eval(const InnerFunction& theta, Complex z) {
  require(std::abs(z) <= 1.0 + kBoundaryTol, "evaluation point outside the closed disk");
  Complex value{1.0, 0.0};
  for (const auto& a : theta.zeros) {
    if (std::abs(a) < 1e-15) {
      value *= z;
    } else {
      value *= (std::abs(a) / a) * (a - z) / (1.0 - std::conj(a) * z);
    }
  }
  for (const auto& [ang, m] : theta.singular) {
    const Complex xi = unit_point(ang);
    require(std::abs(xi - z) > 1e-12, "evaluation at a singular atom location");
    value *= std::exp(-m * (xi + z) / (xi - z));
  }
  return value;
}

/// Angular derivative modulus of a finite Blaschke product at a unimodular point.
inline double blaschke_boundary_derivative(const InnerFunction& theta, Complex zeta) {
  double s = 0.0;
  for (const auto& a : theta.zeros) s += (1.0 - std::norm(a)) / std::norm(zeta - a);
  return s;
}

// ---------------------------------------------------------------------------
// Clark measure of a finite Blaschke product: the d solutions of theta = 1 on
// the circle, each with mass 1/|theta'|; certified by the Poisson identity.
// ---------------------------------------------------------------------------
inline Measure1D clark_measure(const InnerFunction& theta, double tol = 1e-8) {
  theta.validate();
  require(theta.singular.empty(),
          "Clark computation supports finite Blaschke products only");
  const int d = theta.degree();
  require(d >= 1, "Blaschke degree must be at least 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;

  // March the boundary phase; it increases by 2*pi*d over a full turn.
  auto phase_step = [&](double t0, double t1, double acc) {
    // increment of the continuous argument between nearby boundary points
    const Complex w0 = inner_eval(theta, unit_point(t0));
    const Complex w1 = inner_eval(theta, unit_point(t1));
    return acc + std::arg(w1 / w0);
  };

  const int coarse = 512 * d;
  std::vector<double> ts(coarse + 1), phases(coarse + 1);
  ts[0] = 0.0;
  phases[0] = std::arg(inner_eval(theta, {1.0, 0.0}));
  for (int i = 1; i <= coarse; ++i) {
    ts[i] = two_pi * i / coarse;
    phases[i] = phase_step(ts[i - 1], ts[i], phases[i - 1]);
  }

  std::vector<Atom1D> atoms;
  const double lo = phases[0], hi = phases[0] + two_pi * d;
  for (long j = static_cast<long>(std::ceil(lo / two_pi)); two_pi * j < hi; ++j) {
    const double target = two_pi * j;
    if (target < lo) continue;
    // bracket the crossing, then bisect with local phase continuation
    int idx = 0;
    while (idx < coarse && phases[idx + 1] < target) ++idx;
    if (idx >= coarse) break;
    double ta = ts[idx], tb = ts[idx + 1];
    double pa = phases[idx];
    for (int it = 0; it < 100 && tb - ta > 1e-13; ++it) {
      const double tm = 0.5 * (ta + tb);
      const double pm = phase_step(ta, tm, pa);
      if (pm < target) {
        ta = tm;
        pa = pm;
      } else {
        tb = tm;
      }
    }
    const double root = 0.5 * (ta + tb);
    const double deriv = blaschke_boundary_derivative(theta, unit_point(root));
    require(deriv > 0.0, "degenerate boundary derivative");
    atoms.push_back({root, 1.0 / deriv});
  }
  require(static_cast<int>(atoms.size()) == d,
          "Clark root count mismatch: expected one root per Blaschke degree");
  Measure1D sigma(Domain1D::circle, std::move(atoms));

  // certify against the Herglotz representation of (1+theta)/(1-theta)
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Complex z = 0.55 * unit_point(two_pi * (i + 0.37) / 100.0);
    const Complex th = inner_eval(theta, z);
    const double lhs = (1.0 - std::norm(th)) / std::norm(1.0 - th);
    double rhs = 0.0;
    for (const auto& at : sigma.atoms())
      rhs += at.mass * disk_poisson_kernel(z, unit_point(at.position));
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  if (worst >= tol)
    throw std::runtime_error("Clark Poisson identity residual " + std::to_string(worst) +
                             " exceeds tolerance; root finding failed");
  return sigma;
}

inline Measure2D nu_measure(const InnerFunction& theta, const Measure2D& mu) {
  require(mu.domain() == Domain2D::closed_disk, "nu reweighting expects a disk measure");
  return reweight(mu, [&](const Point2& p) {
    const Complex th = inner_eval(theta, {p.x1, p.x2});
    return std::norm(1.0 - th);
  });
}

// ---------------------------------------------------------------------------
// Disk-side transforms
// ---------------------------------------------------------------------------

/// Poisson extension of a boundary measure restricted to a region.
inline double disk_poisson_boundary(const Measure1D& sigma, const Region::Ptr& where, Complex z) {
  double s = 0.0;
  for (const auto& at : sigma.atoms())
    if (where->contains(at.position)) s += at.mass * disk_poisson_kernel(z, unit_point(at.position));
  return s;
}

/// Poisson extension of a measure on the closed disk restricted to a region.
inline double disk_poisson_planar(const Measure2D& tau, const Region::Ptr& where, Complex z) {
  double s = 0.0;
  for (const auto& at : tau.atoms())
    if (where->contains(Point2{at.x1, at.x2}))
      s += at.mass * disk_poisson_2d_kernel(z, {at.x1, at.x2});
  return s;
}

/// Cauchy transform of f dsigma at z.
inline Complex disk_cauchy(const Measure1D& sigma, const std::vector<double>& f, Complex z) {
  Complex s{0.0, 0.0};
  for (size_t i = 0; i < sigma.size(); ++i) {
    if (f[i] == 0.0) continue;
    s += disk_cauchy_kernel(z, unit_point(sigma.atoms()[i].position)) * f[i] *
         sigma.atoms()[i].mass;
  }
  return s;
}

inline Eigen::MatrixXcd disk_bilinear_matrix(const Measure1D& sigma, const Measure2D& tau) {
  Eigen::MatrixXcd M(tau.size(), sigma.size());
  for (size_t j = 0; j < tau.size(); ++j) {
    const Complex z{tau.atoms()[j].x1, tau.atoms()[j].x2};
    for (size_t i = 0; i < sigma.size(); ++i) {
      const Complex w = unit_point(sigma.atoms()[i].position);
      M(j, i) = disk_cauchy_kernel(z, w) * std::sqrt(tau.atoms()[j].mass * sigma.atoms()[i].mass);
    }
  }
  return M;
}

struct Arc {
  double start = 0.0;   // angle
  double length = 0.0;  // radians, also |I|
};

/// Dyadic-style arcs of length at most 1/2 from `levels` rotated subdivisions.
inline std::vector<Arc> arc_family(int depth, int n_shift, std::uint64_t seed) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<Arc> out;
  Rng rng(seed);
  for (int s = 0; s <= n_shift; ++s) {
    const double rot = s == 0 ? 0.0 : rng.uniform(0.0, two_pi);
    for (int level = 4; level <= depth; ++level) {
      const long count = 1L << level;
      const double len = two_pi / static_cast<double>(count);
      if (len > 0.5) continue;
      for (long n = 0; n < count; ++n) out.push_back({rot + n * len, len});
    }
  }
  return out;
}

struct DiskConstantsReport {
  double global = 0.0;  // sigma(T) * tau(D)
  double a2 = 0.0;
  double t_forward = 0.0;
  double t_backward = 0.0;
  double n_direct = 0.0;
  int skipped_samples = 0;
  double r_char() const { return std::sqrt(global + a2) + std::max(t_forward, t_backward); }
};

inline double disk_a2_term(const Measure1D& sigma, const Measure2D& tau, Complex z) {
  const double len = 1.0 - std::abs(z);
  const double center = std::arg(z);
  const auto arc = Region::arc(center - 0.5 * len, len);
  const auto box = Region::carleson_box_disk(center - 0.5 * len, len);
  const double p_sigma_out = disk_poisson_boundary(sigma, Region::complement(arc), z);
  const double p_tau = disk_poisson_planar(tau, Region::all(2), z);
  const double p_sigma = disk_poisson_boundary(sigma, Region::all(1), z);
  const double p_tau_out = disk_poisson_planar(tau, Region::complement(box), z);
  return p_sigma_out * p_tau + p_sigma * p_tau_out;
}

inline DiskConstantsReport disk_constants(const Measure1D& sigma, const Measure2D& tau,
                                          const std::vector<Complex>& z_samples,
                                          const std::vector<Arc>& arcs, double tol = 1e-10) {
  require(sigma.domain() == Domain1D::circle, "sigma must live on the circle");
  require(tau.domain() == Domain2D::closed_disk, "tau must live on the closed disk");
  require(!arcs.empty(), "empty arc family");
  DiskConstantsReport rep;
  rep.global = sigma.total_mass() * tau.total_mass();

  for (const auto& z : z_samples) {
    if (std::abs(z) < 0.01 || std::abs(z) > 1.0 - 1e-9) continue;  // I_z degenerate
    bool coincides = false;
    for (const auto& at : tau.atoms())
      if (std::abs(Complex{at.x1, at.x2} - z) <= 1e-12) coincides = true;
    if (coincides) {  // skipped with a tally rather than a hard error
      ++rep.skipped_samples;
      continue;
    }
    rep.a2 = std::max(rep.a2, disk_a2_term(sigma, tau, z));
  }

  for (const auto& arc : arcs) {
    if (arc.length > 0.5 + kBoundaryTol) continue;
    const auto arc_region = Region::arc(arc.start, arc.length);
    const auto box = Region::carleson_box_disk(arc.start, arc.length);
    const double s_mass = total_mass_on(sigma, arc_region);
    const double t_mass = total_mass_on(tau, box);

    if (s_mass > 0.0) {
      double integral = 0.0;
      for (const auto& at : tau.atoms()) {
        const Point2 x{at.x1, at.x2};
        if (!box->contains(x)) continue;
        Complex v{0.0, 0.0};
        for (const auto& ws : sigma.atoms()) {
          if (!arc_region->contains(ws.position)) continue;
          const Complex w = unit_point(ws.position);
          const Complex den = 1.0 - std::conj(w) * Complex{x.x1, x.x2};
          if (std::abs(den) <= 1e-12)
            throw std::domain_error("coincident singular atom pair in disk testing");
          v += ws.mass / den;
        }
        integral += std::norm(v) * at.mass;
      }
      rep.t_forward = std::max(rep.t_forward, std::sqrt(integral / s_mass));
    }
    if (t_mass > 0.0) {
      double integral = 0.0;
      for (const auto& ws : sigma.atoms()) {
        if (!arc_region->contains(ws.position)) continue;
        const Complex w = unit_point(ws.position);
        Complex v{0.0, 0.0};
        for (const auto& at : tau.atoms()) {
          const Point2 x{at.x1, at.x2};
          if (!box->contains(x)) continue;
          const Complex den = 1.0 - std::conj(w) * Complex{x.x1, x.x2};
          if (std::abs(den) <= 1e-12)
            throw std::domain_error("coincident singular atom pair in disk testing");
          v += at.mass / den;
        }
        integral += std::norm(v) * ws.mass;
      }
      rep.t_backward = std::max(rep.t_backward, std::sqrt(integral / t_mass));
    }
  }

  if (sigma.size() > 0 && tau.size() > 0)
    rep.n_direct =
        power_iteration_norm(disk_bilinear_matrix(sigma, tau), tol, /*vector_kernel=*/false).norm;
  return rep;
}

// ---------------------------------------------------------------------------
// Composition-operator pullbacks
// ---------------------------------------------------------------------------
inline Complex eval_poly(const std::vector<Complex>& coeffs, Complex z) {
  Complex acc{0.0, 0.0};
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

inline Measure2D pullback(const std::vector<Complex>& phi, const Measure2D& tau_base) {
  require(tau_base.domain() == Domain2D::closed_disk, "pullback expects a disk measure");
  for (const auto& at : tau_base.atoms()) {
    const Complex img = eval_poly(phi, {at.x1, at.x2});
    require(std::abs(img) <= 1.0 + 1e-9, "self-map escapes the closed disk at an atom");
  }
  return push_forward(tau_base, [&](const Point2& p) {
    Complex img = eval_poly(phi, {p.x1, p.x2});
    const double r = std::abs(img);
    if (r > 1.0) img /= r;
    return Point2{img.real(), img.imag()};
  });
}

// ---------------------------------------------------------------------------
// Compactness profiles
// ---------------------------------------------------------------------------
struct CompactnessProfile {
  std::vector<double> radii;
  std::vector<double> a2_tail;       // sup over samples with |z| >= r
  std::vector<double> lengths;
  std::vector<double> forward_tail;  // sup over arcs with |I| < eps
  std::vector<double> backward_tail;
};

inline CompactnessProfile compactness_profile(const Measure1D& sigma, const Measure2D& tau,
                                              const std::vector<double>& radius_grid,
                                              const std::vector<double>& length_grid,
                                              int angle_samples = 64, int arc_depth = 9) {
  require(std::is_sorted(radius_grid.begin(), radius_grid.end()), "radius grid must ascend");
  CompactnessProfile prof;
  prof.radii = radius_grid;
  prof.lengths = length_grid;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  // One master sample set; each profile entry takes a sup over a shrinking
  // slice. A sample only counts when its boundary box carries tau mass:
  // the compactness obstruction lives at the boundary scale, and boxes that
  // miss the support contribute empty suprema.
  std::vector<std::pair<double, double>> samples;  // (radius, a2 term)
  for (double rho : radius_grid) {
    for (int i = 0; i < angle_samples; ++i) {
      const Complex z = rho * unit_point(two_pi * (i + 0.5) / angle_samples);
      if (std::abs(z) < 0.01) continue;
      const double len = 1.0 - std::abs(z);
      const auto box = Region::carleson_box_disk(std::arg(z) - 0.5 * len, len);
      if (total_mass_on(tau, box) <= 0.0) continue;
      samples.push_back({rho, disk_a2_term(sigma, tau, z)});
    }
  }
  for (double r : radius_grid) {
    double sup = 0.0;
    for (const auto& [rho, val] : samples)
      if (rho >= r - kBoundaryTol) sup = std::max(sup, val);
    prof.a2_tail.push_back(sup);
  }

  const auto arcs = arc_family(arc_depth, 0, 1);
  std::vector<std::pair<double, std::pair<double, double>>> ratios;  // (len, (fwd, bwd))
  for (const auto& arc : arcs) {
    const auto arc_region = Region::arc(arc.start, arc.length);
    const auto box = Region::carleson_box_disk(arc.start, arc.length);
    const double s_mass = total_mass_on(sigma, arc_region);
    const double t_mass = total_mass_on(tau, box);
    double fwd = 0.0, bwd = 0.0;
    if (s_mass > 0.0) {
      double integral = 0.0;
      for (const auto& at : tau.atoms()) {
        if (!box->contains(Point2{at.x1, at.x2})) continue;
        Complex v{0.0, 0.0};
        for (const auto& ws : sigma.atoms())
          if (arc_region->contains(ws.position))
            v += ws.mass / (1.0 - std::conj(unit_point(ws.position)) * Complex{at.x1, at.x2});
        integral += std::norm(v) * at.mass;
      }
      fwd = integral / s_mass;
    }
    if (t_mass > 0.0) {
      double integral = 0.0;
      for (const auto& ws : sigma.atoms()) {
        if (!arc_region->contains(ws.position)) continue;
        Complex v{0.0, 0.0};
        for (const auto& at : tau.atoms())
          if (box->contains(Point2{at.x1, at.x2}))
            v += at.mass / (1.0 - std::conj(unit_point(ws.position)) * Complex{at.x1, at.x2});
        integral += std::norm(v) * ws.mass;
      }
      bwd = integral / t_mass;
    }
    ratios.push_back({arc.length, {fwd, bwd}});
  }
  for (double eps : length_grid) {
    double fsup = 0.0, bsup = 0.0;
    for (const auto& [len, fb] : ratios) {
      if (len >= eps) continue;
      fsup = std::max(fsup, fb.first);
      bsup = std::max(bsup, fb.second);
    }
    prof.forward_tail.push_back(std::sqrt(fsup));
    prof.backward_tail.push_back(std::sqrt(bsup));
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Reproducing-kernel probe for the model-space embedding constant
// ---------------------------------------------------------------------------
inline double kernel_probe(const InnerFunction& theta, const Measure2D& mu,
                           const std::vector<Complex>& lambda_samples) {
  double best = 0.0;
  for (const auto& lam : lambda_samples) {
    require(std::abs(lam) < 1.0, "probe points must lie in the open disk");
    const Complex th_lam = inner_eval(theta, lam);
    const double norm_sq = (1.0 - std::norm(th_lam)) / (1.0 - std::norm(lam));
    if (norm_sq <= 0.0) continue;
    double integral = 0.0;
    for (const auto& at : mu.atoms()) {
      const Complex z{at.x1, at.x2};
      const Complex den = 1.0 - std::conj(lam) * z;
      if (std::abs(den) <= 1e-12) continue;
      const Complex k = (1.0 - std::conj(th_lam) * inner_eval(theta, z)) / den;
      integral += std::norm(k) * at.mass;
    }
    best = std::max(best, integral / norm_sq);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------
inline nlohmann::json to_json(const InnerFunction& f) {
  nlohmann::json zeros = nlohmann::json::array();
  for (const auto& z : f.zeros) zeros.push_back({z.real(), z.imag()});
  nlohmann::json singular = nlohmann::json::array();
  for (const auto& [a, m] : f.singular) singular.push_back({a, m});
  return {{"zeros", zeros}, {"singular", singular}};
}

inline InnerFunction inner_from_json(const nlohmann::json& j) {
  InnerFunction f;
  for (const auto& z : j.at("zeros"))
    f.zeros.push_back({z.at(0).get<double>(), z.at(1).get<double>()});
  for (const auto& s : j.at("singular"))
    f.singular.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
  f.validate();
  return f;
}

inline nlohmann::json to_json(const DiskConstantsReport& r) {
  return {{"global", r.global},        {"a2", r.a2},
          {"t_forward", r.t_forward},  {"t_backward", r.t_backward},
          {"n_direct", r.n_direct},    {"skipped_samples", r.skipped_samples}};
}

}  // namespace tw
