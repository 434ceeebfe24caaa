#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "tw/common.hpp"
#include "tw/measure.hpp"

namespace tw {

// ---------------------------------------------------------------------------
// Kernels. The planar Riesz kernel is carried as a complex number
// R^1 + i R^2, so the Cauchy transform and the vector transform share one
// code path; all downstream uses are moduli or coordinate parts.
// ---------------------------------------------------------------------------

inline Complex riesz_kernel(const Point2& x, double t) {
  const double d1 = x.x1 - t;
  const double den = d1 * d1 + x.x2 * x.x2;
  require(den > 0.0, "riesz kernel evaluated at a coincident point");
  return {d1 / den, x.x2 / den};
}

/// C^1 radial ramp: 0 on [0,a/2], rises to 1 on [a/2,a], 1 on [a,b],
/// falls to 0 on [b,2b].
inline double truncation_ramp(double rho, double alpha, double beta) {
  auto smooth = [](double u) { return u <= 0.0 ? 0.0 : (u >= 1.0 ? 1.0 : u * u * (3.0 - 2.0 * u)); };
  if (rho <= 0.5 * alpha || rho >= 2.0 * beta) return 0.0;
  if (rho < alpha) return smooth((rho - 0.5 * alpha) / (0.5 * alpha));
  if (rho <= beta) return 1.0;
  return smooth((2.0 * beta - rho) / beta);
}

inline Complex riesz_truncated_kernel(const Point2& x, double t, double alpha, double beta) {
  require(alpha > 0.0 && beta > alpha, "truncation requires 0 < alpha < beta");
  const double d1 = x.x1 - t;
  const double rho = std::hypot(d1, x.x2);
  const double psi = truncation_ramp(rho, alpha, beta);
  if (psi == 0.0) return {0.0, 0.0};
  if (psi == 1.0) return riesz_kernel(x, t);  // exact agreement on the annulus
  const double den = d1 * d1 + x.x2 * x.x2;
  return {psi * d1 / den, psi * x.x2 / den};
}

/// T_tau kernel value at target x for source y.
inline double t_tau_kernel(const Point2& y, const Point2& x) {
  return x.x2 / (y.x2 * y.x2 + sq(y.x1 - x.x1) + x.x2 * x.x2);
}

/// The unscaled Poisson-like kernel of the stopping analysis.
inline double t_hat_kernel(const Point2& y, const Point2& x) {
  return 1.0 / (y.x2 * y.x2 + x.x2 * x.x2 + sq(y.x1 - x.x1));
}

/// Fixed comparable form of the Poisson profile: len / (len + dist)^2.
inline double poisson_profile(double dist, double len) { return len / sq(len + dist); }

// --- disk-side kernels ---

inline Complex unit_point(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline Complex disk_cauchy_kernel(Complex z, Complex w) {
  const Complex den = 1.0 - std::conj(w) * z;
  require(std::abs(den) > 0.0, "disk Cauchy kernel singular");
  return 1.0 / den;
}

inline double disk_poisson_kernel(Complex z, Complex w) {
  const double den = std::norm(w - z);
  require(den > 0.0, "Poisson kernel singular");
  return (1.0 - std::norm(z)) / den;
}

inline double disk_conj_poisson_kernel(Complex z, Complex w) {
  const double den = std::norm(w - z);
  require(den > 0.0, "conjugate Poisson kernel singular");
  return 2.0 * std::imag(z * std::conj(w)) / den;
}

/// Poisson extension of a measure on the closed disk,
/// int (1-|z|^2)/|1 - conj(z) w|^2 tau(dw); restricts to the boundary kernel.
inline double disk_poisson_2d_kernel(Complex z, Complex w) {
  const double den = std::norm(1.0 - std::conj(z) * w);
  require(den > 0.0, "Poisson extension kernel singular");
  return (1.0 - std::norm(z)) / den;
}

// ---------------------------------------------------------------------------
// Apply: finite sums against a density given by per-atom values
// ---------------------------------------------------------------------------

inline std::vector<Complex> apply_riesz(const Measure1D& sigma, const std::vector<double>& f,
                                        const std::vector<Point2>& points) {
  require(f.size() == sigma.size(), "one value per atom expected");
  std::vector<Complex> out(points.size(), Complex{0.0, 0.0});
  for (size_t j = 0; j < points.size(); ++j) {
    for (size_t i = 0; i < sigma.size(); ++i) {
      const auto& a = sigma.atoms()[i];
      if (f[i] == 0.0 || a.mass == 0.0) continue;
      const double d1 = points[j].x1 - a.position;
      if (d1 * d1 + points[j].x2 * points[j].x2 <= 0.0)
        throw std::domain_error("singular evaluation at atom index " + std::to_string(i));
      out[j] += riesz_kernel(points[j], a.position) * (f[i] * a.mass);
    }
  }
  return out;
}

/// Dual transform: values on the line from a weight on the half-plane.
inline std::vector<Complex> apply_riesz_dual(const Measure2D& tau, const std::vector<double>& g,
                                             const std::vector<double>& line_points) {
  require(g.size() == tau.size(), "one value per atom expected");
  std::vector<Complex> out(line_points.size(), Complex{0.0, 0.0});
  for (size_t j = 0; j < line_points.size(); ++j) {
    for (size_t i = 0; i < tau.size(); ++i) {
      const auto& a = tau.atoms()[i];
      if (g[i] == 0.0 || a.mass == 0.0) continue;
      const Point2 x{a.x1, a.x2};
      if (sq(a.x1 - line_points[j]) + a.x2 * a.x2 <= 0.0)
        throw std::domain_error("singular evaluation at atom index " + std::to_string(i));
      out[j] += riesz_kernel(x, line_points[j]) * (g[i] * a.mass);
    }
  }
  return out;
}

inline double apply_t_tau(const Measure2D& tau, const std::vector<double>& g, const Point2& x) {
  double s = 0.0;
  for (size_t i = 0; i < tau.size(); ++i)
    s += g[i] * tau.atoms()[i].mass * t_tau_kernel({tau.atoms()[i].x1, tau.atoms()[i].x2}, x);
  return s;
}

inline double t_tau_on_region(const Measure2D& tau, const Region::Ptr& r, const Point2& x) {
  double s = 0.0;
  for (const auto& a : tau.atoms())
    if (r->contains(Point2{a.x1, a.x2})) s += a.mass * t_tau_kernel({a.x1, a.x2}, x);
  return s;
}

inline double t_hat_on_region(const Measure2D& tau, const Region::Ptr& r, const Point2& x) {
  double s = 0.0;
  for (const auto& a : tau.atoms())
    if (r->contains(Point2{a.x1, a.x2})) s += a.mass * t_hat_kernel({a.x1, a.x2}, x);
  return s;
}

/// Poisson average P(f sigma, I) in the fixed bracketed form.
inline double poisson_avg(const Measure1D& sigma, const std::vector<double>& f, double a,
                          double b) {
  double s = 0.0;
  const double len = b - a;
  for (size_t i = 0; i < sigma.size(); ++i) {
    const auto& at = sigma.atoms()[i];
    s += f[i] * at.mass * poisson_profile(dist_to_interval(at.position, a, b), len);
  }
  return s;
}

inline double poisson_mass(const Measure1D& sigma, const Region::Ptr& where, double a, double b) {
  double s = 0.0;
  const double len = b - a;
  for (const auto& at : sigma.atoms())
    if (where->contains(at.position))
      s += at.mass * poisson_profile(dist_to_interval(at.position, a, b), len);
  return s;
}

/// Dual Poisson average of a planar weight against the Carleson cube over [a,b).
inline double poisson_mass_dual(const Measure2D& tau, const Region::Ptr& where, double a,
                                double b) {
  double s = 0.0;
  const double len = b - a;
  for (const auto& at : tau.atoms())
    if (where->contains(Point2{at.x1, at.x2}))
      s += at.mass * poisson_profile(dist_to_box({at.x1, at.x2}, a, b, 0.0, len), len);
  return s;
}

// ---------------------------------------------------------------------------
// Bilinear forms and the direct operator norm
// ---------------------------------------------------------------------------

inline Complex bilinear_form(const Measure1D& sigma, const std::vector<double>& f,
                             const Measure2D& tau, const std::vector<double>& g) {
  require(f.size() == sigma.size() && g.size() == tau.size(), "one value per atom expected");
  Complex s{0.0, 0.0};
  for (size_t j = 0; j < tau.size(); ++j) {
    const auto& x = tau.atoms()[j];
    if (g[j] == 0.0 || x.mass == 0.0) continue;
    Complex row{0.0, 0.0};
    for (size_t i = 0; i < sigma.size(); ++i) {
      const auto& t = sigma.atoms()[i];
      if (f[i] == 0.0 || t.mass == 0.0) continue;
      if (sq(x.x1 - t.position) + x.x2 * x.x2 <= 0.0)
        throw std::domain_error("singular coincidence between atoms " + std::to_string(j) + "," +
                                std::to_string(i));
      row += riesz_kernel({x.x1, x.x2}, t.position) * (f[i] * t.mass);
    }
    s += row * (g[j] * x.mass);
  }
  return s;
}

/// Mass-symmetrized kernel matrix D_tau^{1/2} K D_sigma^{1/2}; its largest
/// singular value is the L^2(sigma) -> L^2(tau) norm.
inline Eigen::MatrixXcd bilinear_matrix(const Measure1D& sigma, const Measure2D& tau) {
  Eigen::MatrixXcd M(tau.size(), sigma.size());
  for (size_t j = 0; j < tau.size(); ++j) {
    const auto& x = tau.atoms()[j];
    for (size_t i = 0; i < sigma.size(); ++i) {
      const auto& t = sigma.atoms()[i];
      if (x.mass == 0.0 || t.mass == 0.0) {
        M(j, i) = Complex{0.0, 0.0};
        continue;
      }
      if (sq(x.x1 - t.position) + x.x2 * x.x2 <= 0.0)
        throw std::domain_error("singular coincidence between atoms " + std::to_string(j) + "," +
                                std::to_string(i));
      M(j, i) = riesz_kernel({x.x1, x.x2}, t.position) * std::sqrt(x.mass * t.mass);
    }
  }
  return M;
}

struct NormReport {
  double norm = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct NormConvergenceError : std::runtime_error {
  double best_estimate;
  explicit NormConvergenceError(double best)
      : std::runtime_error("operator norm power iteration did not converge; best estimate " +
                           std::to_string(best)),
        best_estimate(best) {}
};

/// Largest singular value by power iteration on M^* M. With vector_kernel the
/// matrix acts on real densities and |.| is the Euclidean length of the two
/// kernel coordinates, which amounts to iterating Re(M^* M).
inline NormReport power_iteration_norm(const Eigen::MatrixXcd& M, double tol = 1e-10,
                                       bool vector_kernel = true, int max_iter = 20000) {
  require(tol > 0.0, "tolerance must be positive");
  NormReport rep;
  if (M.rows() == 0 || M.cols() == 0 || M.cwiseAbs().maxCoeff() == 0.0) return rep;
  const Eigen::Index n = M.cols();

  auto iterate = [&](Eigen::VectorXcd v, int budget, double& out_lambda, double& out_res,
                     int& used) {
    double lambda = 0.0, res = 0.0;
    v.normalize();
    for (used = 1; used <= budget; ++used) {
      Eigen::VectorXcd w = M.adjoint() * (M * v);
      if (vector_kernel) w = w.real().cast<Complex>();
      const double new_lambda = std::real(v.dot(w));
      const double wn = w.norm();
      if (wn == 0.0) {
        out_lambda = 0.0;
        out_res = 0.0;
        return true;
      }
      res = (w - new_lambda * v).norm() / wn;
      v = w / wn;
      const bool settled = std::abs(new_lambda - lambda) <= tol * std::max(new_lambda, 1e-300);
      lambda = new_lambda;
      if (settled && res <= std::sqrt(tol)) {
        out_lambda = lambda;
        out_res = res;
        return true;
      }
    }
    out_lambda = lambda;
    out_res = res;
    return false;
  };

  Eigen::VectorXcd v0 = Eigen::VectorXcd::Constant(n, Complex{1.0, 0.0});
  double lambda = 0.0, res = 0.0;
  int used = 0;
  bool ok = iterate(v0, max_iter, lambda, res, used);
  rep.iterations = used;
  if (!ok) {  // one random restart on stagnation
    Rng rng(0x5eedULL);
    Eigen::VectorXcd v1(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v1(i) = Complex{rng.uniform() - 0.5, vector_kernel ? 0.0 : rng.uniform() - 0.5};
    double lambda1 = 0.0, res1 = 0.0;
    int used1 = 0;
    ok = iterate(v1, max_iter, lambda1, res1, used1);
    rep.iterations += used1;
    if (lambda1 > lambda) {
      lambda = lambda1;
      res = res1;
    }
    if (!ok) throw NormConvergenceError(std::sqrt(std::max(lambda, 0.0)));
  }
  rep.norm = std::sqrt(std::max(lambda, 0.0));
  rep.residual = res;
  return rep;
}

inline NormReport operator_norm(const Measure1D& sigma, const Measure2D& tau, double tol = 1e-10) {
  if (sigma.size() == 0 || tau.size() == 0) return {};
  return power_iteration_norm(bilinear_matrix(sigma, tau), tol, /*vector_kernel=*/true);
}

inline nlohmann::json to_json(const NormReport& r) {
  return {{"norm", r.norm}, {"iterations", r.iterations}, {"residual", r.residual}};
}

}  // namespace tw
