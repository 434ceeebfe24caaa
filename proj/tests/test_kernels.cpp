#include <catch2/catch_amalgamated.hpp>

#include "tw/kernels.hpp"

using namespace tw;

TEST_CASE("riesz kernel values") {
  auto k1 = riesz_kernel({0.0, 1.0}, 0.0);
  CHECK(k1.real() == 0.0);
  CHECK(k1.imag() == 1.0);

  auto k2 = riesz_kernel({3.0, 4.0}, 0.0);
  CHECK(k2.real() == Catch::Approx(0.12));
  CHECK(k2.imag() == Catch::Approx(0.16));

  CHECK_THROWS(riesz_kernel({0.5, 0.0}, 0.5));
}

TEST_CASE("disk kernels and the CPQ identity") {
  const Complex w = unit_point(0.8);
  CHECK(disk_poisson_kernel({0.0, 0.0}, w) == Catch::Approx(1.0));
  CHECK(disk_conj_poisson_kernel({0.0, 0.0}, w) == Catch::Approx(0.0).margin(1e-15));

  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double rho = rng.uniform(0.0, 0.95);
    const double arg = rng.uniform(0.0, 6.28);
    const Complex z = rho * unit_point(arg);
    const Complex ww = unit_point(rng.uniform(0.0, 6.28));
    const Complex lhs = 2.0 / (1.0 - z * std::conj(ww));
    const Complex rhs =
        1.0 + Complex{disk_poisson_kernel(z, ww), disk_conj_poisson_kernel(z, ww)};
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("truncated kernel matches riesz in the annulus and vanishes outside") {
  const double alpha = 0.5, beta = 4.0;
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform(-1.0, 1.0);
    const Point2 x{rng.uniform(-6.0, 6.0), rng.uniform(0.0, 6.0)};
    const double rho = std::hypot(x.x1 - t, x.x2);
    if (rho <= 0.0) continue;
    const Complex kt = riesz_truncated_kernel(x, t, alpha, beta);
    if (rho > alpha && rho < beta) {
      CHECK(std::abs(kt - riesz_kernel(x, t)) == 0.0);
    } else if (rho < 0.5 * alpha || rho > 2.0 * beta) {
      CHECK(std::abs(kt) == 0.0);
    } else {
      CHECK(std::abs(kt) <= std::abs(riesz_kernel(x, t)) + 1e-15);
    }
  }
}

TEST_CASE("truncated kernel size and gradient bounds") {
  const double alpha = 0.25, beta = 2.0;
  Rng rng(11);
  const double h = 1e-5;
  double worst_size = 0.0, worst_grad = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double t = rng.uniform(-0.5, 0.5);
    const Point2 x{rng.uniform(-5.0, 5.0), rng.uniform(0.0, 5.0)};
    const double rho = std::hypot(x.x1 - t, x.x2);
    if (rho < 0.12 || std::abs(rho - 0.5 * alpha) < 0.01 || std::abs(rho - 2 * beta) < 0.01)
      continue;
    const Complex k = riesz_truncated_kernel(x, t, alpha, beta);
    if (rho >= 0.5 * alpha && rho <= 2.0 * beta) worst_size = std::max(worst_size, rho * std::abs(k));
    // central differences in x
    const Complex gx = (riesz_truncated_kernel({x.x1 + h, x.x2}, t, alpha, beta) -
                        riesz_truncated_kernel({x.x1 - h, x.x2}, t, alpha, beta)) /
                       (2 * h);
    const Complex gy = (riesz_truncated_kernel({x.x1, x.x2 + h}, t, alpha, beta) -
                        riesz_truncated_kernel({x.x1, x.x2 - h}, t, alpha, beta)) /
                       (2 * h);
    const double grad = std::sqrt(std::norm(gx) + std::norm(gy));
    if (rho >= 0.5 * alpha && rho <= 2.0 * beta) worst_grad = std::max(worst_grad, rho * rho * grad);
    if (rho < 0.5 * alpha - 0.02 || rho > 2.0 * beta + 0.02) CHECK(std::abs(k) == 0.0);
  }
  CHECK(worst_size <= 1.0 + 1e-9);
  CHECK(worst_grad <= 8.0);
}

TEST_CASE("riesz gradient bound by finite differences") {
  Rng rng(23);
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform(-1.0, 1.0);
    const Point2 x{rng.uniform(-4.0, 4.0), rng.uniform(0.1, 4.0)};
    const double rho = std::hypot(x.x1 - t, x.x2);
    if (rho < 0.2) continue;
    const Complex gx = (riesz_kernel({x.x1 + h, x.x2}, t) - riesz_kernel({x.x1 - h, x.x2}, t)) /
                       (2 * h);
    const Complex gy = (riesz_kernel({x.x1, x.x2 + h}, t) - riesz_kernel({x.x1, x.x2 - h}, t)) /
                       (2 * h);
    const double grad = std::sqrt(std::norm(gx) + std::norm(gy));
    CHECK(grad <= 4.0 / (rho * rho) * (1 + 1e-3));
  }
}

TEST_CASE("apply: worked instances") {
  // T_tau of a unit mass at (0,1) evaluated at (0,1)
  Measure2D tau(Domain2D::half_plane, {{0.0, 1.0, 1.0}});
  CHECK(apply_t_tau(tau, {1.0}, {0.0, 1.0}) == Catch::Approx(0.5));

  // Poisson average of a single atom at distance 1 from [0,1)
  Measure1D sigma(Domain1D::line, {{2.0, 1.0}});
  CHECK(poisson_avg(sigma, {1.0}, 0.0, 1.0) == Catch::Approx(0.25));

  // zero density
  Measure1D s2(Domain1D::line, {{0.25, 1.0}, {0.5, 2.0}});
  auto vals = apply_riesz(s2, {0.0, 0.0}, {{0.0, 1.0}, {3.0, 2.0}});
  for (const auto& v : vals) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("bilinear form values and Fubini") {
  Measure1D sigma(Domain1D::line, {{0.5, 1.0}});
  Measure2D tau(Domain2D::half_plane, {{0.5, 0.5, 1.0}});
  const Complex v = bilinear_form(sigma, {1.0}, tau, {1.0});
  CHECK(v.real() == Catch::Approx(0.0).margin(1e-15));
  CHECK(v.imag() == Catch::Approx(2.0));

  CHECK(std::abs(bilinear_form(sigma, {0.0}, tau, {1.0})) == 0.0);

  Rng rng(5);
  std::vector<Atom1D> sa;
  std::vector<Atom2D> ta;
  for (int i = 0; i < 12; ++i) sa.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.1, 1.0)});
  for (int i = 0; i < 9; ++i)
    ta.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.05, 1.0), rng.uniform(0.1, 1.0)});
  Measure1D s(Domain1D::line, std::move(sa));
  Measure2D t(Domain2D::half_plane, std::move(ta));
  std::vector<double> f, g;
  for (size_t i = 0; i < s.size(); ++i) f.push_back(rng.uniform(-1.0, 1.0));
  for (size_t i = 0; i < t.size(); ++i) g.push_back(rng.uniform(-1.0, 1.0));

  // <R_sigma f, g>_tau via apply equals the double sum
  std::vector<Point2> pts;
  for (const auto& a : t.atoms()) pts.push_back({a.x1, a.x2});
  auto rf = apply_riesz(s, f, pts);
  Complex lhs{0.0, 0.0};
  for (size_t j = 0; j < t.size(); ++j) lhs += rf[j] * g[j] * t.atoms()[j].mass;
  CHECK(std::abs(lhs - bilinear_form(s, f, t, g)) < 1e-12);
}

TEST_CASE("operator norm: rank one and scaling") {
  Measure1D s0(Domain1D::line, {{0.0, 1.0}});
  Measure2D t0(Domain2D::half_plane, {{0.0, 1.0, 1.0}});
  CHECK(operator_norm(s0, t0).norm == Catch::Approx(1.0));

  Measure1D s1(Domain1D::line, {{0.5, 1.0}});
  Measure2D t1(Domain2D::half_plane, {{0.5, 0.5, 1.0}});
  CHECK(operator_norm(s1, t1).norm == Catch::Approx(2.0));

  Measure2D t2(Domain2D::half_plane, {{0.5, 0.5, 2.0}});
  CHECK(operator_norm(s1, t2).norm == Catch::Approx(2.0 * std::sqrt(2.0)));
}

TEST_CASE("operator norm agrees with a dense SVD oracle") {
  Rng rng(19);
  for (int inst = 0; inst < 8; ++inst) {
    std::vector<Atom1D> sa;
    std::vector<Atom2D> ta;
    const int ns = rng.uniform_int(2, 12), nt = rng.uniform_int(2, 12);
    for (int i = 0; i < ns; ++i) sa.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.1, 1.0)});
    for (int i = 0; i < nt; ++i)
      ta.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.05, 2.0), rng.uniform(0.1, 1.0)});
    Measure1D s(Domain1D::line, std::move(sa));
    Measure2D t(Domain2D::half_plane, std::move(ta));

    const auto M = bilinear_matrix(s, t);
    // oracle: stack real and imaginary coordinate blocks, take sigma_max
    Eigen::MatrixXd B(2 * M.rows(), M.cols());
    B << M.real(), M.imag();
    const double oracle = B.jacobiSvd().singularValues()(0);
    CHECK(operator_norm(s, t).norm == Catch::Approx(oracle).epsilon(1e-7));
  }
}

TEST_CASE("operator norm duality and monotonicity") {
  Rng rng(29);
  std::vector<Atom1D> sa;
  std::vector<Atom2D> ta;
  for (int i = 0; i < 10; ++i) sa.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.1, 1.0)});
  for (int i = 0; i < 10; ++i)
    ta.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.05, 2.0), rng.uniform(0.1, 1.0)});
  Measure1D s(Domain1D::line, sa);
  Measure2D t(Domain2D::half_plane, ta);

  // duality: the transpose of the coordinate-stacked matrix has the same
  // largest singular value
  const auto M = bilinear_matrix(s, t);
  const auto direct = power_iteration_norm(M, 1e-12);
  Eigen::MatrixXd B(2 * M.rows(), M.cols());
  B << M.real(), M.imag();
  const double transposed = B.transpose().eval().jacobiSvd().singularValues()(0);
  CHECK(direct.norm == Catch::Approx(transposed).epsilon(1e-6));

  // adding atoms never decreases the norm
  auto ta_more = ta;
  ta_more.push_back({1.3, 0.4, 0.7});
  Measure2D t_more(Domain2D::half_plane, ta_more);
  CHECK(operator_norm(s, t_more).norm >= operator_norm(s, t).norm - 1e-9);
}

TEST_CASE("norm report serializes") {
  NormReport r{1.5, 12, 1e-12};
  auto j = to_json(r);
  CHECK(j.at("norm").get<double>() == 1.5);
  CHECK(j.at("iterations").get<int>() == 12);
}
