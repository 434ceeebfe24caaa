#include <catch2/catch_amalgamated.hpp>

#include "tw/haar.hpp"

using namespace tw;

namespace {
GridParams params(double eps, int r, int kmin, int kmax) {
  GridParams p;
  p.epsilon = eps;
  p.r = r;
  p.k_min = kmin;
  p.k_max = kmax;
  return p;
}

// atoms in distinct cells of width 2^(kmin+2), jittered off every lattice
Measure1D random_sigma(Rng& rng, int n_atoms, const GridParams& p, double lo = 0.0,
                       double hi = 1.0) {
  const double cell = std::ldexp(1.0, p.k_min + 2);
  const long n_cells = static_cast<long>((hi - lo) / cell);
  std::vector<long> cells;
  while (static_cast<int>(cells.size()) < n_atoms) {
    long c = rng.uniform_int(0, static_cast<int>(n_cells - 1));
    if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
  }
  std::vector<Atom1D> atoms;
  for (long c : cells)
    atoms.push_back({lo + (c + rng.uniform(0.3, 0.7)) * cell, rng.uniform(0.1, 1.0)});
  return Measure1D(Domain1D::line, std::move(atoms));
}
}  // namespace

TEST_CASE("haar function values") {
  auto p = params(0.5, 2, -4, 0);
  Grid g = standard_grid(p);
  auto I = g.interval(0, 0);

  Measure1D sym(Domain1D::line, {{0.3, 1.0}, {0.7, 1.0}});
  auto h = haar_function(sym, g, I);
  REQUIRE_FALSE(h.is_zero);
  CHECK(h.value_minus == Catch::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(h.value_plus == Catch::Approx(1.0 / std::sqrt(2.0)));
  const double norm_sq = sq(h(0.3)) * 1.0 + sq(h(0.7)) * 1.0;
  CHECK(norm_sq == Catch::Approx(1.0));

  Measure1D skew(Domain1D::line, {{0.3, 1.0}, {0.7, 3.0}});
  auto hs = haar_function(skew, g, I);
  CHECK(hs.value_minus == Catch::Approx(-std::sqrt(3.0) / 2.0));
  CHECK(hs.value_plus == Catch::Approx(1.0 / (2.0 * std::sqrt(3.0))));
  CHECK(sq(hs(0.3)) * 1.0 + sq(hs(0.7)) * 3.0 == Catch::Approx(1.0));
  CHECK(hs(0.3) * 1.0 + hs(0.7) * 3.0 == Catch::Approx(0.0).margin(1e-12));

  Measure1D single(Domain1D::line, {{0.3, 2.0}});
  CHECK(haar_function(single, g, I).is_zero);
}

TEST_CASE("analysis of constants and of a haar function") {
  auto p = params(0.5, 2, -6, 0);
  Grid g = standard_grid(p);
  Rng rng(31);
  Measure1D sigma = random_sigma(rng, 8, p);

  auto ones = analyze(sigma, std::vector<double>(sigma.size(), 1.0), g);
  for (const auto& [key, e] : ones.entries) CHECK(e.coeff == Catch::Approx(0.0).margin(1e-12));
  for (const auto& [n, m] : ones.root_means) CHECK(m == Catch::Approx(1.0));

  // expanding h_I itself gives a unit coefficient at I and zero elsewhere
  auto I = g.interval(-1, 0);
  auto h = haar_function(sigma, g, I);
  REQUIRE_FALSE(h.is_zero);
  std::vector<double> hv;
  for (const auto& a : sigma.atoms()) hv.push_back(h(a.position));
  auto ex = analyze(sigma, hv, g);
  for (const auto& [key, e] : ex.entries) {
    const double expect = (key.first == -1 && key.second == 0) ? 1.0 : 0.0;
    CHECK(e.coeff == Catch::Approx(expect).margin(1e-10));
  }
  for (const auto& [n, m] : ex.root_means) CHECK(m == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("parseval and reconstruction on random data") {
  auto p = params(0.5, 2, -7, 0);
  Rng rng(77);
  Measure1D sigma = random_sigma(rng, 16, p);
  Grid g = sample_grid(rng.next_u64(), p);
  REQUIRE(is_admissible(g, sigma, Measure2D(Domain2D::half_plane, {})));

  std::vector<double> f;
  double norm_sq = 0.0;
  for (const auto& a : sigma.atoms()) {
    f.push_back(rng.uniform(-2.0, 2.0));
    norm_sq += sq(f.back()) * a.mass;
  }
  auto ex = analyze(sigma, f, g);
  CHECK(ex.norm_sq() == Catch::Approx(norm_sq).epsilon(1e-10));

  auto back = synthesize(sigma, ex);
  for (size_t i = 0; i < f.size(); ++i) CHECK(back[i] == Catch::Approx(f[i]).margin(1e-10));
}

TEST_CASE("orthonormality and mean zero across a random instance") {
  auto p = params(0.5, 2, -6, 0);
  Rng rng(13);
  Measure1D sigma = random_sigma(rng, 10, p);
  Grid g = standard_grid(p);

  std::vector<HaarFunction> funcs;
  for (const auto& iv : intervals_meeting(g, 0.0, 1.0)) {
    if (iv.k == p.k_min) continue;
    auto h = haar_function(sigma, g, iv);
    if (!h.is_zero) funcs.push_back(h);
  }
  REQUIRE(funcs.size() >= 5);
  for (size_t i = 0; i < funcs.size(); ++i) {
    double mean = 0.0;
    for (const auto& a : sigma.atoms()) mean += funcs[i](a.position) * a.mass;
    CHECK(mean == Catch::Approx(0.0).margin(1e-12));
    for (size_t j = i; j < funcs.size(); ++j) {
      double ip = 0.0;
      for (const auto& a : sigma.atoms())
        ip += funcs[i](a.position) * funcs[j](a.position) * a.mass;
      CHECK(ip == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
    }
  }
}

TEST_CASE("martingale differences on cubes") {
  auto p = params(0.5, 2, -4, 0);
  Grid g = standard_grid(p);
  Measure2D tau(Domain2D::half_plane, {{0.2, 0.3, 1.0}, {0.8, 0.7, 1.0}});
  auto q = g.cube(0, 0, 0);

  auto d_const = martingale_difference_cube(tau, g, q, {3.0, 3.0});
  REQUIRE_FALSE(d_const.is_zero);
  for (int i = 0; i < 4; ++i)
    if (d_const.charged[i])
      CHECK(d_const.child_means[i] - d_const.parent_mean == Catch::Approx(0.0).margin(1e-12));

  // single charged child: zero by convention
  Measure2D lone(Domain2D::half_plane, {{0.2, 0.3, 1.0}});
  CHECK(martingale_difference_cube(lone, g, q, {5.0}).is_zero);

  auto d = martingale_difference_cube(tau, g, q, {0.0, 2.0});
  REQUIRE_FALSE(d.is_zero);
  CHECK(d.parent_mean == Catch::Approx(1.0));
  CHECK(d.value_at(g, {0.2, 0.3}) == Catch::Approx(-1.0));
  CHECK(d.value_at(g, {0.8, 0.7}) == Catch::Approx(1.0));

  // mean zero against tau
  double mean = 0.0;
  for (size_t i = 0; i < tau.size(); ++i)
    mean += d.value_at(g, {tau.atoms()[i].x1, tau.atoms()[i].x2}) * tau.atoms()[i].mass;
  CHECK(mean == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("cube expansion reconstructs and satisfies parseval") {
  auto p = params(0.5, 2, -5, 0);
  Grid g = standard_grid(p);
  Rng rng(41);
  const double cell = std::ldexp(1.0, p.k_min + 2);
  std::vector<Atom2D> atoms;
  for (int i = 0; i < 12; ++i) {
    const double x = (rng.uniform_int(0, 6) + rng.uniform(0.3, 0.7)) * cell;
    const double y = (rng.uniform_int(0, 6) + rng.uniform(0.3, 0.7)) * cell;
    atoms.push_back({x, y, rng.uniform(0.2, 1.0)});
  }
  Measure2D tau(Domain2D::half_plane, std::move(atoms));
  std::vector<double> gv;
  double norm_sq = 0.0;
  for (const auto& a : tau.atoms()) {
    gv.push_back(rng.uniform(-1.0, 1.0));
    norm_sq += sq(gv.back()) * a.mass;
  }
  auto ex = analyze_cubes(tau, gv, g);
  CHECK(ex.norm_sq() == Catch::Approx(norm_sq).epsilon(1e-10));
  auto back = synthesize_cubes(tau, ex);
  for (size_t i = 0; i < gv.size(); ++i) CHECK(back[i] == Catch::Approx(gv[i]).margin(1e-10));
}

TEST_CASE("good/bad split is an orthogonal decomposition") {
  auto p = params(0.25, 1, -7, 0);
  Rng rng(53);
  Measure1D sigma = random_sigma(rng, 12, p);
  Grid g = sample_grid(rng.next_u64(), p);
  std::vector<double> f;
  for (size_t i = 0; i < sigma.size(); ++i) f.push_back(rng.uniform(-1.0, 1.0));
  auto ex = analyze(sigma, f, g);
  auto [good, bad] = split_good_bad(ex);
  CHECK(good.norm_sq() + bad.norm_sq() == Catch::Approx(ex.norm_sq()).epsilon(1e-10));

  // parts sum back to the input
  auto gv = synthesize(sigma, good);
  auto bv = synthesize(sigma, bad);
  for (size_t i = 0; i < f.size(); ++i)
    CHECK(gv[i] + bv[i] == Catch::Approx(f[i]).margin(1e-10));
}

TEST_CASE("expected bad-projection mass obeys the epsilon-r bound") {
  auto p = params(0.25, 6, -10, 0);
  Rng rng(97);
  Measure1D sigma = random_sigma(rng, 12, p);
  std::vector<double> f;
  double norm_sq = 0.0;
  for (const auto& a : sigma.atoms()) {
    f.push_back(rng.uniform(-1.0, 1.0));
    norm_sq += sq(f.back()) * a.mass;
  }
  double acc = 0.0;
  const int n_grids = 200;
  for (int i = 0; i < n_grids; ++i) {
    Grid g = sample_grid(rng.next_u64(), p);
    auto [good, bad] = split_good_bad(analyze(sigma, f, g));
    acc += bad.norm_sq();
  }
  const double bound = 8.0 / p.epsilon * std::pow(2.0, -p.epsilon * p.r) * norm_sq;
  CHECK(acc / n_grids <= bound);
}
