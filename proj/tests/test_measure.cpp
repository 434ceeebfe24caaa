#include <catch2/catch_amalgamated.hpp>

#include "tw/measure.hpp"

using namespace tw;

TEST_CASE("mass on regions, half-open conventions") {
  Measure1D sigma(Domain1D::line, {{0.5, 1.0}});
  CHECK(total_mass_on(sigma, Region::interval(0.0, 1.0)) == 1.0);

  Measure1D edge(Domain1D::line, {{1.0, 1.0}});
  CHECK(total_mass_on(edge, Region::interval(0.0, 1.0)) == 0.0);  // right endpoint excluded

  Measure2D tau(Domain2D::half_plane, {{0.3, 0.25, 1.0}, {0.7, 0.25, 1.0}});
  CHECK(total_mass_on(tau, Region::carleson_cube(0.0, 1.0)) == 2.0);

  CHECK_THROWS(total_mass_on(sigma, Region::carleson_cube(0.0, 1.0)));
  CHECK(total_mass_on(sigma, Region::empty(1)) == 0.0);
}

TEST_CASE("restrict keeps masses and drops the rest") {
  Measure1D sigma(Domain1D::line, {{0.5, 1.0}, {1.5, 1.0}});
  auto r = restrict(sigma, Region::interval(0.0, 1.0));
  REQUIRE(r.size() == 1);
  CHECK(r.atoms()[0].position == 0.5);

  auto full = restrict(sigma, Region::all(1));
  CHECK(full.total_mass() == sigma.total_mass());
  CHECK(full.size() == sigma.size());

  Measure2D tau(Domain2D::half_plane, {{0.5, 0.5, 1.0}, {2.5, 0.5, 2.0}});
  auto outside = restrict(tau, Region::complement(Region::carleson_cube(0.0, 1.0)));
  REQUIRE(outside.size() == 1);
  CHECK(outside.atoms()[0].x1 == 2.5);
}

TEST_CASE("reweight") {
  Measure1D sigma(Domain1D::line, {{0.25, 2.0}, {0.75, 3.0}});
  auto same = reweight(sigma, [](double) { return 1.0; });
  CHECK(same.total_mass() == sigma.total_mass());
  auto zero = reweight(sigma, [](double) { return 0.0; });
  CHECK(zero.total_mass() == 0.0);
  CHECK_THROWS(reweight(sigma, [](double) { return -1.0; }));

  // |1 - theta(z)|^2 with theta(z) = z at the origin
  Measure2D mu(Domain2D::closed_disk, {{0.0, 0.0, 1.0}});
  auto nu = reweight(mu, [](const Point2& p) { return std::norm(Complex{1.0 - p.x1, -p.x2}); });
  CHECK(nu.total_mass() == Catch::Approx(1.0));
}

TEST_CASE("push-forward") {
  Measure2D tau(Domain2D::closed_disk, {{0.1, 0.2, 1.0}, {-0.4, 0.0, 2.0}});
  auto id = push_forward(tau, [](const Point2& p) { return p; });
  CHECK(id.total_mass() == tau.total_mass());
  CHECK(id.size() == tau.size());

  auto collapsed = push_forward(tau, [](const Point2&) { return Point2{0.25, 0.0}; });
  REQUIRE(collapsed.size() == 1);  // coincident images merge
  CHECK(collapsed.atoms()[0].mass == 3.0);

  // z -> z^2 sends i/2 to -1/4
  Measure2D m(Domain2D::closed_disk, {{0.0, 0.5, 1.0}});
  auto sq2 = push_forward(m, [](const Point2& p) {
    const Complex z{p.x1, p.x2}, w = z * z;
    return Point2{w.real(), w.imag()};
  });
  REQUIRE(sq2.size() == 1);
  CHECK(sq2.atoms()[0].x1 == Catch::Approx(-0.25));
  CHECK(sq2.atoms()[0].x2 == Catch::Approx(0.0).margin(1e-15));

  CHECK_THROWS(push_forward(tau, [](const Point2& p) { return Point2{p.x1 + 5.0, p.x2}; }));
}

TEST_CASE("finite additivity over random partitions") {
  Rng rng(7);
  std::vector<Atom1D> atoms;
  for (int i = 0; i < 40; ++i) atoms.push_back({rng.uniform(0.0, 4.0), rng.uniform()});
  Measure1D m(Domain1D::line, std::move(atoms));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> cuts{0.0, 4.0};
    for (int i = 0; i < 6; ++i) cuts.push_back(rng.uniform(0.0, 4.0));
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
      sum += total_mass_on(m, Region::interval(cuts[i], cuts[i + 1]));
    CHECK(sum == Catch::Approx(total_mass_on(m, Region::interval(0.0, 4.0))).epsilon(0).margin(1e-12));
  }
}

TEST_CASE("restrict composes with total mass") {
  Rng rng(11);
  std::vector<Atom2D> atoms;
  for (int i = 0; i < 30; ++i)
    atoms.push_back({rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), rng.uniform()});
  Measure2D m(Domain2D::half_plane, std::move(atoms));
  auto r = Region::carleson_cube(0.5, 1.5);
  CHECK(restrict(m, r).total_mass() == Catch::Approx(total_mass_on(m, r)));
}

TEST_CASE("duplicate atoms merge without changing masses") {
  Measure1D a(Domain1D::line, {{0.5, 1.0}, {0.5 + 1e-14, 2.0}, {0.75, 1.0}});
  CHECK(a.size() == 2);
  CHECK(a.total_mass() == 4.0);
  CHECK(total_mass_on(a, Region::interval(0.0, 0.6)) == 3.0);
}

TEST_CASE("measure json and csv round trips") {
  Measure2D tau(Domain2D::closed_disk, {{0.1, 0.2, 1.5}, {-0.3, 0.4, 0.5}});
  auto j = to_json(tau);
  auto back = measure2d_from_json(j);
  REQUIRE(back.size() == tau.size());
  CHECK(back.atoms()[0].mass == tau.atoms()[0].mass);

  std::stringstream csv("0.25,1.0\n0.75,2.0\n");
  auto m = measure1d_from_csv(csv);
  CHECK(m.total_mass() == 3.0);
}

TEST_CASE("circle measures normalize angles") {
  Measure1D s(Domain1D::circle, {{-0.5, 1.0}});
  CHECK(s.atoms()[0].position == Catch::Approx(2.0 * std::numbers::pi - 0.5));
  CHECK(total_mass_on(s, Region::arc(2.0 * std::numbers::pi - 1.0, 1.0)) == 1.0);
}

TEST_CASE("invariant violations throw") {
  CHECK_THROWS(Measure1D(Domain1D::line, {{0.0, -1.0}}));
  CHECK_THROWS(Measure2D(Domain2D::half_plane, {{0.0, -0.1, 1.0}}));
  CHECK_THROWS(Measure2D(Domain2D::closed_disk, {{1.2, 0.0, 1.0}}));
}
