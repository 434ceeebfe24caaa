#include <catch2/catch_amalgamated.hpp>

#include "tw/constants.hpp"
#include "tw/instances.hpp"

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
}  // namespace

TEST_CASE("a2 products on worked instances") {
  Measure1D sigma(Domain1D::line, {{2.0, 1.0}});
  Measure2D tau(Domain2D::half_plane, {{0.5, 0.5, 1.0}});
  CHECK(a2_product_line(sigma, tau, 0.0, 1.0) == Catch::Approx(0.25));
  CHECK(a2_product_plane(sigma, tau, 0.0, 1.0) == 0.0);  // sigma(I) = 0

  Measure2D none(Domain2D::half_plane, {});
  ConstantsOptions opts{params(0.5, 2, -6, 2), 2, 9, 1e-10};
  auto rep = compute_constants(sigma, none, opts);
  CHECK(rep.a2 == 0.0);
  CHECK(rep.t_forward == 0.0);
  CHECK(rep.n_direct == 0.0);
}

TEST_CASE("testing constants on the rank-one instance") {
  Measure1D sigma(Domain1D::line, {{0.5, 1.0}});
  Measure2D tau(Domain2D::half_plane, {{0.5, 0.5, 1.0}});
  CHECK(std::sqrt(forward_testing_sq(sigma, tau, 0.0, 1.0)) == Catch::Approx(2.0));
  CHECK(std::sqrt(backward_testing_sq(sigma, tau, 0.0, 1.0)) == Catch::Approx(2.0));

  ConstantsOptions opts{params(0.5, 2, -6, 2), 4, 3, 1e-10};
  auto rep = compute_constants(sigma, tau, opts);
  CHECK(rep.t_forward <= rep.n_direct + 1e-9);
  CHECK(rep.t_backward <= rep.n_direct + 1e-9);
  CHECK(rep.n_direct == Catch::Approx(2.0));
  CHECK(rep.r_char == Catch::Approx(std::sqrt(rep.a2) + rep.testing()));
}

TEST_CASE("energy on the line") {
  auto p = params(0.5, 2, -6, 0);
  Grid g = standard_grid(p);
  auto I = g.interval(0, 0);

  Measure1D single(Domain1D::line, {{0.3, 2.0}});
  CHECK(energy_line(single, g, I) == 0.0);

  Measure1D pair(Domain1D::line, {{0.3, 1.0}, {0.7, 1.0}});
  CHECK(energy_line(pair, g, I) == Catch::Approx(0.2));

  // translation invariance (mean-zero Haar makes the coefficient central)
  Measure1D shifted(Domain1D::line, {{4.3, 1.0}, {4.7, 1.0}});
  CHECK(energy_line(shifted, g, g.interval(0, 4)) == Catch::Approx(0.2));

  // sweep: energies stay below the absolute bound
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    auto inst = make_instance(InstanceFamily::nested, 8, 4, p, rng.next_u64());
    worst = std::max(worst, energy_line(inst.sigma, g, I));
  }
  CHECK(worst <= 1.001);
  CHECK(worst > 0.0);
}

TEST_CASE("energy in the plane") {
  Measure2D single(Domain2D::half_plane, {{0.4, 0.2, 3.0}});
  CHECK(energy_plane(single, 0.0, 1.0) == 0.0);

  Measure2D pair(Domain2D::half_plane, {{0.3, 0.25, 1.0}, {0.7, 0.25, 1.0}});
  CHECK(energy_plane(pair, 0.0, 1.0) == Catch::Approx(0.2));

  Measure2D moved(Domain2D::half_plane, {{2.3, 0.25, 1.0}, {2.7, 0.25, 1.0}});
  CHECK(energy_plane(moved, 2.0, 3.0) == Catch::Approx(0.2));
}

TEST_CASE("energy inequality reports") {
  auto p = params(0.5, 2, -8, 0);
  Grid g = standard_grid(p);
  auto root = g.interval(0, 0);
  auto [l, r] = g.children(root);
  std::vector<DyadicInterval> partition{l, r};

  Measure1D single(Domain1D::line, {{0.3, 1.0}});
  Measure2D tau(Domain2D::half_plane, {{0.6, 0.1, 1.0}});
  auto rep0 = energy_inequality_report(single, tau, g, root, partition, EnergySide::I, 1.0);
  CHECK(rep0.lhs == 0.0);
  CHECK(rep0.ratio == 0.0);

  Measure2D lone(Domain2D::half_plane, {{0.3, 0.05, 1.0}});
  Measure1D sigma2(Domain1D::line, {{0.1, 1.0}, {0.9, 1.0}});
  auto rep1 = energy_inequality_report(sigma2, lone, g, root, partition, EnergySide::II, 1.0);
  CHECK(rep1.lhs == 0.0);  // single atom per Whitney cube: plane energies vanish

  Rng rng(11);
  auto inst = make_instance(InstanceFamily::nested, 16, 16, p, rng.next_u64());
  ConstantsOptions opts{p, 2, 17, 1e-8};
  auto consts = compute_constants(inst.sigma, inst.tau, opts);
  auto repI = energy_inequality_report(inst.sigma, inst.tau, g, root, partition, EnergySide::I,
                                       consts.r_char);
  CHECK(std::isfinite(repI.ratio));
  CHECK(repI.ratio >= 0.0);
  CHECK_FALSE(repI.infinite);

  // one dyadic refinement of the partition moves the ratio by less than x2
  std::vector<DyadicInterval> finer;
  for (const auto& iv : partition) {
    auto [a, b] = g.children(iv);
    finer.push_back(a);
    finer.push_back(b);
  }
  auto repI2 = energy_inequality_report(inst.sigma, inst.tau, g, root, finer, EnergySide::I,
                                        consts.r_char);
  if (repI.ratio > 0.0 && repI2.ratio > 0.0) {
    const double q = repI2.ratio / repI.ratio;
    CHECK(q < 2.0);
    CHECK(q > 0.5);
  }
}

TEST_CASE("v region membership and bounded overlap") {
  auto m1 = v_region_tools(0.0, 1.0, {0.5, 0.1});
  CHECK(m1.in_v);
  auto m2 = v_region_tools(0.0, 1.0, {2.0, 0.5});
  CHECK_FALSE(m2.in_v);

  // bottom piece lives outside the Carleson cube below an eighth of the height
  auto m3 = v_region_tools(0.0, 1.0, {1.05, 0.1});
  CHECK(m3.in_v);
  CHECK(m3.in_bottom);
  CHECK_FALSE(m3.in_top);

  Rng rng(23);
  Grid g = standard_grid(params(0.5, 2, -8, 0));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DyadicInterval> part;
    std::vector<DyadicInterval> stack{g.interval(0, 0)};
    while (!stack.empty()) {
      auto iv = stack.back();
      stack.pop_back();
      if (iv.k > -6 && rng.uniform() < 0.45) {
        auto [a, b] = g.children(iv);
        stack.push_back(a);
        stack.push_back(b);
      } else {
        part.push_back(iv);
      }
    }
    std::vector<Point2> samples;
    for (int i = 0; i < 500; ++i)
      samples.push_back({rng.uniform(-0.2, 1.2), rng.uniform(1e-4, 0.3)});
    CHECK(overlap_max(part, samples) <= 2);
  }
}

namespace {
MonoConfig mono_config(Rng& rng) {
  auto p = params(0.5, 2, -4, 4);
  MonoConfig cfg;
  cfg.grid = standard_grid(p);
  cfg.J = cfg.grid.interval(0, 0);            // [0,1)
  cfg.I = DyadicInterval{4, 0, -16.0, 16.0};  // contains 10*J
  cfg.Jp = cfg.J;

  std::vector<Atom1D> sa;
  for (double t : detail::separated_positions(rng, 4, p, 0.0, 1.0))
    sa.push_back({t, rng.uniform(0.3, 1.0)});
  cfg.sigma = Measure1D(Domain1D::line, std::move(sa));

  std::vector<Atom2D> ta;
  const int nt = rng.uniform_int(1, 4);
  for (int i = 0; i < nt; ++i) {
    const double side = rng.bit() ? 1.0 : -1.0;
    const double d = rng.uniform(0.5, 32.0);
    const double x1 = side > 0 ? 16.0 + d : -16.0 - d;
    const double x2 = rng.uniform(0.05, 0.95) * d;  // off V_I
    ta.push_back({x1, x2, rng.uniform(0.2, 1.0)});
  }
  cfg.tau = Measure2D(Domain2D::half_plane, std::move(ta));
  cfg.phi.assign(cfg.tau.size(), 0.0);
  for (auto& v : cfg.phi) v = rng.uniform(0.1, 1.0);
  return cfg;
}
}  // namespace

TEST_CASE("monotonicity part I") {
  Rng rng(31);

  // phi == 0 gives all zero functionals
  auto cfg0 = mono_config(rng);
  std::fill(cfg0.phi.begin(), cfg0.phi.end(), 0.0);
  auto rep0 = monotonicity_report_I(cfg0);
  CHECK(rep0.equiv_ratio_low == 0.0);
  CHECK(rep0.mono_ratio == 0.0);

  // support violations are reported by hypothesis
  auto bad = mono_config(rng);
  bad.tau = Measure2D(Domain2D::half_plane, {{0.5, 0.2, 1.0}});  // inside V_I and Q_I
  bad.phi = {1.0};
  CHECK_THROWS_WITH(monotonicity_report_I(bad), Catch::Matchers::ContainsSubstring("hypothesis"));

  // two-sided comparability on the constrained family
  double lo = 1e9, hi = 0.0;
  int used = 0;
  for (int i = 0; i < 200; ++i) {
    auto cfg = mono_config(rng);
    auto rep = monotonicity_report_I(cfg);
    if (rep.equiv_ratio_low > 0.0) {
      lo = std::min(lo, rep.equiv_ratio_low);
      hi = std::max(hi, rep.equiv_ratio_low);
      ++used;
    }
  }
  REQUIRE(used > 100);
  CHECK(lo >= 1.0 / 64.0);
  CHECK(hi <= 64.0);
}

TEST_CASE("pointwise minorant of the kernel difference") {
  Rng rng(37);
  DyadicInterval J{0, 0, 0.0, 1.0};
  double min_ratio = 1e9;
  int counted = 0;
  for (int i = 0; i < 10000; ++i) {
    const double t = rng.uniform(0.0, 1.0);
    const double side = rng.bit() ? 1.0 : -1.0;
    const double d = rng.uniform(0.01, 32.0);     // distance beyond I = [-16, 16)
    const double x1 = side * (16.0 + d);
    const double x2 = rng.uniform(0.0, 1.0) * d;  // stays off V_I
    const double ratio = bigger_ratio(J, t, {x1, x2});
    if (!std::isfinite(ratio)) continue;
    min_ratio = std::min(min_ratio, ratio);
    ++counted;
  }
  REQUIRE(counted > 9000);
  CHECK(min_ratio >= 0.0);         // sign inequality
  CHECK(min_ratio >= 1.0 / 64.0);  // calibrated constant on this family
}

TEST_CASE("monotonicity part II") {
  Rng rng(41);
  double up_hi = 0.0, low_hi = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto p = params(0.5, 2, -4, 4);
    MonoConfig cfg;
    cfg.grid = standard_grid(p);
    cfg.J = cfg.grid.interval(0, 0);
    cfg.I = DyadicInterval{4, 0, -16.0, 16.0};
    std::vector<Atom1D> sa;  // f nonnegative, supported off I
    const int ns = rng.uniform_int(2, 5);
    for (int j = 0; j < ns; ++j) {
      const double side = rng.bit() ? 1.0 : -1.0;
      sa.push_back({side * (16.0 + rng.uniform(0.1, 30.0)), rng.uniform(0.2, 1.0)});
    }
    cfg.sigma = Measure1D(Domain1D::line, std::move(sa));
    cfg.f.assign(cfg.sigma.size(), 0.0);
    for (auto& v : cfg.f) v = rng.uniform(0.1, 1.0);
    std::vector<Atom2D> ta;  // tau inside Q_J
    const int nt = rng.uniform_int(2, 6);
    for (int j = 0; j < nt; ++j)
      ta.push_back({rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.2, 1.0)});
    cfg.tau = Measure2D(Domain2D::half_plane, std::move(ta));

    auto rep = monotonicity_report_II(cfg);
    up_hi = std::max(up_hi, rep.upper_ratio);
    low_hi = std::max(low_hi, rep.lower_ratio);
  }
  CHECK(up_hi <= 16.0);   // implementation constant for the upper display
  CHECK(low_hi <= 16.0);  // implementation constant for the reversed display
  CHECK(up_hi > 0.0);
  CHECK(low_hi > 0.0);
}

TEST_CASE("two weight hardy") {
  Measure1D w(Domain1D::line, {{2.0, 1.0}});
  Measure1D s(Domain1D::line, {{1.0, 1.0}});
  auto rep = hardy(w, s);
  CHECK(rep.b == Catch::Approx(1.0));
  CHECK(rep.direct_norm == Catch::Approx(1.0));

  Measure1D empty(Domain1D::line, {});
  auto rep0 = hardy(w, empty);
  CHECK(rep0.b == 0.0);
  CHECK(rep0.direct_norm == 0.0);

  CHECK_THROWS(hardy(Measure1D(Domain1D::line, {{0.0, 1.0}}), s));

  Rng rng(47);
  for (int i = 0; i < 30; ++i) {
    std::vector<Atom1D> wa, sa;
    for (int j = 0; j < 16; ++j) {
      wa.push_back({rng.uniform(0.01, 4.0), rng.uniform(0.1, 1.0)});
      sa.push_back({rng.uniform(0.01, 4.0), rng.uniform(0.1, 1.0)});
    }
    auto r = hardy(Measure1D(Domain1D::line, std::move(wa)),
                   Measure1D(Domain1D::line, std::move(sa)));
    CHECK(r.direct_norm >= r.b - 1e-9);
    CHECK(r.direct_norm <= 4.0 * r.b);
  }
}

TEST_CASE("weak boundedness ratio") {
  Measure1D nothing(Domain1D::line, {{5.0, 1.0}});
  Measure2D tau(Domain2D::half_plane, {{1.5, 0.5, 1.0}});
  CHECK(weak_boundedness_ratio(nothing, tau, 0.0, 1.0, 1.0, 2.0, 1.0) == 0.0);

  // rank-one: kernel modulus times root masses over sqrt(a2)
  Measure1D sigma(Domain1D::line, {{0.5, 2.0}});
  const double expect =
      std::abs(riesz_kernel({1.5, 0.5}, 0.5)) * std::sqrt(2.0) / std::sqrt(0.7);
  CHECK(weak_boundedness_ratio(sigma, tau, 0.0, 1.0, 1.0, 2.0, 0.7) == Catch::Approx(expect));

  CHECK_THROWS(weak_boundedness_ratio(sigma, tau, 0.0, 1.5, 1.0, 2.0, 1.0));

  // sweep against the pinned bound
  Rng rng(53);
  auto p = params(0.5, 2, -6, 1);
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    auto inst = make_instance(InstanceFamily::nested, 8, 8, p, rng.next_u64());
    ConstantsOptions opts{p, 2, rng.next_u64(), 1e-8};
    auto consts = compute_constants(inst.sigma, inst.tau, opts);
    if (consts.a2 <= 0.0) continue;
    const double r = weak_boundedness_ratio(inst.sigma, inst.tau, -1.0, 0.5, 0.5, 1.5,
                                            consts.a2);
    worst = std::max(worst, r);
  }
  CHECK(worst <= 32.0);
}

TEST_CASE("constants report serializes") {
  Measure1D sigma(Domain1D::line, {{0.5, 1.0}});
  Measure2D tau(Domain2D::half_plane, {{0.5, 0.5, 1.0}});
  ConstantsOptions opts{params(0.5, 2, -4, 2), 2, 5, 1e-10};
  auto rep = compute_constants(sigma, tau, opts);
  auto j = to_json(rep);
  CHECK(j.at("n_direct").get<double>() == Catch::Approx(2.0));
  CHECK(j.at("a2_witness").contains("a"));
}
