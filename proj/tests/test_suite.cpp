#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>

#include "tw/suite.hpp"

using namespace tw;

namespace {
SuiteConfig small_config() {
  SuiteConfig cfg;
  cfg.params = GridParams{0.5, 2, -8, 0};
  cfg.seed = 42;
  cfg.n_instances = 8;
  cfg.max_atoms = 16;
  cfg.n_shift = 2;
  cfg.pbad_trials = 2000;
  return cfg;
}
}  // namespace

TEST_CASE("verify_instance on the rank-one pair") {
  SuiteConfig cfg = small_config();
  Instance inst;
  inst.family = InstanceFamily::nested;
  inst.sigma = Measure1D(Domain1D::line, {{0.5 + 1e-5, 1.0}});  // off the lattice
  inst.tau = Measure2D(Domain2D::half_plane, {{0.5 + 1e-5, 0.5 + 1e-5, 1.0}});
  auto v = verify_instance(cfg, inst, 0);
  REQUIRE_FALSE(v.flagged);
  CHECK(v.consts.n_direct == Catch::Approx(2.0).epsilon(1e-4));
  CHECK(v.consts.t_forward == Catch::Approx(2.0).epsilon(1e-4));
  CHECK(v.consts.t_backward == Catch::Approx(2.0).epsilon(1e-4));
  CHECK(v.ratio <= 1.0);
  CHECK(v.necessity_ok);
}

TEST_CASE("verify_instance with empty tau") {
  SuiteConfig cfg = small_config();
  Instance inst;
  inst.family = InstanceFamily::well_separated;
  inst.sigma = Measure1D(Domain1D::line, {{0.3, 1.0}});
  inst.tau = Measure2D(Domain2D::half_plane, {});
  auto v = verify_instance(cfg, inst, 1);
  REQUIRE_FALSE(v.flagged);
  CHECK(v.consts.n_direct == 0.0);
  CHECK(v.consts.a2 == 0.0);
  CHECK(v.ratio == 0.0);
  CHECK(v.necessity_ok);
}

TEST_CASE("a 64-atom instance verifies quickly") {
  SuiteConfig cfg = small_config();
  auto inst = make_instance(InstanceFamily::lebesgue, 64, 64, cfg.params, 7);
  const auto t0 = std::chrono::steady_clock::now();
  auto v = verify_instance(cfg, inst, 2);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE_FALSE(v.flagged);
  CHECK(secs < 2.0);
  CHECK(v.necessity_ok);
}

TEST_CASE("reference instances are deterministic in the seed") {
  SuiteConfig cfg = small_config();
  auto a = reference_instance(cfg, 3);
  auto b = reference_instance(cfg, 3);
  REQUIRE(a.sigma.size() == b.sigma.size());
  for (size_t i = 0; i < a.sigma.size(); ++i)
    CHECK(a.sigma.atoms()[i].position == b.sigma.atoms()[i].position);
}

TEST_CASE("suite reports are byte-identical under a fixed seed") {
  SuiteConfig cfg = small_config();
  cfg.n_instances = 4;
  auto r1 = run_suite(cfg);
  auto r2 = run_suite(cfg);
  CHECK(to_json(r1).dump() == to_json(r2).dump());
  CHECK(suite_csv(r1) == suite_csv(r2));
}

TEST_CASE("zero tolerance flags deterministic failures") {
  SuiteConfig cfg = small_config();
  cfg.n_instances = 2;
  cfg.tol = 0.0;  // power iteration demands a positive tolerance
  auto rep = run_suite(cfg);
  CHECK_FALSE(rep.all_pass);
  bool some_flag = false;
  for (const auto& v : rep.verdicts)
    if (v.flagged) some_flag = true;
  for (const auto& c : rep.criteria)
    if (!c.pass) some_flag = true;
  CHECK(some_flag);
}

TEST_CASE("suite outputs land in the requested directory") {
  SuiteConfig cfg = small_config();
  cfg.n_instances = 2;
  cfg.format = "both";
  auto rep = run_suite(cfg);
  const std::string dir = "suite_test_out";
  std::filesystem::create_directories(dir);
  write_suite_outputs(rep, dir, cfg.format);
  CHECK(std::filesystem::exists(dir + "/suite_report.json"));
  CHECK(std::filesystem::exists(dir + "/suite_report.csv"));
  CHECK(std::filesystem::exists(dir + "/timings.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("config json round trip") {
  SuiteConfig cfg = small_config();
  cfg.c0 = 32.0;
  auto j = to_json(cfg);
  auto back = suite_config_from_json(j);
  CHECK(back.c0 == 32.0);
  CHECK(back.params.k_min == cfg.params.k_min);
  CHECK(back.seed == cfg.seed);
}
