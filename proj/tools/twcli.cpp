// Command-line driver for the two-weight Cauchy transform toolkit.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tw/tw.hpp"

namespace {

tw::Measure1D load_measure1d(const std::string& path, tw::Domain1D fallback_domain) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    return tw::measure1d_from_csv(in, fallback_domain);
  nlohmann::json j;
  in >> j;
  return tw::measure1d_from_json(j);
}

tw::Measure2D load_measure2d(const std::string& path, tw::Domain2D fallback_domain) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    return tw::measure2d_from_csv(in, fallback_domain);
  nlohmann::json j;
  in >> j;
  return tw::measure2d_from_json(j);
}

struct GridFlags {
  double epsilon = 0.5;
  int r = 2;
  int kmin = -8;
  int kmax = 0;

  tw::GridParams params() const {
    tw::GridParams p;
    p.epsilon = epsilon;
    p.r = r;
    p.k_min = kmin;
    p.k_max = kmax;
    p.validate();
    return p;
  }
};

void add_grid_flags(CLI::App* app, GridFlags& g) {
  app->add_option("--epsilon", g.epsilon, "goodness exponent in (0,1)");
  app->add_option("--r", g.r, "goodness scale gap");
  app->add_option("--kmin", g.kmin, "finest scale exponent");
  app->add_option("--kmax", g.kmax, "coarsest scale exponent");
}

void emit(const nlohmann::json& j, const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir + "/" + name);
    f << j.dump(2) << '\n';
    std::cout << "wrote " << out_dir + "/" + name << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-weight Cauchy/Riesz transform toolkit"};
  app.require_subcommand(1);

  std::string sigma_path, tau_path, theta_path, config_path, out_dir;
  std::string format = "json";
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int n_shift = 8;
  int trials = 10000;
  GridFlags grid;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "rng seed");
    sub->add_option("--config", config_path, "config JSON file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "json|csv|both");
    sub->add_option("--tol", tol, "iteration tolerance");
  };

  auto* c_constants = app.add_subcommand("constants", "A2, testing and direct norm constants");
  c_constants->add_option("--sigma", sigma_path, "line measure file")->required();
  c_constants->add_option("--tau", tau_path, "half-plane measure file")->required();
  c_constants->add_option("--nshift", n_shift, "number of shifted grids in the family");
  add_grid_flags(c_constants, grid);
  add_common(c_constants);

  auto* c_norm = app.add_subcommand("norm", "direct operator norm report");
  c_norm->add_option("--sigma", sigma_path)->required();
  c_norm->add_option("--tau", tau_path)->required();
  add_common(c_norm);

  auto* c_energy = app.add_subcommand("energy", "energy inequality report on the root interval");
  c_energy->add_option("--sigma", sigma_path)->required();
  c_energy->add_option("--tau", tau_path)->required();
  std::string side = "I";
  c_energy->add_option("--side", side, "I or II");
  add_grid_flags(c_energy, grid);
  add_common(c_energy);

  auto* c_corona = app.add_subcommand("corona", "stopping tree and Carleson diagnostics");
  c_corona->add_option("--sigma", sigma_path)->required();
  c_corona->add_option("--tau", tau_path)->required();
  double c0 = 64.0;
  c_corona->add_option("--c0", c0, "energy stopping constant");
  add_grid_flags(c_corona, grid);
  add_common(c_corona);

  auto* c_grid = app.add_subcommand("grid-stats", "Monte Carlo badness frequency");
  c_grid->add_option("--trials", trials, "Monte Carlo trials");
  add_grid_flags(c_grid, grid);
  add_common(c_grid);

  auto* c_clark = app.add_subcommand("clark", "Clark measure of a finite Blaschke product");
  c_clark->add_option("--theta", theta_path, "inner function JSON file")->required();
  add_common(c_clark);

  auto* c_disk = app.add_subcommand("disk", "disk-side characterization constants");
  c_disk->add_option("--sigma", sigma_path, "circle measure file")->required();
  c_disk->add_option("--tau", tau_path, "disk measure file")->required();
  int z_samples = 128;
  int arc_depth = 9;
  c_disk->add_option("--samples", z_samples, "number of z samples");
  c_disk->add_option("--arc-depth", arc_depth, "finest arc subdivision level");
  c_disk->add_option("--nshift", n_shift, "number of rotated arc families");
  add_common(c_disk);

  auto* c_suite = app.add_subcommand("suite", "run the full verification suite");
  add_grid_flags(c_suite, grid);
  add_common(c_suite);
  int n_instances = 200;
  int max_atoms = 64;
  c_suite->add_option("--instances", n_instances, "reference suite size");
  c_suite->add_option("--max-atoms", max_atoms, "atom count cap per measure");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_constants) {
      auto sigma = load_measure1d(sigma_path, tw::Domain1D::line);
      auto tau = load_measure2d(tau_path, tw::Domain2D::half_plane);
      tw::ConstantsOptions opts{grid.params(), n_shift, seed, tol};
      auto rep = tw::compute_constants(sigma, tau, opts);
      emit(tw::to_json(rep), out_dir, "constants.json");
      if (format == "csv" || format == "both") {
        auto fam = tw::interval_family(sigma, tau, opts.params, opts.n_shift, opts.seed);
        auto stats = tw::per_interval_stats(sigma, tau, fam);
        std::ostringstream os;
        os << "grid,k,n,a,b,sigma_mass,tau_mass,a2_line,a2_plane,tf_sq,tb_sq\n";
        os.precision(12);
        for (const auto& s : stats)
          os << s.where.grid_id << ',' << s.where.iv.k << ',' << s.where.iv.n << ','
             << s.where.iv.a << ',' << s.where.iv.b << ',' << s.sigma_mass << ',' << s.tau_mass
             << ',' << s.a2_line << ',' << s.a2_plane << ',' << s.tf_sq << ',' << s.tb_sq
             << '\n';
        if (out_dir.empty()) {
          std::cout << os.str();
        } else {
          std::ofstream f(out_dir + "/constants_intervals.csv");
          f << os.str();
        }
      }
    } else if (*c_norm) {
      auto sigma = load_measure1d(sigma_path, tw::Domain1D::line);
      auto tau = load_measure2d(tau_path, tw::Domain2D::half_plane);
      emit(tw::to_json(tw::operator_norm(sigma, tau, tol)), out_dir, "norm.json");
    } else if (*c_energy) {
      auto sigma = load_measure1d(sigma_path, tw::Domain1D::line);
      auto tau = load_measure2d(tau_path, tw::Domain2D::half_plane);
      auto g = tw::standard_grid(grid.params());
      const auto root = g.interval(grid.kmax, 0);
      auto [l, r] = g.children(root);
      tw::ConstantsOptions opts{grid.params(), n_shift, seed, tol};
      auto consts = tw::compute_constants(sigma, tau, opts);
      auto rep = tw::energy_inequality_report(
          sigma, tau, g, root, {l, r},
          side == "II" ? tw::EnergySide::II : tw::EnergySide::I, consts.r_char);
      emit({{"lhs", rep.lhs},
            {"mass", rep.mass},
            {"r_char", rep.r_char},
            {"ratio", rep.ratio},
            {"infinite", rep.infinite}},
           out_dir, "energy.json");
    } else if (*c_corona) {
      auto sigma = load_measure1d(sigma_path, tw::Domain1D::line);
      auto tau = load_measure2d(tau_path, tw::Domain2D::half_plane);
      auto g = tw::standard_grid(grid.params());
      const auto root = g.interval(grid.kmax, 0);
      tw::ConstantsOptions opts{grid.params(), n_shift, seed, tol};
      auto consts = tw::compute_constants(sigma, tau, opts);
      tw::Rng rng(seed);
      std::vector<double> gv;
      for (size_t j = 0; j < tau.size(); ++j) gv.push_back(rng.uniform(-1.0, 1.0));
      auto tree = tw::build_stopping_tree(tw::StopSide::g_side, sigma, tau, gv, g, root, c0,
                                          consts.r_char);
      auto j = tw::to_json(tree);
      j["carleson_ratio"] = tw::carleson_ratio(tree, tau);
      emit(j, out_dir, "corona.json");
    } else if (*c_grid) {
      const double est = tw::estimate_pbad(grid.params(), trials, seed);
      emit({{"pbad", est},
            {"trials", trials},
            {"epsilon", grid.epsilon},
            {"r", grid.r},
            {"bound", 4.0 / grid.epsilon * std::pow(2.0, -grid.epsilon * grid.r)}},
           out_dir, "grid_stats.json");
    } else if (*c_clark) {
      std::ifstream in(theta_path);
      if (!in) throw std::runtime_error("cannot open " + theta_path);
      nlohmann::json tj;
      in >> tj;
      auto theta = tw::inner_from_json(tj);
      emit(tw::to_json(tw::clark_measure(theta)), out_dir, "clark.json");
    } else if (*c_disk) {
      auto sigma = load_measure1d(sigma_path, tw::Domain1D::circle);
      auto tau = load_measure2d(tau_path, tw::Domain2D::closed_disk);
      tw::Rng rng(seed);
      std::vector<tw::Complex> zs;
      for (int i = 0; i < z_samples; ++i)
        zs.push_back(rng.uniform(0.05, 0.95) * tw::unit_point(rng.uniform(0.0, 6.2831853)));
      auto rep =
          tw::disk_constants(sigma, tau, zs, tw::arc_family(arc_depth, n_shift, seed), tol);
      emit(tw::to_json(rep), out_dir, "disk.json");
    } else if (*c_suite) {
      tw::SuiteConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open " + config_path);
        nlohmann::json cj;
        in >> cj;
        cfg = tw::suite_config_from_json(cj);
      } else {
        cfg.params = grid.params();
        cfg.tol = tol;
      }
      if (c_suite->count("--seed")) cfg.seed = seed;
      if (c_suite->count("--instances")) cfg.n_instances = n_instances;
      if (c_suite->count("--max-atoms")) cfg.max_atoms = max_atoms;
      if (c_suite->count("--format")) cfg.format = format;
      if (!out_dir.empty()) cfg.out_dir = out_dir;

      auto rep = tw::run_suite(cfg);
      for (const auto& c : rep.criteria)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
      std::cout << "max N/R " << rep.max_ratio << " (instance " << rep.max_ratio_index
                << "), refined " << rep.max_ratio_refined << '\n';
      if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        tw::write_suite_outputs(rep, cfg.out_dir, cfg.format);
      }
      return rep.all_pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
