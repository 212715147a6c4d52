// Command-line front end: one subcommand per experiment plus `report`.
// Settings come from layered sources - built-in defaults, then a JSON config
// file, then the BERGLAB_OUT environment variable, then flags.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "berglab/experiments.hpp"
#include "berglab/report.hpp"

namespace {

using berglab::Scalar;
using berglab::experiments::ExperimentConfig;
using berglab::weights::WeightSpec;

WeightSpec weight_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  auto num = [&j](const char* key, Scalar fallback) {
    return j.contains(key) ? j.at(key).get<Scalar>() : fallback;
  };
  for (const auto& [key, _] : j.items())
    if (key != "family" && key != "alpha" && key != "A" && key != "B" &&
        key != "kappa" && key != "m")
      throw std::invalid_argument("unknown weight key '" + key + "'");
  if (family == "exp_disk") return WeightSpec::exp_disk(num("alpha", 1.0));
  if (family == "gen_exp_disk")
    return WeightSpec::gen_exp_disk(num("A", 1.0), num("B", 1.0), num("kappa", 1.0));
  if (family == "triple_exp_disk") return WeightSpec::triple_exp_disk();
  if (family == "fock_monomial") return WeightSpec::fock_monomial(num("m", 2.0));
  if (family == "fock_gaussian") return WeightSpec::fock_gaussian();
  throw std::invalid_argument("unknown weight family '" + family + "'");
}

void apply_json(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  nlohmann::json j;
  in >> j;
  for (const auto& [key, val] : j.items()) {
    if (key == "experiment") {
      if (val.get<std::string>() != cfg.experiment)
        throw std::invalid_argument("config file is for experiment '" +
                                    val.get<std::string>() + "'");
    } else if (key == "weight") {
      cfg.weight = weight_from_json(val);
    } else if (key == "output_dir") {
      cfg.output_dir = val.get<std::string>();
    } else if (key == "seed") {
      cfg.seed = val.get<std::uint64_t>();
    } else if (key == "tol") {
      cfg.tol = val.get<Scalar>();
    } else if (key == "kernel_n_max") {
      cfg.kernel_n_max = val.get<long>();
    } else if (key == "fock_n_max") {
      cfg.fock_n_max = val.get<long>();
    } else if (key == "n_radial") {
      cfg.n_radial = val.get<int>();
    } else if (key == "u_max") {
      cfg.u_max = val.get<Scalar>();
    } else if (key == "iterations") {
      cfg.iterations = val.get<int>();
    } else if (key == "deriv_max") {
      cfg.deriv_max = val.get<int>();
    } else if (key == "vn_lo") {
      cfg.vn_lo = val.get<int>();
    } else if (key == "vn_hi") {
      cfg.vn_hi = val.get<int>();
    } else if (key == "pair_count") {
      cfg.pair_count = val.get<int>();
    } else if (key == "eta") {
      cfg.eta = val.get<Scalar>();
    } else if (key == "p_values") {
      cfg.p_values = val.get<std::vector<Scalar>>();
    } else if (key == "resolutions") {
      cfg.resolutions = val.get<std::vector<int>>();
    } else if (key == "r_grid") {
      cfg.r_grid = val.get<std::vector<Scalar>>();
    } else if (key == "lambda_grid") {
      cfg.lambda_grid = val.get<std::vector<Scalar>>();
    } else if (key == "t_grid") {
      cfg.t_grid = val.get<std::vector<Scalar>>();
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

// flag values parked here; only flags the user actually passed are applied
struct Flags {
  std::string config, out, weight_family;
  std::uint64_t seed = 0;
  Scalar alpha = 1, m = 2, tol = 0, u_max = 0, eta = 0;
  long kernel_n_max = 0, fock_n_max = 0;
  int n_radial = 0, iterations = 0, deriv_max = 0, vn_lo = 0, vn_hi = 0,
      pair_count = 0;
  std::vector<Scalar> p_values, r_grid, lambda_grid, t_grid;
  std::vector<int> resolutions;
};

int run_experiment(const std::string& tag, const Flags& f, const CLI::App* sub) {
  ExperimentConfig cfg = berglab::experiments::default_config(tag);
  if (sub->count("--config")) apply_json(cfg, f.config);
  if (const char* env = std::getenv("BERGLAB_OUT"); env && *env)
    cfg.output_dir = env;
  auto given = [sub](const char* name) { return sub->count(name) > 0; };
  if (given("--out")) cfg.output_dir = f.out;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--weight")) {
    nlohmann::json j = {{"family", f.weight_family}};
    if (given("--alpha")) j["alpha"] = f.alpha;
    if (given("--m")) j["m"] = f.m;
    cfg.weight = weight_from_json(j);
  } else if (given("--alpha")) {
    cfg.weight = WeightSpec::exp_disk(f.alpha);
  }
  if (given("--tol")) cfg.tol = f.tol;
  if (given("--kernel-n-max")) cfg.kernel_n_max = f.kernel_n_max;
  if (given("--fock-n-max")) cfg.fock_n_max = f.fock_n_max;
  if (given("--n-radial")) cfg.n_radial = f.n_radial;
  if (given("--u-max")) cfg.u_max = f.u_max;
  if (given("--iterations")) cfg.iterations = f.iterations;
  if (given("--deriv-max")) cfg.deriv_max = f.deriv_max;
  if (given("--vn-lo")) cfg.vn_lo = f.vn_lo;
  if (given("--vn-hi")) cfg.vn_hi = f.vn_hi;
  if (given("--pairs")) cfg.pair_count = f.pair_count;
  if (given("--eta")) cfg.eta = f.eta;
  if (given("--p")) cfg.p_values = f.p_values;
  if (given("--resolutions")) cfg.resolutions = f.resolutions;
  if (given("--r-grid")) cfg.r_grid = f.r_grid;
  if (given("--lambda-grid")) cfg.lambda_grid = f.lambda_grid;
  if (given("--t-grid")) cfg.t_grid = f.t_grid;

  const auto result = berglab::experiments::run(cfg);
  for (const auto& file : result.files) std::cout << "wrote " << file << "\n";
  if (!result.ok()) {
    std::cerr << "error in " << result.failed_op << ": " << result.error << "\n";
    if (!result.files.empty())
      std::cerr << "partial results above were kept\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical experiments on weighted Bergman-type projections"};
  app.require_subcommand(1);
  app.set_version_flag("--version", berglab::report::kToolVersion);

  Flags flags;
  std::string chosen;
  for (const std::string& tag : berglab::experiments::experiment_tags()) {
    CLI::App* sub = app.add_subcommand(tag, "run the " + tag + " experiment");
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--weight", flags.weight_family,
                    "weight family (exp_disk, gen_exp_disk, triple_exp_disk, "
                    "fock_monomial, fock_gaussian)");
    sub->add_option("--alpha", flags.alpha, "exponential weight strength");
    sub->add_option("--m", flags.m, "monomial exponent for fock_monomial");
    sub->add_option("--tol", flags.tol, "quadrature tolerance");
    sub->add_option("--kernel-n-max", flags.kernel_n_max, "disk kernel model size");
    sub->add_option("--fock-n-max", flags.fock_n_max, "plane kernel model size");
    sub->add_option("--n-radial", flags.n_radial, "radial quadrature size");
    sub->add_option("--u-max", flags.u_max, "radial clustering depth");
    sub->add_option("--iterations", flags.iterations, "power-iteration budget");
    sub->add_option("--deriv-max", flags.deriv_max, "highest derivative order");
    sub->add_option("--vn-lo", flags.vn_lo, "lowest block index in the fit");
    sub->add_option("--vn-hi", flags.vn_hi, "highest block index");
    sub->add_option("--pairs", flags.pair_count, "identity sample count");
    sub->add_option("--eta", flags.eta, "profile-check exponent shift");
    sub->add_option("--p", flags.p_values, "exponent list");
    sub->add_option("--resolutions", flags.resolutions, "radial ladder");
    sub->add_option("--r-grid", flags.r_grid, "radius grid");
    sub->add_option("--lambda-grid", flags.lambda_grid, "moment parameter grid");
    sub->add_option("--t-grid", flags.t_grid, "plane radius grid");
    sub->callback([&chosen, tag] { chosen = tag; });
  }

  std::string report_dir = ".";
  CLI::App* rep = app.add_subcommand("report", "summarize recorded tables");
  rep->add_option("dir", report_dir, "directory holding the CSV tables");
  rep->callback([&chosen] { chosen = "report"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (chosen == "report") {
      if (const char* env = std::getenv("BERGLAB_OUT");
          env && *env && rep->count("dir") == 0)
        report_dir = env;
      const auto summary = berglab::experiments::report(report_dir);
      std::cout << summary.text;
      return summary.all_pass ? 0 : 1;
    }
    return run_experiment(chosen, flags, app.get_subcommand(chosen));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
