#include "berglab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "berglab/deriv_ledger.hpp"
#include "berglab/fenchel.hpp"
#include "berglab/fock.hpp"
#include "berglab/kernel.hpp"
#include "berglab/moments.hpp"
#include "berglab/projection.hpp"
#include "berglab/report.hpp"
#include "berglab/smooth_sums.hpp"

namespace berglab::experiments {

namespace fs = std::filesystem;
using report::format_cell;
using report::Table;
using weights::WeightSpec;

const std::vector<std::string>& experiment_tags() {
  static const std::vector<std::string> tags = {
      "moments",    "fenchel",  "kernel-means", "schur",      "piecewise",
      "opnorm-contrast", "vn-norms", "fock-schur",   "class-s",    "deriv-ledger"};
  return tags;
}

namespace {

Array to_array(const std::vector<Scalar>& v) {
  Array a(static_cast<long>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) a[static_cast<long>(i)] = v[i];
  return a;
}

std::vector<Scalar> geometric_depths(int count, Scalar quarter_decades) {
  // r_j = 1 - 10^{-j q / count}: radii clustering toward 1
  std::vector<Scalar> r(count);
  for (int j = 1; j <= count; ++j)
    r[j - 1] = 1.0 - std::pow(10.0, -quarter_decades * j / count);
  return r;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

ExperimentConfig default_config(const std::string& tag) {
  ExperimentConfig cfg;
  cfg.experiment = tag;
  if (tag == "moments") {
    for (int k = 0; k <= 16; ++k)
      cfg.lambda_grid.push_back(std::pow(10.0, 2.0 + 0.25 * k));
  } else if (tag == "fenchel") {
    cfg.lambda_grid = {10.0, 1e3, 1e5};
  } else if (tag == "kernel-means") {
    // rho values; the table evaluates at r = rho^2, and the deepest point
    // stays inside what the default model size certifies
    for (int k = 0; k <= 13; ++k)
      cfg.r_grid.push_back(1.0 - 0.1 * std::pow(0.025, k / 13.0));
  } else if (tag == "schur") {
    cfg.r_grid = geometric_depths(9, 2.25);  // 1 - 10^{-j/4}, j = 1..9
    cfg.n_radial = 96;
    cfg.u_max = 25.0;
  } else if (tag == "piecewise") {
    cfg.r_grid = {0.9, 0.99, 0.999, 0.9999};
  } else if (tag == "opnorm-contrast") {
    cfg.p_values = {1.5, 2.0, 4.0};
    cfg.resolutions = {64, 128, 256, 512};
  } else if (tag == "vn-norms") {
    cfg.p_values = {0.5, 1.0, 2.0, 4.0};
  } else if (tag == "fock-schur") {
    cfg.weight = WeightSpec::fock_gaussian();
    for (int k = 0; k <= 12; ++k) cfg.t_grid.push_back(0.5 * k);
  } else if (tag == "class-s") {
    for (int k = 0; k < 32; ++k)
      cfg.r_grid.push_back(0.5 + (50.0 - 0.5) * k / 31.0);
  } else if (tag == "deriv-ledger") {
    for (int j = 1; j <= 40; ++j)
      cfg.r_grid.push_back(1.0 - std::pow(10.0, -j / 8.0));
  } else {
    throw std::invalid_argument("unknown experiment '" + tag + "'");
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const auto& tags = experiment_tags();
  if (std::find(tags.begin(), tags.end(), cfg.experiment) == tags.end())
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
  const std::string& tag = cfg.experiment;
  if (cfg.output_dir.empty())
    throw std::invalid_argument("output_dir must not be empty");
  if (!(cfg.tol > 0) || !(cfg.tol < 1) || !std::isfinite(cfg.tol))
    throw std::invalid_argument("tol must lie in (0, 1)");
  if (!(cfg.eta < 0.5))
    throw std::invalid_argument("eta must be below 1/2");
  if (cfg.kernel_n_max < 1000)
    throw std::invalid_argument("kernel_n_max must be at least 1000");
  if (cfg.fock_n_max < 16)
    throw std::invalid_argument("fock_n_max must be at least 16");
  if (cfg.n_radial <= 0 || cfg.n_radial % 8 != 0)
    throw std::invalid_argument("n_radial must be a positive multiple of 8");
  if (!(cfg.u_max > 0) || !(cfg.u_max < 700))
    throw std::invalid_argument("u_max must lie in (0, 700)");
  if (cfg.iterations < 16)
    throw std::invalid_argument("iterations must be at least 16");
  if (cfg.deriv_max < 1 || cfg.deriv_max > 8)
    throw std::invalid_argument("deriv_max must lie in [1, 8]");
  // mirror the slope-fit routine: it wants >= 3 block sizes and n <= 12
  if (cfg.vn_lo < 1 || cfg.vn_hi - cfg.vn_lo < 2 || cfg.vn_hi > 12)
    throw std::invalid_argument("need 1 <= vn_lo <= vn_hi - 2 and vn_hi <= 12");
  if (cfg.pair_count < 1)
    throw std::invalid_argument("pair_count must be positive");
  for (Scalar p : cfg.p_values)
    if (!(p > 0) || !std::isfinite(p))
      throw std::invalid_argument("exponents must be positive and finite");

  const bool needs_exp_disk = tag == "fenchel" || tag == "kernel-means" ||
                              tag == "schur" || tag == "piecewise" ||
                              tag == "opnorm-contrast";
  if (needs_exp_disk && (cfg.weight.family != weights::Family::ExpDisk ||
                         !(cfg.weight.alpha > 0)))
    throw std::invalid_argument("experiment '" + tag +
                                "' needs the exponential disk weight");
  if ((tag == "moments" || tag == "deriv-ledger") && !cfg.weight.is_disk())
    throw std::invalid_argument("experiment '" + tag + "' needs a disk weight");
  if (tag == "fock-schur" && cfg.weight.is_disk())
    throw std::invalid_argument("experiment 'fock-schur' needs a plane weight");

  if (tag == "moments" || tag == "fenchel") {
    if (cfg.lambda_grid.empty())
      throw std::invalid_argument("lambda_grid must not be empty");
    Scalar prev = 0;
    for (Scalar l : cfg.lambda_grid) {
      if (!(l > prev) || !std::isfinite(l))
        throw std::invalid_argument("lambda_grid must be positive and increasing");
      prev = l;
    }
  }
  if (tag == "kernel-means" || tag == "schur" || tag == "piecewise" ||
      tag == "class-s" || tag == "deriv-ledger") {
    if (cfg.r_grid.empty())
      throw std::invalid_argument("r_grid must not be empty");
    Scalar prev = tag == "piecewise" ? 0.5 : 0.0;
    const Scalar hi = tag == "class-s" ? -kNegInf : 1.0;
    for (Scalar r : cfg.r_grid) {
      if (!(r > prev) || !(r < hi))
        throw std::invalid_argument("r_grid must be increasing and in range");
      prev = r;
    }
  }
  if (tag == "fock-schur") {
    if (cfg.t_grid.empty())
      throw std::invalid_argument("t_grid must not be empty");
    Scalar prev = -1.0;
    for (Scalar t : cfg.t_grid) {
      if (!(t > prev) || !(t >= 0) || !std::isfinite(t))
        throw std::invalid_argument("t_grid must be nonnegative and increasing");
      prev = t;
    }
  }
  if (tag == "opnorm-contrast") {
    if (cfg.p_values.empty() || cfg.resolutions.empty())
      throw std::invalid_argument("opnorm-contrast needs p_values and resolutions");
    for (Scalar p : cfg.p_values)
      if (!(p > 1))
        throw std::invalid_argument("operator-norm exponents must exceed 1");
    for (int res : cfg.resolutions)
      if (res < 8 || !power_of_two(res))
        throw std::invalid_argument("resolutions must be powers of two, at least 8");
  }
  if (tag == "vn-norms" && cfg.p_values.empty())
    throw std::invalid_argument("vn-norms needs p_values");
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "experiment=" << cfg.experiment << ";weight=" << cfg.weight.name()
    << ";seed=" << cfg.seed << ";tol=" << format_cell(cfg.tol)
    << ";kernel_n_max=" << cfg.kernel_n_max << ";fock_n_max=" << cfg.fock_n_max
    << ";n_radial=" << cfg.n_radial << ";u_max=" << format_cell(cfg.u_max)
    << ";iterations=" << cfg.iterations << ";deriv_max=" << cfg.deriv_max
    << ";vn=" << cfg.vn_lo << ".." << cfg.vn_hi
    << ";pair_count=" << cfg.pair_count << ";eta=" << format_cell(cfg.eta);
  auto vec = [&s](const char* name, const auto& v) {
    s << ';' << name << '=';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s << ',';
      s << format_cell(static_cast<Scalar>(v[i]));
    }
  };
  vec("p", cfg.p_values);
  vec("res", cfg.resolutions);
  vec("r", cfg.r_grid);
  vec("lambda", cfg.lambda_grid);
  vec("t", cfg.t_grid);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Emitter {
  std::string dir;
  report::RunMeta meta;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::vector<std::string> files;
  std::string op;  // module operation in flight, for failure attribution

  void table(const Table& t, bool plot = true) {
    meta.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    files.push_back(report::write_csv(dir, t, meta));
    if (plot) files.push_back(report::write_plot_script(dir, t));
  }
  void text(const std::string& name, const std::string& body) {
    files.push_back(report::write_text(dir, name, body));
  }
};

std::string yesno(bool b) { return b ? "yes" : "no"; }
std::string bit(bool b) { return b ? "1" : "0"; }

void run_moments(const ExperimentConfig& cfg, Emitter& em) {
  em.op = "moments.make_moment_table";
  const Array lambdas = to_array(cfg.lambda_grid);
  for (int logpow = 0; logpow <= 2; ++logpow) {
    const auto t = moments::make_moment_table(cfg.weight, logpow, lambdas,
                                              std::min(cfg.tol, 1e-8));
    Table out;
    out.name = "moments_log" + std::to_string(logpow);
    out.module_op = em.op;
    out.columns = {"lambda", "log_value", "rel_err", "log_asymptote", "ratio"};
    out.notes = {{"weight", cfg.weight.name()},
                 {"logpow", std::to_string(logpow)}};
    for (long i = 0; i < t.lambda.size(); ++i)
      out.rows.push_back({format_cell(t.lambda[i]), format_cell(t.log_value[i]),
                          format_cell(t.err[i]), format_cell(t.log_asymptote[i]),
                          format_cell(t.ratio[i])});
    em.table(out);
  }
}

void run_fenchel(const ExperimentConfig& cfg, Emitter& em) {
  const Scalar alpha = cfg.weight.alpha;
  Table out;
  out.name = "fenchel";
  out.module_op = "fenchel.lf_transform";
  out.columns = {"n", "x", "numeric", "closed_form", "rel_err", "gap_at_min", "gap_off_min"};
  out.notes = {{"weight", cfg.weight.name()}};
  for (int n = 0; n <= 2; ++n) {
    for (Scalar x : cfg.lambda_grid) {
      em.op = "fenchel.lf_transform";
      auto v = [alpha, n](Scalar t) { return alpha / t - n * std::log(t); };
      const auto lf = fenchel::lf_transform(v, x);
      em.op = "fenchel.lf_closed_form";
      const Scalar closed = fenchel::lf_closed_form(alpha, n, x);
      const Scalar rel =
          std::abs(lf.value - closed) / std::max(Scalar(1), std::abs(closed));
      // objective evaluated at the reported minimizer, and off it: the first
      // gap vanishes, the second stays positive
      const Scalar at_min = v(lf.minimizer_t) + x * lf.minimizer_t - closed;
      const Scalar off = v(2 * lf.minimizer_t) + x * 2 * lf.minimizer_t - closed;
      out.rows.push_back({std::to_string(n), format_cell(x),
                          format_cell(lf.value), format_cell(closed),
                          format_cell(rel), format_cell(at_min),
                          format_cell(off)});
    }
  }
  em.table(out, /*plot=*/false);
}

void run_kernel_means(const ExperimentConfig& cfg, Emitter& em) {
  em.op = "kernel_eval.build_kernel";
  const auto model = kernel::build_kernel(cfg.weight.alpha, cfg.kernel_n_max, 1e-10);
  const Scalar log_2pi = std::log(2 * M_PI);
  Table out;
  out.name = "kernel_means";
  out.module_op = "kernel_eval.integral_mean_m1";
  // mean_ratio compares the angular mean (the full circle integral over
  // 2 pi) against the boundary growth formula; lower_ratio does the same
  // for the single-coefficient lower bound
  out.columns = {"rho", "r", "log_mean", "log_asymptote", "mean_ratio", "lower_ratio"};
  out.notes = {{"weight", cfg.weight.name()},
               {"kernel_n_max", std::to_string(cfg.kernel_n_max)}};
  for (Scalar rho : cfg.r_grid) {
    const Scalar r = rho * rho;
    em.op = "kernel_eval.integral_mean_m1";
    const Scalar log_mean = kernel::integral_mean_m1(model, r) - log_2pi;
    em.op = "kernel_eval.m1_asymptote";
    const Scalar log_asym = kernel::m1_asymptote(cfg.weight.alpha, r);
    em.op = "kernel_eval.m1_lower_bound";
    const Scalar log_lower = kernel::m1_lower_bound(model, r) - log_2pi;
    out.rows.push_back({format_cell(rho), format_cell(r), format_cell(log_mean),
                        format_cell(log_asym),
                        format_cell(std::exp(log_mean - log_asym)),
                        format_cell(std::exp(log_lower - log_asym))});
  }
  em.table(out);
}

void run_schur(const ExperimentConfig& cfg, Emitter& em) {
  em.op = "kernel_eval.build_kernel";
  const auto model = kernel::build_kernel(cfg.weight.alpha, cfg.kernel_n_max, 1e-10);
  em.op = "projection_lab.make_polar_grid";
  const auto grid = projection::make_polar_grid(cfg.n_radial, 8, cfg.u_max);

  Table split;
  split.name = "schur_split";
  split.module_op = "projection_lab.schur_integral";
  split.columns = {"r", "value"};
  split.notes = {{"weight", cfg.weight.name()}, {"mode", "theorem5"}};
  for (Scalar r : cfg.r_grid) {
    em.op = "projection_lab.schur_integral";
    const Scalar v =
        projection::schur_integral(model, r, grid, projection::Pairing::kTheorem5);
    split.rows.push_back({format_cell(r), format_cell(v)});
  }
  em.table(split);

  // the unsplit pairing blows up so fast that a fixed moderate grid tells
  // the whole story; deeper radii overflow double range
  Table unsplit;
  unsplit.name = "schur_unsplit";
  unsplit.module_op = "projection_lab.schur_integral";
  unsplit.columns = {"r", "value"};
  unsplit.notes = {{"weight", cfg.weight.name()}, {"mode", "dostanic"}};
  for (Scalar r : {0.5, 0.7, 0.9, 0.95, 0.99, 0.995}) {
    em.op = "projection_lab.schur_integral";
    const Scalar v =
        projection::schur_integral(model, r, grid, projection::Pairing::kDostanic);
    unsplit.rows.push_back({format_cell(r), format_cell(v)});
  }
  em.table(unsplit);
}

void run_piecewise(const ExperimentConfig& cfg, Emitter& em) {
  Table out;
  out.name = "piecewise";
  out.module_op = "projection_lab.piecewise_bounds";
  out.columns = {"r", "head", "middle", "middle_cap", "tail", "inner"};
  out.notes = {{"weight", cfg.weight.name()}};
  for (Scalar r : cfg.r_grid) {
    em.op = "projection_lab.piecewise_bounds";
    const auto b = projection::piecewise_bounds(cfg.weight.alpha, r);
    out.rows.push_back({format_cell(r), format_cell(b.head), format_cell(b.middle),
                        format_cell(b.middle_cap), format_cell(b.tail),
                        format_cell(b.inner)});
  }
  em.table(out);

  em.op = "projection_lab.ident2_residual";
  Table ident;
  ident.name = "ident_residuals";
  ident.module_op = em.op;
  ident.columns = {"r", "s", "lhs", "residual"};
  ident.notes = {{"pairs", std::to_string(cfg.pair_count)}};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<Scalar> radius(1e-6, 1.0 - 1e-6);
  for (int k = 0; k < cfg.pair_count; ++k) {
    const Scalar r = radius(rng), s = radius(rng);
    ident.rows.push_back({format_cell(r), format_cell(s),
                          format_cell(projection::ident2_lhs(r, s)),
                          format_cell(projection::ident2_residual(r, s))});
  }
  em.table(ident, /*plot=*/false);
}

void run_opnorm(const ExperimentConfig& cfg, Emitter& em) {
  em.op = "kernel_eval.build_kernel";
  const auto model = kernel::build_kernel(cfg.weight.alpha, cfg.kernel_n_max, 1e-10);
  Table out;
  out.name = "opnorm_contrast";
  out.module_op = "projection_lab.opnorm_lower";
  out.columns = {"mode", "p", "resolution", "opnorm_lower", "seed"};
  out.notes = {{"weight", cfg.weight.name()},
               {"iterations", std::to_string(cfg.iterations)}};
  const std::pair<projection::Pairing, std::string> modes[] = {
      {projection::Pairing::kTheorem5, "theorem5"},
      {projection::Pairing::kDostanic, "dostanic"}};
  for (const auto& [pairing, label] : modes) {
    for (Scalar p : cfg.p_values) {
      for (int res : cfg.resolutions) {
        em.op = "projection_lab.assemble_projection";
        // angular modes scale with the radial count so refinement deepens
        // both directions at once
        const auto grid = projection::make_polar_grid(res, 4 * res, cfg.u_max);
        const auto proj = projection::assemble_projection(model, grid, pairing, p);
        em.op = "projection_lab.opnorm_lower";
        const Scalar norm = projection::opnorm_lower(proj, cfg.iterations, cfg.seed);
        out.rows.push_back({label, format_cell(p), std::to_string(res),
                            format_cell(norm), std::to_string(cfg.seed)});
      }
    }
  }
  em.table(out, /*plot=*/false);
}

void run_vn_norms(const ExperimentConfig& cfg, Emitter& em) {
  Table norms;
  norms.name = "vn_norms";
  norms.module_op = "smooth_sums.hardy_norm";
  norms.columns = {"p", "n", "log2_norm"};
  for (Scalar p : cfg.p_values) {
    for (int n = 1; n <= cfg.vn_hi; ++n) {
      em.op = "smooth_sums.hardy_norm";
      const auto b = smooth_sums::vn_block(n);
      const Scalar norm = smooth_sums::hardy_norm(b.coeffs, p);
      norms.rows.push_back(
          {format_cell(p), std::to_string(n), format_cell(std::log2(norm))});
    }
  }
  em.table(norms, /*plot=*/false);

  Table slopes;
  slopes.name = "vn_slopes";
  slopes.module_op = "smooth_sums.vn_norm_scaling";
  slopes.columns = {"p", "slope", "expected"};
  slopes.notes = {{"n_lo", std::to_string(cfg.vn_lo)},
                  {"n_hi", std::to_string(cfg.vn_hi)}};
  for (Scalar p : cfg.p_values) {
    em.op = "smooth_sums.vn_norm_scaling";
    const Scalar slope = smooth_sums::vn_norm_scaling(p, cfg.vn_lo, cfg.vn_hi);
    slopes.rows.push_back(
        {format_cell(p), format_cell(slope), format_cell(1.0 - 1.0 / p)});
  }
  em.table(slopes, /*plot=*/false);

  em.op = "smooth_sums.hadamard";
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<Scalar> coef(-1.0, 1.0);
  Array f(256);
  for (long k = 0; k < f.size(); ++k) f[k] = coef(rng);
  Array sum = Array::Zero(f.size());
  for (int n = 0; n <= 8; ++n) sum += smooth_sums::hadamard(f, smooth_sums::vn_block(n));
  Table recon;
  recon.name = "vn_recon";
  recon.module_op = em.op;
  recon.columns = {"k", "coeff", "reconstructed", "abs_err"};
  for (long k = 0; k < f.size(); ++k)
    recon.rows.push_back({std::to_string(k), format_cell(f[k]),
                          format_cell(sum[k]), format_cell(std::abs(sum[k] - f[k]))});
  em.table(recon, /*plot=*/false);
}

void run_fock_schur(const ExperimentConfig& cfg, Emitter& em) {
  em.op = "fock_lab.build_fock_kernel";
  const auto model = fock::build_fock_kernel(cfg.weight, cfg.fock_n_max, 1e-10);
  em.op = "fock_lab.fock_schur_integral";
  const auto res = fock::fock_schur_integral(model, to_array(cfg.t_grid), 40.0,
                                             std::min(cfg.tol, 1e-8));
  Table out;
  out.name = "fock_schur";
  out.module_op = em.op;
  out.columns = {"t", "value"};
  out.notes = {{"weight", cfg.weight.name()}, {"sup", format_cell(res.sup)}};
  for (long i = 0; i < res.t.size(); ++i)
    out.rows.push_back({format_cell(res.t[i]), format_cell(res.value[i])});
  em.table(out);

  // moment cross-check against the closed forms that exist
  const bool gaussian = cfg.weight.family == weights::Family::FockGaussian;
  const bool quartic = cfg.weight.family == weights::Family::FockMonomial &&
                       cfg.weight.m == 4.0;
  if (gaussian || quartic) {
    em.op = "moments.fock_moment";
    Table mom;
    mom.name = "fock_moments";
    mom.module_op = em.op;
    mom.columns = {"n", "log_moment", "log_reference", "abs_diff"};
    mom.notes = {{"weight", cfg.weight.name()}};
    for (int n = 0; n <= 32; ++n) {
      const Scalar got = moments::fock_moment(cfg.weight, n, 1e-12).log_value;
      const Scalar ref = gaussian
                             ? std::lgamma(n + 1.0)
                             : std::lgamma((n + 1.0) / 2) - std::log(2.0) * (n + 3.0) / 2;
      mom.rows.push_back({std::to_string(n), format_cell(got), format_cell(ref),
                          format_cell(std::abs(got - ref))});
    }
    em.table(mom);
  }
}

void run_class_s(const ExperimentConfig& cfg, Emitter& em) {
  const Array x = to_array(cfg.r_grid);
  const std::pair<WeightSpec, std::string> profiles[] = {
      {WeightSpec::fock_gaussian(), "gaussian"},
      {WeightSpec::fock_monomial(4.0), "monomial4"},
      {WeightSpec::fock_monomial(3.0), "monomial3"}};
  std::ostringstream txt;
  txt << "profile admissibility report (eta = " << format_cell(cfg.eta) << ")\n";
  for (const auto& [spec, label] : profiles) {
    em.op = "fock_lab.class_s_check";
    const auto rep = fock::class_s_check(spec, x, cfg.eta);
    Table out;
    out.name = "class_s_" + label;
    out.module_op = em.op;
    out.columns = {"x", "psi1", "psi2", "psi3", "ratio"};
    out.notes = {{"profile", spec.name()},
                 {"eta", format_cell(cfg.eta)},
                 {"slope_positive", bit(rep.slope_positive)},
                 {"convex", bit(rep.convex)},
                 {"third_nonneg", bit(rep.third_nonneg)},
                 {"ratio_bounded", bit(rep.ratio_bounded)},
                 {"ratio_sup", format_cell(rep.ratio_sup)},
                 {"admissible", bit(rep.admissible)}};
    for (long i = 0; i < x.size(); ++i)
      out.rows.push_back({format_cell(rep.x[i]), format_cell(rep.psi1[i]),
                          format_cell(rep.psi2[i]), format_cell(rep.psi3[i]),
                          format_cell(rep.ratio[i])});
    em.table(out);

    txt << "\n" << spec.name() << "\n";
    txt << "  slope_positive: " << yesno(rep.slope_positive) << "\n";
    txt << "  convex:         " << yesno(rep.convex) << "\n";
    txt << "  third_nonneg:   " << yesno(rep.third_nonneg) << "\n";
    txt << "  ratio_bounded:  " << yesno(rep.ratio_bounded)
        << "  (sup = " << format_cell(rep.ratio_sup) << ")\n";
    txt << "  admissible:     " << yesno(rep.admissible) << "\n";
  }
  em.text("class_s_report.txt", txt.str());
}

// first derivative by the 4th-order central stencil
Scalar fd_first(const std::function<Scalar(Scalar)>& f, Scalar x, Scalar h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

void run_deriv_ledger(const ExperimentConfig& cfg, Emitter& em) {
  const WeightSpec& spec = cfg.weight;
  auto w = [&spec](Scalar r) { return weights::eval_weight(spec, r); };

  Table cross;
  cross.name = "deriv_ledger";
  cross.module_op = "ledger.build_Pn";
  // rel_err is normalized by the natural n-th derivative magnitude
  // w (2 phi')^n as well as the value itself: the derivative polynomials
  // change sign inside (0, 1), and next to a root a bare relative error
  // measures nothing
  cross.columns = {"n", "r", "ledger_value", "fd_value", "rel_err"};
  cross.notes = {{"weight", spec.name()}};
  Table leading;
  leading.name = "deriv_leading";
  leading.module_op = "ledger.leading_coefficient";
  leading.columns = {"n", "leading", "expected", "terms"};

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<Scalar> radius(0.1, 0.6);
  std::vector<Scalar> radii(20);
  for (auto& r : radii) r = radius(rng);
  std::sort(radii.begin(), radii.end());

  ledger::DerivPolynomial prev;
  for (int n = 1; n <= cfg.deriv_max; ++n) {
    em.op = "ledger.build_Pn";
    const auto P = ledger::build_Pn(n);
    // each level is checked as the numerical derivative of the previous
    // level's exact evaluation (level 0 is the weight itself); a single
    // differentiation keeps the quotient far from the roundoff floor that
    // direct n-th differences of w hit by n = 6
    std::function<Scalar(Scalar)> below = [&](Scalar r) {
      return n > 1 ? ledger::eval(prev, spec, r) * w(r) : w(r);
    };
    for (Scalar r : radii) {
      em.op = "ledger.eval";
      const Scalar exact = ledger::eval(P, spec, r) * w(r);
      const Scalar phi1 = std::abs(weights::phi_derivative(spec, 1, r));
      const Scalar h = std::min(r / 4, 0.005 / std::max(Scalar(1), phi1));
      const Scalar fd = fd_first(below, r, h);
      const Scalar scale = std::pow(2 * phi1, n) * w(r);
      const Scalar rel = std::abs(fd - exact) / std::max(std::abs(exact), scale);
      cross.rows.push_back({std::to_string(n), format_cell(r), format_cell(exact),
                            format_cell(fd), format_cell(rel)});
    }
    prev = P;
    em.op = "ledger.leading_coefficient";
    const std::int64_t lead = ledger::leading_coefficient(P);
    const std::int64_t expect = (n % 2 == 0 ? 1 : -1) * (std::int64_t(1) << n);
    leading.rows.push_back({std::to_string(n), std::to_string(lead),
                            std::to_string(expect),
                            std::to_string(P.terms.size())});
  }
  em.table(cross, /*plot=*/false);
  em.table(leading, /*plot=*/false);

  em.op = "ledger.check_sign_condition";
  Table signs;
  signs.name = "deriv_signs";
  signs.module_op = em.op;
  signs.columns = {"n", "first_radius", "holds"};
  const Array grid = to_array(cfg.r_grid);
  for (int n = 1; n <= cfg.deriv_max; ++n) {
    const auto sc = ledger::check_sign_condition(spec, n, grid, 8);
    signs.rows.push_back({std::to_string(n), format_cell(sc.first_radius),
                          bit(sc.holds_near_boundary)});
  }
  em.table(signs, /*plot=*/false);
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  validate(cfg);
  Emitter em;
  em.dir = cfg.output_dir;
  em.meta.config_hash = config_hash(cfg);
  em.meta.seed = cfg.seed;

  RunResult result;
  try {
    if (cfg.experiment == "moments") run_moments(cfg, em);
    else if (cfg.experiment == "fenchel") run_fenchel(cfg, em);
    else if (cfg.experiment == "kernel-means") run_kernel_means(cfg, em);
    else if (cfg.experiment == "schur") run_schur(cfg, em);
    else if (cfg.experiment == "piecewise") run_piecewise(cfg, em);
    else if (cfg.experiment == "opnorm-contrast") run_opnorm(cfg, em);
    else if (cfg.experiment == "vn-norms") run_vn_norms(cfg, em);
    else if (cfg.experiment == "fock-schur") run_fock_schur(cfg, em);
    else if (cfg.experiment == "class-s") run_class_s(cfg, em);
    else run_deriv_ledger(cfg, em);
  } catch (const std::exception& e) {
    result.failed_op = em.op.empty() ? "experiments.run" : em.op;
    result.error = e.what();
  }
  result.files = std::move(em.files);
  return result;
}

namespace {

using report::CsvFile;

Scalar upper_median(std::vector<Scalar> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::string pct(Scalar x) { return format_cell(100 * x) + "%"; }

struct Checker {
  std::string dir;
  std::vector<CriterionResult> out;

  std::optional<CsvFile> load(const std::string& stem) const {
    const fs::path p = fs::path(dir) / (stem + ".csv");
    if (!fs::exists(p)) return std::nullopt;
    return report::read_csv(p.string());
  }

  // check() returns "" on pass, otherwise the violation; missing tables and
  // parse failures are reported as such
  void criterion(const std::string& name, const std::vector<std::string>& stems,
                 const std::function<std::string(
                     const std::map<std::string, CsvFile>&)>& check) {
    CriterionResult cr;
    cr.name = name;
    std::map<std::string, CsvFile> tables;
    std::string missing;
    for (const auto& stem : stems) {
      try {
        auto t = load(stem);
        if (!t) {
          if (!missing.empty()) missing += ", ";
          missing += stem + ".csv";
          continue;
        }
        tables.emplace(stem, std::move(*t));
      } catch (const std::exception& e) {
        cr.found = true;
        cr.passed = false;
        cr.detail = std::string("unreadable table: ") + e.what();
        out.push_back(cr);
        return;
      }
    }
    if (!missing.empty()) {
      cr.found = false;
      cr.detail = "missing " + missing;
      out.push_back(cr);
      return;
    }
    cr.found = true;
    try {
      const std::string verdict = check(tables);
      cr.passed = verdict.empty();
      cr.detail = verdict.empty() ? "" : verdict;
      if (cr.passed && cr.detail.empty()) cr.detail = "ok";
    } catch (const std::exception& e) {
      cr.passed = false;
      cr.detail = std::string("check failed: ") + e.what();
    }
    out.push_back(cr);
  }
};

}  // namespace

Report report(const std::string& dir) {
  Checker ck;
  ck.dir = dir;

  std::string moments_detail;
  ck.criterion("moment-asymptote",
               {"moments_log0", "moments_log1", "moments_log2"},
               [&](const std::map<std::string, CsvFile>& tables) -> std::string {
                 std::string worst;
                 Scalar worst_span = 0, worst_drift = 0;
                 for (const auto& [stem, t] : tables) {
                   const auto lambda = t.numeric("lambda");
                   const auto ratio = t.numeric("ratio");
                   if (ratio.size() < 2) return stem + ": too few rows";
                   Scalar lo = -kNegInf, hi = 0;
                   for (Scalar r : ratio) {
                     if (!std::isfinite(r) || r <= 0)
                       return stem + ": ratio not finite positive";
                     lo = std::min(lo, r);
                     hi = std::max(hi, r);
                   }
                   if (!(hi / lo < 10))
                     return stem + ": ratio span " + format_cell(hi / lo) +
                            "x (needs < 10x)";
                   const Scalar target = lambda.back() / 10;
                   std::size_t at = 0;
                   for (std::size_t i = 0; i < lambda.size(); ++i)
                     if (std::abs(std::log(lambda[i] / target)) <
                         std::abs(std::log(lambda[at] / target)))
                       at = i;
                   const Scalar drift = std::abs(ratio.back() / ratio[at] - 1.0);
                   if (!(drift < 0.05))
                     return stem + ": last-decade drift " + pct(drift) +
                            " (needs < 5%)";
                   worst_span = std::max(worst_span, hi / lo);
                   worst_drift = std::max(worst_drift, drift);
                 }
                 moments_detail = "worst span " + format_cell(worst_span) +
                                  "x, worst drift " + pct(worst_drift);
                 return "";
               });
  if (!ck.out.empty() && ck.out.back().passed) ck.out.back().detail = moments_detail;

  ck.criterion("fenchel-transform", {"fenchel"},
               [](const std::map<std::string, CsvFile>& tables) -> std::string {
                 const auto& t = tables.at("fenchel");
                 const auto rel = t.numeric("rel_err");
                 const auto gmin = t.numeric("gap_at_min");
                 const auto goff = t.numeric("gap_off_min");
                 for (std::size_t i = 0; i < rel.size(); ++i) {
                   if (!(rel[i] < 1e-8))
                     return "closed form mismatch " + format_cell(rel[i]);
                   if (!(std::abs(gmin[i]) < 1e-9))
                     return "objective gap at minimizer " + format_cell(gmin[i]);
                   if (!(goff[i] >= 0))
                     return "objective below minimum off the minimizer";
                 }
                 return "";
               });

  ck.criterion("kernel-mean-growth", {"kernel_means"},
               [](const std::map<std::string, CsvFile>& tables) -> std::string {
                 const auto& t = tables.at("kernel_means");
                 const auto ratio = t.numeric("mean_ratio");
                 const auto lower = t.numeric("lower_ratio");
                 if (ratio.size() < 12)
                   return "only " + std::to_string(ratio.size()) +
                          " grid points (needs >= 12)";
                 for (std::size_t i = 0; i < ratio.size(); ++i) {
                   if (!(ratio[i] <= 5 && ratio[i] >= 0.2))
                     return "mean/asymptote ratio " + format_cell(ratio[i]) +
                            " outside [0.2, 5]";
                   if (!(lower[i] >= 0.25))
                     return "coefficient lower bound ratio " +
                            format_cell(lower[i]) + " below 0.25";
                 }
                 return "";
               });

  ck.criterion(
      "schur-plateau", {"schur_split", "schur_unsplit"},
      [](const std::map<std::string, CsvFile>& tables) -> std::string {
        const auto split = tables.at("schur_split").numeric("value");
        if (split.size() < 3) return "split table too short";
        Scalar mx = 0;
        for (Scalar v : split) {
          if (!std::isfinite(v) || v <= 0) return "split value not finite positive";
          mx = std::max(mx, v);
        }
        const Scalar med = upper_median(split);
        if (!(mx < 2 * med))
          return "split max/median " + format_cell(mx / med) + " (needs < 2)";
        const auto un = tables.at("schur_unsplit").numeric("value");
        if (un.size() < 2) return "unsplit table too short";
        for (std::size_t i = 1; i < un.size(); ++i)
          if (!(un[i] > un[i - 1])) return "unsplit values not increasing";
        if (!(un.back() / un.front() > 10))
          return "unsplit growth " + format_cell(un.back() / un.front()) +
                 "x (needs > 10x)";
        return "";
      });

  ck.criterion(
      "reproducing-identity", {"ident_residuals"},
      [](const std::map<std::string, CsvFile>& tables) -> std::string {
        const auto& t = tables.at("ident_residuals");
        if (t.rows.size() < 1000)
          return "only " + std::to_string(t.rows.size()) + " pairs (needs >= 1000)";
        const auto r = t.numeric("r");
        const auto s = t.numeric("s");
        const auto lhs = t.numeric("lhs");
        const auto res = t.numeric("residual");
        for (std::size_t i = 0; i < r.size(); ++i) {
          if (!(lhs[i] <= 0)) return "positive left side at row " + std::to_string(i);
          const Scalar band = 1e-12 * (1.0 + 1.0 / (1.0 - std::sqrt(r[i] * s[i])));
          if (!(std::abs(res[i]) <= band))
            return "residual " + format_cell(res[i]) + " at (r,s)=(" +
                   format_cell(r[i]) + "," + format_cell(s[i]) + ")";
        }
        return "";
      });

  ck.criterion(
      "piecewise-budget", {"piecewise"},
      [](const std::map<std::string, CsvFile>& tables) -> std::string {
        const auto& t = tables.at("piecewise");
        const auto mid = t.numeric("middle");
        const auto cap = t.numeric("middle_cap");
        for (std::size_t i = 0; i < mid.size(); ++i)
          if (!(mid[i] <= cap[i])) return "middle exceeds its cap";
        const std::pair<const char*, Scalar> caps[] = {
            {"head", 1.6}, {"middle", 2.0}, {"tail", 1.0}, {"inner", 1.3}};
        for (const auto& [col, bound] : caps) {
          const auto v = t.numeric(col);
          Scalar mx = 0;
          for (Scalar x : v) {
            if (!std::isfinite(x) || x < 0)
              return std::string(col) + " not finite nonnegative";
            mx = std::max(mx, x);
          }
          if (!(mx < bound))
            return std::string(col) + " reaches " + format_cell(mx) +
                   " (bound " + format_cell(bound) + ")";
          if (!(v.back() <= 2 * upper_median(v) + 1e-300))
            return std::string(col) + " still growing at the deepest radius";
        }
        return "";
      });

  ck.criterion(
      "block-norm-scaling", {"vn_slopes", "vn_recon"},
      [](const std::map<std::string, CsvFile>& tables) -> std::string {
        const auto& ts = tables.at("vn_slopes");
        const auto slope = ts.numeric("slope");
        const auto expect = ts.numeric("expected");
        const auto pcol = ts.numeric("p");
        for (std::size_t i = 0; i < slope.size(); ++i)
          if (!(std::abs(slope[i] - expect[i]) <= 0.1))
            return "slope " + format_cell(slope[i]) + " at p=" +
                   format_cell(pcol[i]) + " misses " + format_cell(expect[i]) +
                   " by more than 0.1";
        const auto err = tables.at("vn_recon").numeric("abs_err");
        for (Scalar e : err)
          if (!(e <= 1e-12)) return "reconstruction error " + format_cell(e);
        return "";
      });

  ck.criterion(
      "opnorm-dichotomy", {"opnorm_contrast"},
      [](const std::map<std::string, CsvFile>& tables) -> std::string {
        const auto& t = tables.at("opnorm_contrast");
        const std::size_t mode_i = t.column_index("mode");
        const auto p = t.numeric("p");
        const auto norm = t.numeric("opnorm_lower");
        std::map<std::pair<std::string, Scalar>, std::pair<Scalar, Scalar>> span;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          auto key = std::make_pair(t.rows[i][mode_i], p[i]);
          auto it = span.find(key);
          if (it == span.end())
            span.emplace(key, std::make_pair(norm[i], norm[i]));
          else {
            it->second.first = std::min(it->second.first, norm[i]);
            it->second.second = std::max(it->second.second, norm[i]);
          }
        }
        auto group = [&](const std::string& mode, Scalar pv)
            -> const std::pair<Scalar, Scalar>* {
          auto it = span.find({mode, pv});
          return it == span.end() ? nullptr : &it->second;
        };
        const auto* d4 = group("dostanic", 4.0);
        if (!d4) return "no unsplit p=4 ladder in the table";
        if (!(d4->second / d4->first > 10))
          return "unsplit p=4 growth " + format_cell(d4->second / d4->first) +
                 "x (needs > 10x)";
        for (Scalar pv : {1.5, 4.0}) {
          const auto* g = group("theorem5", pv);
          if (!g) return "no split p=" + format_cell(pv) + " ladder";
          if (!(g->second / g->first < 2))
            return "split p=" + format_cell(pv) + " drifts " +
                   format_cell(g->second / g->first) + "x (needs < 2x)";
        }
        for (const char* mode : {"theorem5", "dostanic"}) {
          const auto* g = group(mode, 2.0);
          if (!g) return std::string("no ") + mode + " p=2 ladder";
          if (!(g->second <= 1.05))
            return std::string(mode) + " p=2 norm " + format_cell(g->second) +
                   " above 1.05";
        }
        return "";
      });

  ck.criterion(
      "derivative-ledger", {"deriv_ledger", "deriv_leading", "deriv_signs"},
      [](const std::map<std::string, CsvFile>& tables) -> std::string {
        const auto rel = tables.at("deriv_ledger").numeric("rel_err");
        Scalar worst = 0;
        for (Scalar e : rel) worst = std::max(worst, e);
        if (!(worst <= 1e-4))
          return "difference-quotient mismatch " + format_cell(worst) +
                 " (needs <= 1e-4)";
        const auto& lead = tables.at("deriv_leading");
        const auto got = lead.numeric("leading");
        const auto want = lead.numeric("expected");
        for (std::size_t i = 0; i < got.size(); ++i)
          if (got[i] != want[i]) return "leading coefficient mismatch";
        const auto& signs = tables.at("deriv_signs");
        const auto holds = signs.numeric("holds");
        const auto first = signs.numeric("first_radius");
        for (std::size_t i = 0; i < holds.size(); ++i) {
          if (holds[i] != 1.0) return "sign condition fails at row " + std::to_string(i);
          if (!(first[i] < 1.0)) return "sign condition never settles";
        }
        return "";
      });

  ck.criterion(
      "plane-kernel-family",
      {"fock_schur", "fock_moments", "class_s_gaussian", "class_s_monomial4",
       "class_s_monomial3"},
      [](const std::map<std::string, CsvFile>& tables) -> std::string {
        const auto& fs_table = tables.at("fock_schur");
        const auto val = fs_table.numeric("value");
        if (val.size() < 10)
          return "only " + std::to_string(val.size()) + " plane radii (needs >= 10)";
        const bool gaussian = fs_table.note("weight") == "fock_gaussian";
        if (gaussian) {
          for (Scalar v : val)
            if (!(std::abs(v - 2.0) < 1e-6))
              return "plane row integral " + format_cell(v) +
                     " off the closed form 2";
        } else {
          Scalar mx = 0;
          for (Scalar v : val) mx = std::max(mx, v);
          if (!(mx < 2 * upper_median(val)))
            return "plane row integral max/median " +
                   format_cell(mx / upper_median(val)) + " (needs < 2)";
        }
        const auto diff = tables.at("fock_moments").numeric("abs_diff");
        for (Scalar d : diff)
          if (!(d < 1e-10))
            return "moment vs closed form differs by " + format_cell(d);
        const auto admissible = [&](const std::string& stem) {
          return tables.at(stem).note("admissible");
        };
        if (admissible("class_s_gaussian") != "1")
          return "gaussian profile not admissible";
        if (admissible("class_s_monomial4") != "1")
          return "quartic profile not admissible";
        if (admissible("class_s_monomial3") != "0")
          return "cubic profile unexpectedly admissible";
        if (tables.at("class_s_monomial3").note("third_nonneg") != "0")
          return "cubic profile should fail on the third derivative";
        return "";
      });

  Report rep;
  rep.criteria = std::move(ck.out);
  for (const auto& c : rep.criteria) {
    rep.found_count += c.found ? 1 : 0;
    rep.passed_count += (c.found && c.passed) ? 1 : 0;
  }
  rep.all_pass = rep.passed_count == static_cast<int>(rep.criteria.size());

  std::ostringstream txt;
  txt << "berglab summary\n";
  txt << "directory: " << dir << "\n";
  txt << "criteria found: " << rep.found_count << "/" << rep.criteria.size()
      << ", passed: " << rep.passed_count << "/" << rep.criteria.size() << "\n\n";
  for (const auto& c : rep.criteria) {
    const char* tag = !c.found ? "MISS" : (c.passed ? "PASS" : "FAIL");
    txt << tag << " " << c.name;
    for (std::size_t pad = c.name.size(); pad < 22; ++pad) txt << ' ';
    txt << " " << (c.detail.empty() ? "ok" : c.detail) << "\n";
  }
  txt << "\noverall: " << (rep.all_pass ? "PASS" : "FAIL") << "\n";
  rep.text = txt.str();
  report::write_text(dir, "summary.txt", rep.text);
  return rep;
}

}  // namespace berglab::experiments
