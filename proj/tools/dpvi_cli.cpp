// Command-line front end: solve single instances, calibrate noise
// schedules, run rate sweeps, and run diagnostic probes, emitting
// run.csv / summary.csv / plotdata.txt / meta.txt into an output
// directory.  All behavior is driven by a flat key=value configuration
// with command-line overrides (flags win over the file).

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dpvi/config.hpp"
#include "dpvi/evaluation.hpp"

namespace fs = std::filesystem;
using namespace dpvi;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_given = false;
  bool out_given = false;
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "path to a key=value configuration file");
  cmd->add_option("--out", flags.out_dir, "output directory")
      ->each([&](const std::string&) { flags.out_given = true; });
  cmd->add_option("--seed", flags.seed, "master 64-bit seed")
      ->each([&](const std::string&) { flags.seed_given = true; });
  cmd->add_option("--set", flags.overrides,
                  "override a configuration key (key=value, repeatable)");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty())
    cfg = RunConfig::from_file(flags.config_path);
  for (const auto& kv : flags.overrides) cfg.apply_assignment(kv);
  if (flags.seed_given) cfg.set("seed", std::to_string(flags.seed));
  if (flags.out_given) cfg.set("out", flags.out_dir);
  return cfg;
}

std::string timestamp_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

// metadata block reproducing the fully resolved configuration; prefixed
// with '#' so csv readers skip it.  The timestamp carries a distinct
// prefix and is the only non-deterministic line in any output file.
std::string meta_block(const RunConfig& cfg) {
  std::ostringstream out;
  std::istringstream lines(echo_config(cfg));
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
  return out.str();
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir = cfg.get_string("out", ".");
  fs::create_directories(dir);
  return dir;
}

void write_meta(const fs::path& dir, const RunConfig& cfg,
                const std::vector<std::string>& extra) {
  std::ofstream out(dir / "meta.txt");
  out << "#timestamp " << timestamp_now() << '\n';
  out << echo_config(cfg);
  for (const auto& line : extra) out << line << '\n';
}

void write_sweep_artifacts(const fs::path& dir, const RunConfig& cfg,
                           const SweepResult& result,
                           const std::vector<std::string>& extra_meta) {
  {
    std::ofstream out(dir / "run.csv");
    out << meta_block(cfg);
    write_run_csv(result, out);
  }
  {
    std::ofstream out(dir / "summary.csv");
    out << meta_block(cfg);
    write_summary_csv(result, out);
  }
  {
    std::ofstream out(dir / "plotdata.txt");
    out << meta_block(cfg);
    write_plotdata(result, out);
  }
  write_meta(dir, cfg, extra_meta);
}

std::string format_vec(ConstSpan v) {
  std::ostringstream out;
  out.precision(12);
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out << ',';
    out << v[i];
  }
  return out.str();
}

// ---------------------------------------------------------------- calibrate

int run_calibrate(const RunConfig& cfg) {
  ConfigValidator v;
  v.require(cfg.has("epsilon"),
            "missing required key 'epsilon' (privacy budget)");
  double eps = cfg.get_double("epsilon", 0.0);
  double delta = cfg.get_double("delta", 1e-5);
  long n = cfg.get_long("n", 1000);
  long d = cfg.get_long("d", 10);
  long d_w = cfg.get_long("d_w", (d + 1) / 2);
  long d_theta = cfg.get_long("d_theta", d - d_w);
  double p = cfg.get_double("p", 2.0);
  double q = cfg.get_double("q", 2.0);
  double L_w = cfg.get_double("lipschitz_w", 1.0);
  double L_theta = cfg.get_double("lipschitz_theta", 1.0);
  double radius_w = cfg.get_double("radius_w", 0.5);
  double radius_theta = cfg.get_double("radius_theta", 0.5);
  double acc = cfg.get_double("accountant_constant", 1.0);
  if (cfg.has("epsilon"))
    v.require(eps > 0.0, "'epsilon' must be > 0 (privacy budget)");
  v.require(delta > 0.0 && delta <= 1.0,
            "'delta' must lie in (0,1] (privacy budget)");
  v.require(n >= 1, "'n' must be >= 1 (sample count)");
  v.require(d_w >= 1 && d_theta >= 1,
            "'d_w' and 'd_theta' must be >= 1 (block dimensions)");
  v.require(p >= 1.0 && q >= 1.0, "'p' and 'q' must be >= 1 (norm exponents)");
  v.require(L_w > 0.0 && L_theta > 0.0,
            "'lipschitz_w' and 'lipschitz_theta' must be > 0");
  v.finish();

  ProductGeometry geom(
      LpGeometry(p, static_cast<int>(d_w), radius_w),
      LpGeometry(q, static_cast<int>(d_theta), radius_theta));
  NoiseCalibration cal =
      calibrate(PrivacyBudget(eps, delta), geom, L_w, L_theta, n,
                static_cast<int>(d_w), static_cast<int>(d_theta), acc);

  std::cout << "T=" << cal.iterations << " m=" << cal.batch_size
            << std::fixed << std::setprecision(5)
            << " sigma_w=" << cal.sigma_w
            << " sigma_theta=" << cal.sigma_theta << '\n';

  std::ostringstream row;
  row.precision(12);
  row << cal.iterations << ',' << cal.batch_size << ',' << cal.sigma_w << ','
      << cal.sigma_theta << ',' << cal.accountant_constant << ','
      << cal.kappa_tilde;

  fs::path dir = output_dir(cfg);
  const std::string header =
      "iterations,batch_size,sigma_w,sigma_theta,accountant_constant,"
      "kappa_tilde";
  for (const char* name : {"run.csv", "summary.csv"}) {
    std::ofstream out(dir / name);
    out << meta_block(cfg) << header << '\n' << row.str() << '\n';
  }
  {
    std::ofstream out(dir / "plotdata.txt");
    out << meta_block(cfg);
    out.precision(12);
    out << n << ' ' << cal.sigma_w << ' ' << cal.sigma_theta << '\n';
  }
  write_meta(dir, cfg,
             {"calibration.iterations=" + std::to_string(cal.iterations),
              "calibration.batch_size=" + std::to_string(cal.batch_size),
              "calibration.row=" + row.str()});
  return 0;
}

// -------------------------------------------------------------------- solve

int run_solve(const RunConfig& cfg) {
  ConfigValidator v;
  std::string kind = cfg.get_string("kind", "");
  v.require(!kind.empty(), "missing required key 'kind' (problem instance)");
  std::string subroutine = cfg.get_string("subroutine", "dp");
  v.require(subroutine == "dp" || subroutine == "exact",
            "'subroutine' must be 'dp' or 'exact'");
  bool exact = subroutine == "exact";
  if (!exact)
    v.require(cfg.has("epsilon"),
              "missing required key 'epsilon' (privacy budget; required "
              "unless subroutine=exact)");
  long n = cfg.get_long("n", 1024);
  v.require(n >= 4, "'n' must be >= 4 (recursion needs n/log2(n) >= 1)");
  uint64_t seed = static_cast<uint64_t>(cfg.get_long("seed", 1));
  double eps = exact ? 0.0 : cfg.get_double("epsilon", 1.0);
  double delta = cfg.get_double("delta", 1e-5);
  if (!exact && cfg.has("epsilon"))
    v.require(eps > 0.0, "'epsilon' must be > 0 (privacy budget)");
  v.require(delta > 0.0 && delta <= 1.0,
            "'delta' must lie in (0,1] (privacy budget)");
  double lambda_ov = cfg.get_double("lambda", 0.0);
  double eta_ov = cfg.get_double("eta", 0.0);
  double acc = cfg.get_double("accountant_constant", 1.0);
  double exact_tol = cfg.get_double("exact_tolerance", 1e-9);

  ProblemInstance inst;
  bool have_instance = false;
  if (!kind.empty()) {
    try {
      inst = make_instance(kind, cfg.numeric_with_prefix("problem."));
      have_instance = true;
    } catch (const std::exception& e) {
      v.require(false, std::string(e.what()));
    }
  }
  bool svi = have_instance && !is_ssp(inst.kind);
  std::string solver = cfg.get_string(
      "solver", !have_instance ? "rr_ssp" : (svi ? "rr_svi" : "rr_ssp"));
  v.require(solver == "rr_ssp" || solver == "rr_svi" ||
                solver == "mirror_prox_only",
            "'solver' must be one of rr_ssp, rr_svi, mirror_prox_only");
  if (have_instance && solver != "mirror_prox_only") {
    double D = product_diameter(inst.geometry, inst.constraint);
    double L = inst.operator_bound;
    double kappa = inst.geometry.kappa;
    double floor = (solver == "rr_svi")
                       ? L * std::sqrt(kappa) / (D * std::sqrt(double(n)))
                       : L * kappa / (D * std::sqrt(double(n)));
    if (lambda_ov > 0.0)
      v.require(lambda_ov >= floor,
                "'lambda' is below the recursion admissibility floor " +
                    std::to_string(floor) +
                    (solver == "rr_svi" ? " = L sqrt(kappa)/(D sqrt(n))"
                                        : " = L kappa/(D sqrt(n))"));
    v.require(svi == (solver == "rr_svi"),
              "'solver' " + solver + " does not match the operator mode of '" +
                  kind + "' (use " + (svi ? "rr_svi" : "rr_ssp") + ")");
  }
  v.finish();

  double D = product_diameter(inst.geometry, inst.constraint);
  double L = inst.operator_bound;
  double kappa = inst.geometry.kappa;

  Dataset data = sample_dataset(inst, static_cast<int>(n),
                                derive_seed(seed, 0x646174, 0));

  Vec z;
  long grad_evals = 0;
  double wall_ms = 0.0;
  std::vector<std::string> extra;
  if (solver == "mirror_prox_only") {
    long T = cfg.get_long("iterations", 1000);
    if (T < 1) throw DomainError("'iterations' must be >= 1");
    MirrorProxConfig mp;
    mp.iterations = T;
    mp.psi_center = inst.constraint.canonical_point();
    mp.psi_scale = kappa;
    mp.distance_bound = D;
    mp.eta = eta_ov > 0.0 ? eta_ov : D / (L * std::sqrt(double(T)));
    mp.seed = seed;
    mp.output_mode = svi ? OutputMode::RandomIterate : OutputMode::Average;
    SolverRun run = mirror_prox(
        [&](ConstSpan zz) { return inst.empirical_operator(zz, data); },
        inst.geometry, inst.constraint, mp);
    z = run.final_point;
    grad_evals = run.log.total_grad_evals;
    wall_ms = run.wall_ms;
    extra.push_back("result.iterations=" + std::to_string(T));
  } else {
    long n_prime = static_cast<long>(
        std::floor(double(n) / std::log2(double(n))));
    double lambda = lambda_ov > 0.0
                        ? lambda_ov
                        : lambda_default(svi, 0.0, kappa, L,
                                         inst.operator_lipschitz, n_prime, D);
    Subroutine sub;
    if (exact) {
      sub = make_exact_subroutine(exact_tol);
    } else {
      PrivacyBudget budget(eps, delta);
      OutputMode mode = svi ? OutputMode::RandomIterate : OutputMode::Average;
      sub = [budget, mode, acc, eta_ov](const SubroutineContext& ctx) {
        return dp_mirror_prox(ctx, budget, mode, acc, eta_ov);
      };
    }
    RecursionResult run =
        svi ? recursive_regularization_svi(data, inst, sub, lambda, seed)
            : recursive_regularization_ssp(data, inst, sub, lambda, seed);
    z = run.final_point;
    grad_evals = run.log.total_grad_evals;
    wall_ms = run.wall_ms;
    std::ostringstream lam;
    lam.precision(12);
    lam << "result.lambda=" << run.schedule.lambda;
    extra.push_back(lam.str());
    extra.push_back("result.rounds=" + std::to_string(run.schedule.rounds));
    extra.push_back("result.chunk_size=" +
                    std::to_string(run.schedule.chunk_size));
    std::ostringstream rad;
    rad.precision(12);
    rad << "result.final_radius="
        << run.schedule.diameter * std::ldexp(1.0, -int(run.schedule.rounds));
    extra.push_back(rad.str());
  }

  ConstSpan zs(z);
  double gap = svi ? vi_gap(inst, zs).gap_value
                   : sp_gap(inst, zs.first(inst.dim_w()),
                            zs.subspan(inst.dim_w()))
                         .gap_value;

  std::cout.precision(12);
  std::cout << "gap=" << gap << " grad_evals=" << grad_evals
            << " final_point=[" << format_vec(zs) << "]\n";

  SweepResult result;
  SweepCell cell;
  cell.kind = kind_name(inst.kind);
  cell.n = n;
  cell.d = inst.dim();
  cell.epsilon = eps;
  cell.delta = delta;
  cell.seed = seed;
  cell.gap = gap;
  cell.grad_evals = grad_evals;
  cell.wall_ms = wall_ms;
  result.cells.push_back(cell);
  SweepAggregate agg;
  agg.n = n;
  agg.epsilon = eps;
  agg.mean_gap = gap;
  agg.mean_grad_evals = static_cast<double>(grad_evals);
  agg.valid_seeds = 1;
  result.aggregates.push_back(agg);

  std::ostringstream gline;
  gline.precision(12);
  gline << "result.gap=" << gap;
  extra.push_back(gline.str());
  extra.push_back("result.final_point=" + format_vec(zs));
  extra.push_back("result.grad_evals=" + std::to_string(grad_evals));

  write_sweep_artifacts(output_dir(cfg), cfg, result, extra);
  return 0;
}

// -------------------------------------------------------------------- sweep

int run_sweep(const RunConfig& cfg) {
  ConfigValidator v;
  SweepConfig sc;
  sc.kind = cfg.get_string("kind", "");
  v.require(!sc.kind.empty(), "missing required key 'kind' (problem instance)");
  std::string subroutine = cfg.get_string("subroutine", "dp");
  v.require(subroutine == "dp" || subroutine == "exact",
            "'subroutine' must be 'dp' or 'exact'");
  sc.exact_subroutine = subroutine == "exact";
  if (!sc.exact_subroutine)
    v.require(cfg.has("epsilon") || cfg.has("eps_values"),
              "missing required key 'epsilon' (or 'eps_values'; privacy "
              "budget; required unless subroutine=exact)");
  sc.n_values = cfg.get_long_list("n_values", {256, 512, 1024, 2048});
  for (long n : sc.n_values)
    v.require(n >= 4, "'n_values' entries must be >= 4");
  if (cfg.has("eps_values")) {
    sc.eps_values = cfg.get_double_list("eps_values", {1.0});
  } else {
    sc.eps_values = {cfg.get_double("epsilon", 1.0)};
  }
  for (double e : sc.eps_values)
    v.require(e > 0.0, "'eps_values' entries must be > 0");
  sc.delta = cfg.get_double("delta", 1e-5);
  v.require(sc.delta > 0.0 && sc.delta <= 1.0,
            "'delta' must lie in (0,1] (privacy budget)");
  sc.seeds = static_cast<int>(cfg.get_long("seeds", 20));
  v.require(sc.seeds >= 1, "'seeds' must be >= 1");
  sc.base_seed = static_cast<uint64_t>(cfg.get_long("seed", 1));
  sc.lambda_override = cfg.get_double("lambda", 0.0);
  sc.eta_override = cfg.get_double("eta", 0.0);
  sc.accountant_constant = cfg.get_double("accountant_constant", 1.0);
  sc.exact_tolerance = cfg.get_double("exact_tolerance", 1e-9);
  long parallel = cfg.get_long("parallel", 1);
  v.require(parallel >= 1, "'parallel' must be >= 1");
  if (!sc.kind.empty()) {
    try {
      make_instance(sc.kind, cfg.numeric_with_prefix("problem."));
      sc.params = cfg.numeric_with_prefix("problem.");
    } catch (const std::exception& e) {
      v.require(false, std::string(e.what()));
    }
  }
  v.finish();
  if (parallel > 1)
    std::cerr << "note: sweep parallelism > 1 is not implemented; "
                 "running serially\n";

  SweepResult result = rate_sweep(sc);

  std::cout.precision(6);
  long failed = 0;
  for (const auto& cell : result.cells)
    if (cell.failed) ++failed;
  std::cout << "cells=" << result.cells.size() << " failed=" << failed << '\n';
  if (result.fit.valid) {
    std::cout << "slope=" << result.fit.slope
              << " half_width=" << result.fit.half_width
              << " cells_used=" << result.fit.cells_used
              << (result.fit.used_all_cells ? " (all cells)" : "") << '\n';
  } else {
    std::cout << "slope fit unavailable (too few valid aggregates)\n";
  }

  std::vector<std::string> extra;
  if (result.fit.valid) {
    std::ostringstream fit;
    fit.precision(12);
    fit << "result.slope=" << result.fit.slope
        << "\nresult.half_width=" << result.fit.half_width
        << "\nresult.cells_used=" << result.fit.cells_used;
    extra.push_back(fit.str());
  }
  write_sweep_artifacts(output_dir(cfg), cfg, result, extra);
  return failed == 0 ? 0 : 1;
}

// ----------------------------------------------------------------- diagnose

int run_diagnose(const RunConfig& cfg) {
  ConfigValidator v;
  std::string kind = cfg.get_string("kind", "");
  v.require(!kind.empty(), "missing required key 'kind' (problem instance)");
  double weight = cfg.get_double("weight", 1.0);
  v.require(weight > 0.0, "'weight' must be > 0 (regularization strength)");
  long n = cfg.get_long("n", 50);
  v.require(n >= 1, "'n' must be >= 1");
  long trials = cfg.get_long("trials", 100);
  v.require(trials >= 1, "'trials' must be >= 1");
  uint64_t seed = static_cast<uint64_t>(cfg.get_long("seed", 1));
  ProblemInstance inst;
  bool have_instance = false;
  if (!kind.empty()) {
    try {
      inst = make_instance(kind, cfg.numeric_with_prefix("problem."));
      have_instance = true;
    } catch (const std::exception& e) {
      v.require(false, std::string(e.what()));
    }
  }
  v.finish();
  (void)have_instance;

  struct Row {
    std::string check;
    bool pass;
    double value;
    double bound;
  };
  std::vector<Row> rows;

  UasProbeResult uas = uas_probe(inst, weight, n, static_cast<int>(trials),
                                 derive_seed(seed, 0x756173, 0));
  rows.push_back({"argument_stability", uas.pass, uas.max_distance, uas.bound});

  StabilityProbeResult stab = stability_generalization_probe(
      inst, weight, n, static_cast<int>(trials), derive_seed(seed, 0x7374, 0));
  rows.push_back({"generalization_gap", stab.pass, stab.mean_diff,
                  stab.bound + 3.0 * stab.stderr_diff});

  if (inst.kind == ProblemKind::LinearVi ||
      inst.kind == ProblemKind::ScalarSquareVi) {
    RngStream rng(derive_seed(seed, 0x6571, 0));
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      Vec zp = random_feasible_point(inst.constraint, rng);
      auto eq = vi_gap_equals_excess_risk_check(inst, zp);
      worst = std::max(worst, eq.residual);
    }
    rows.push_back({"gap_equals_excess_risk", worst <= 1e-9, worst, 1e-9});
  }

  bool all_pass = true;
  std::cout.precision(6);
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    std::cout << r.check << ": " << (r.pass ? "pass" : "FAIL")
              << " value=" << r.value << " bound=" << r.bound << '\n';
  }

  fs::path dir = output_dir(cfg);
  std::ostringstream body;
  body.precision(12);
  body << "check,pass,value,bound\n";
  for (const auto& r : rows)
    body << r.check << ',' << (r.pass ? 1 : 0) << ',' << r.value << ','
         << r.bound << '\n';
  for (const char* name : {"run.csv", "summary.csv"}) {
    std::ofstream out(dir / name);
    out << meta_block(cfg) << body.str();
  }
  {
    std::ofstream out(dir / "plotdata.txt");
    out << meta_block(cfg);
    out.precision(12);
    for (const auto& r : rows)
      out << r.check << ' ' << r.value << ' ' << r.bound << '\n';
  }
  std::vector<std::string> extra;
  for (const auto& r : rows)
    extra.push_back("result." + r.check + ".pass=" +
                    std::string(r.pass ? "1" : "0"));
  write_meta(dir, cfg, extra);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private saddle-point / variational-inequality "
               "experiment harness"};
  app.require_subcommand(1);

  CommonFlags solve_flags, calibrate_flags, sweep_flags, diagnose_flags;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "solve one instance and report the gap");
  attach_common(solve_cmd, solve_flags);
  CLI::App* calibrate_cmd = app.add_subcommand(
      "calibrate", "print the noise schedule for a privacy budget");
  attach_common(calibrate_cmd, calibrate_flags);
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "gap-vs-n rate sweep with a log-log slope fit");
  attach_common(sweep_cmd, sweep_flags);
  CLI::App* diagnose_cmd = app.add_subcommand(
      "diagnose", "stability and consistency probes for one instance");
  attach_common(diagnose_cmd, diagnose_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return run_solve(resolve_config(solve_flags));
    if (calibrate_cmd->parsed())
      return run_calibrate(resolve_config(calibrate_flags));
    if (sweep_cmd->parsed()) return run_sweep(resolve_config(sweep_flags));
    if (diagnose_cmd->parsed())
      return run_diagnose(resolve_config(diagnose_flags));
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
