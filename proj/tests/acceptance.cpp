// End-to-end acceptance gate: ten independent checks, one pass/fail line
// each, nonzero exit when any check fails.  Each check re-derives its
// expected values from scratch (grid searches, closed forms, analytic
// bounds) rather than trusting the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dpvi/evaluation.hpp"

using namespace dpvi;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass,
            const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %2d %-28s %s  (%s)\n", number, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch())
      .count();
}

Vec random_vec(RngStream& rng, int d, double lo, double hi) {
  Vec v(d);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

double rescaled_dist(const ProductGeometry& geom, ConstSpan a, ConstSpan b) {
  return geom.norm(sub(a, b));
}

// piecewise-linear table for u -> u^{expo} on [0, tmax]; cheap enough to
// make the exhaustive grid searches of check 1 run in seconds
struct PowTable {
  double tmax, expo;
  std::vector<double> vals;
  PowTable(double tmax_in, double expo_in, int n)
      : tmax(tmax_in), expo(expo_in), vals(n + 1) {
    for (int i = 0; i <= n; ++i)
      vals[i] = std::pow(tmax * i / n, expo);
  }
  double operator()(double t) const {
    double x = t / tmax * (vals.size() - 1);
    int i = std::min(static_cast<int>(x),
                     static_cast<int>(vals.size()) - 2);
    double frac = x - i;
    return vals[i] * (1.0 - frac) + vals[i + 1] * frac;
  }
};

// ------------------------------------------------------------- check 1

void check_prox_grid() {
  double t0 = now_s();
  double worst = -1e100;
  const double step = 1e-3;
  for (double p : {1.2, 1.5, 2.0}) {
    auto geom = LpGeometry::with_exponent(std::max(p, 1.2), 2, 1.0);
    double pbar = geom.p_bar;
    PowTable sq(6.0, 2.0 / pbar, 1 << 21);

    // grid values shared by every instance at this p
    const int N = 2001;
    std::vector<double> xs(N), xp(N);
    for (int i = 0; i < N; ++i) {
      xs[i] = -1.0 + step * i;
      xp[i] = std::pow(std::abs(xs[i]), p);
    }

    RngStream rng(101 + static_cast<uint64_t>(p * 10));
    auto ball = ConstraintSet::lp_ball(p, 2, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      Vec drift = random_vec(rng, 2, -2.0, 2.0);
      Vec center = random_vec(rng, 2, -0.5, 0.5);
      double s = rng.uniform(0.5, 2.0);
      Vec u = prox_step({}, drift, geom, ball, center, s);
      double nu = lp_norm(sub(u, center), pbar);
      double fu = 0.5 * s * nu * nu + dot(drift, u);

      std::vector<double> ax(N), ay(N), dx(N), dy(N);
      for (int i = 0; i < N; ++i) {
        ax[i] = std::pow(std::abs(xs[i] - center[0]), pbar);
        ay[i] = std::pow(std::abs(xs[i] - center[1]), pbar);
        dx[i] = drift[0] * xs[i];
        dy[i] = drift[1] * xs[i];
      }
      double best = 1e100;
      for (int i = 0; i < N; ++i) {
        double rem = 1.0 + 1e-12 - xp[i];
        if (rem < 0.0) continue;
        for (int j = 0; j < N; ++j) {
          if (xp[j] > rem) continue;
          double f = 0.5 * s * sq(ax[i] + ay[j]) + dx[i] + dy[j];
          if (f < best) best = f;
        }
      }
      worst = std::max(worst, fu - best);
    }

    auto simplex = ConstraintSet::simplex(2);
    for (int trial = 0; trial < 100; ++trial) {
      Vec drift = random_vec(rng, 2, -2.0, 2.0);
      Vec center = random_vec(rng, 2, 0.0, 1.0);
      double s = rng.uniform(0.5, 2.0);
      Vec u = prox_step({}, drift, geom, simplex, center, s);
      double nu = lp_norm(sub(u, center), pbar);
      double fu = 0.5 * s * nu * nu + dot(drift, u);
      double best = 1e100;
      for (int i = 0; i <= 1000; ++i) {
        double x = step * i;
        Vec v{x, 1.0 - x};
        double nv = lp_norm(sub(v, center), pbar);
        best = std::min(best, 0.5 * s * nv * nv + dot(drift, v));
      }
      worst = std::max(worst, fu - best);
    }
  }
  std::ostringstream d;
  d << "max objective excess over grid minimum " << worst << " <= 5e-3, "
    << now_s() - t0 << "s";
  report(1, "prox vs exhaustive grid", worst <= 5e-3, d.str());
}

// ------------------------------------------------------------- check 2

void check_mirror_identities() {
  RngStream rng(202);
  double worst_trip = 0.0, worst_dual = -1e100, worst_fd = 0.0;
  const double ps[] = {1.1, 1.25, 1.5, 2.0};
  const int ds[] = {2, 5, 20};
  for (double p : ps) {
    double pstar = dual_exponent(p);
    for (int d : ds) {
      for (int k = 0; k < 40; ++k) {
        Vec z = random_vec(rng, d, -1.0, 1.0);
        Vec g = grad_half_sq_norm(z, p);
        worst_dual = std::max(worst_dual, lp_norm(g, pstar) - lp_norm(z, p));
        Vec back = inverse_mirror_map(g, p);
        double scale = std::max(1.0, lp_norm(z, 2.0));
        worst_trip = std::max(worst_trip, l2_norm(sub(back, z)) / scale);
      }
    }
  }
  for (int k = 0; k < 150; ++k) {
    double p = ps[k % 4];
    int d = ds[k % 3];
    Vec z = random_vec(rng, d, -1.0, 1.0);
    if (lp_norm(z, 2.0) < 0.1) continue;
    Vec g = grad_half_sq_norm(z, p);
    double h = 1e-6;
    for (int i = 0; i < d; ++i) {
      Vec zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      double np = lp_norm(zp, p), nm = lp_norm(zm, p);
      double fd = (0.5 * np * np - 0.5 * nm * nm) / (2 * h);
      worst_fd = std::max(worst_fd, std::abs(fd - g[i]));
    }
  }
  bool pass =
      worst_trip <= 1e-8 && worst_dual <= 1e-10 && worst_fd <= 1e-5;
  std::ostringstream d;
  d << "round trip " << worst_trip << " <= 1e-8, dual-norm excess "
    << worst_dual << " <= 1e-10, finite diff " << worst_fd << " <= 1e-5";
  report(2, "mirror-map identities", pass, d.str());
}

// ------------------------------------------------------------- check 3

void check_regret_bound() {
  double worst = -1e100;
  auto check_instance = [&](const ProblemInstance& inst, long T) {
    const ProductGeometry& geom = inst.geometry;
    const ConstraintSet& set = inst.constraint;
    double L = inst.operator_bound;
    double D = product_diameter(geom, set);
    MirrorProxConfig cfg;
    cfg.iterations = T;
    cfg.eta = D / (L * std::sqrt(static_cast<double>(T)));
    cfg.psi_center = set.canonical_point();
    cfg.psi_scale = geom.kappa;
    cfg.record_trace = true;
    SolverRun run = mirror_prox(
        [&](ConstSpan z) { return inst.population_operator(z); }, geom, set,
        cfg);
    RngStream rng(303 + T);
    for (int i = 0; i < 40; ++i) {
      Vec z = random_feasible_point(set, rng);
      double regret = 0.0;
      for (const Vec& zt : run.trace)
        regret += dot(inst.population_operator(zt), sub(zt, z)) / T;
      double bound = geom.mirror_value(z, cfg.psi_center, cfg.psi_scale) /
                         (T * cfg.eta) +
                     3.5 * cfg.eta * L * L;
      worst = std::max(worst, regret - bound);
    }
  };
  auto one_d =
      make_bilinear_ssp_explicit(Eigen::MatrixXd::Constant(1, 1, 1.0),
                                 Vec{0.2}, Vec{-0.3}, 2, 2, 1, 1, 0);
  auto five_d = make_bilinear_ssp(5, 5, 2.0, 2.0, 1.0, 1.0, 0.0, 17);
  for (long T : {10L, 100L, 1000L}) {
    check_instance(one_d, T);
    check_instance(five_d, T);
  }
  std::ostringstream d;
  d << "max regret excess over psi(z)/(T eta) + 3.5 eta L^2 is " << worst
    << " <= 0";
  report(3, "mirror prox regret bound", worst <= 1e-9, d.str());
}

// ------------------------------------------------------------- check 4

void check_uas() {
  auto lin = make_linear_vi(3, 2.0, 1.0, Vec{0.4, -0.1, 0.2}, 0.5);
  auto bil = make_bilinear_ssp(1, 1, 2.0, 2.0, 1.0, 1.0, 0.3, 6, false);
  double worst_ratio = 0.0;
  bool pass = true;
  for (long n : {10L, 100L}) {
    for (double lam : {0.5, 1.0, 2.0}) {
      for (const auto* inst : {&lin, &bil}) {
        auto r = uas_probe(*inst, lam, n, 50, 404 + n);
        worst_ratio = std::max(worst_ratio, r.max_distance / r.bound);
        pass = pass && r.max_distance <= r.bound * (1.0 + 1e-6);
      }
    }
  }
  std::ostringstream d;
  d << "50 adjacent pairs per cell, max distance/bound ratio "
    << worst_ratio << " <= 1";
  report(4, "argument stability", pass, d.str());
}

// ------------------------------------------------------------- check 5

void check_stability_generalization() {
  double t0 = now_s();
  auto bil = make_bilinear_ssp(1, 1, 2.0, 2.0, 1.0, 1.0, 0.4, 6, false);
  auto rb = stability_generalization_probe(bil, 1.0, 50, 2000, 505);
  auto lin = make_linear_vi(3, 2.0, 1.0, Vec{0.4, -0.1, 0.2}, 0.5);
  auto rl = stability_generalization_probe(lin, 1.0, 50, 2000, 506);
  bool pass = rb.pass && rl.pass;
  std::ostringstream d;
  d << "saddle mean diff " << rb.mean_diff << " <= " << rb.bound << " + 3*"
    << rb.stderr_diff << "; operator mean diff " << rl.mean_diff << " <= "
    << rl.bound << " + 3*" << rl.stderr_diff << "; 2000 datasets each, "
    << now_s() - t0 << "s";
  report(5, "stability => generalization", pass, d.str());
}

// ------------------------------------------------------------- check 6

void check_calibration() {
  ProductGeometry geom(LpGeometry(2.0, 5, 0.5, 1.0),
                       LpGeometry(2.0, 5, 0.5, 1.0));
  auto cal = calibrate(PrivacyBudget(1.0, 1e-5), geom, 1.0, 1.0, 1000, 5, 5);
  bool pass = cal.iterations == 1000 && cal.batch_size == 32 &&
              std::abs(cal.sigma_w - 0.10730) <= 1e-5;

  RngStream rng(606);
  double worst_sigma = 1e100, worst_T = 1e100;
  for (int k = 0; k < 100; ++k) {
    double eps = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    double delta = std::exp(rng.uniform(std::log(1e-8), std::log(1e-2)));
    long n = 10 + static_cast<long>(rng.index(10000));
    int dw = 1 + static_cast<int>(rng.index(50));
    int dt = 1 + static_cast<int>(rng.index(50));
    ProductGeometry g(LpGeometry(rng.uniform(1.0, 2.0), dw, 1.0),
                      LpGeometry(rng.uniform(1.0, 2.0), dt, 1.0));
    double Lw = rng.uniform(0.1, 5.0), Lt = rng.uniform(0.1, 5.0);
    auto c = calibrate(PrivacyBudget(eps, delta), g, Lw, Lt, n, dw, dt);
    double log1d = std::log(1.0 / delta);
    double floor_w = g.w_geom.scale * Lw *
                     std::sqrt(double(c.iterations) * log1d) / (n * eps);
    double floor_t = g.theta_geom->scale * Lt *
                     std::sqrt(double(c.iterations) * log1d) / (n * eps);
    worst_sigma = std::min(
        {worst_sigma, c.sigma_w - floor_w * (1 - 1e-12),
         c.sigma_theta - floor_t * (1 - 1e-12)});
    if (c.batch_size < n)
      worst_T = std::min(worst_T,
                         double(c.iterations) -
                             double(n) * n * eps /
                                 (double(c.batch_size) * c.batch_size));
  }
  pass = pass && worst_sigma >= 0.0 && worst_T >= -1e-6;
  std::ostringstream d;
  d << "worked example T=" << cal.iterations << " m=" << cal.batch_size
    << " sigma_w=" << cal.sigma_w
    << "; 100-point grid: min sigma slack " << worst_sigma
    << ", min T - n^2 eps/m^2 slack " << worst_T;
  report(6, "noise calibration", pass, d.str());
}

// ------------------------------------------------------------- check 7

void check_noiseless_recursion() {
  bool pass = true;
  std::ostringstream d;

  auto run_case = [&](const ProblemInstance& inst, bool svi, double lambda,
                      int n, const char* label) {
    Dataset data = sample_dataset(inst, n, 3);
    auto res = svi ? recursive_regularization_svi(
                         data, inst, make_exact_subroutine(1e-11), lambda, 7)
                   : recursive_regularization_ssp(
                         data, inst, make_exact_subroutine(1e-11), lambda, 7);
    double D = product_diameter(inst.geometry, inst.constraint);
    double radius = D / std::pow(2.0, double(res.schedule.rounds));
    Vec star = inst.population_truth().equilibrium;
    double dist = rescaled_dist(inst.geometry, res.final_point, star);
    bool ok = dist <= radius + 1e-6;
    pass = pass && ok;
    d << label << " dist " << dist << " <= " << radius << "; ";
  };
  // lambda = L/(16 D) for four rounds
  {
    auto bil = make_bilinear_ssp_explicit(
        Eigen::MatrixXd::Constant(1, 1, 1.0), Vec{0.2}, Vec{-0.3}, 2, 2, 1,
        1, 0);
    double D = product_diameter(bil.geometry, bil.constraint);
    run_case(bil, false, bil.operator_bound / (16.0 * D), 1024, "bilinear");
  }
  {
    auto quad = make_quadratic_scsc_ssp(3, 3, 1.0, 1.0, 2.0, 0.0, 33);
    double D = product_diameter(quad.geometry, quad.constraint);
    run_case(quad, false, quad.operator_bound / (16.0 * D), 2048,
             "quadratic");
  }
  run_case(make_scalar_square_vi(), true, 0.125, 256, "scalar");

  // every intermediate regularized operator stays <= 5L-bounded
  RngStream rng(707);
  double worst_ratio = 0.0;
  auto bound_case = [&](const ProblemInstance& inst, bool svi) {
    double D = product_diameter(inst.geometry, inst.constraint);
    double L = inst.operator_bound;
    double kappa = inst.geometry.kappa;
    double lambda = svi ? L / (kappa * D * 16.0) : L / (D * 16.0);
    RegularizedProblem rp(inst, svi);
    Vec anchor = inst.constraint.canonical_point();
    Dataset data = sample_dataset(inst, 60, 17);
    for (int t = 1; t <= 4; ++t) {
      rp.add_round(std::ldexp(lambda, t), anchor);
      anchor = random_feasible_point(inst.constraint, rng);
      worst_ratio = std::max(worst_ratio, rp.operator_bound() / (5.0 * L));
      for (const auto& x : data.samples) {
        Vec z = random_feasible_point(inst.constraint, rng);
        worst_ratio =
            std::max(worst_ratio, inst.geometry.dual_norm(
                                      rp.per_sample_operator(z, x)) /
                                      (5.0 * L));
      }
    }
  };
  bound_case(make_bilinear_ssp(3, 3, 2.0, 2.0, 1.0, 1.0, 0.3, 5), false);
  bound_case(make_linear_vi(4, 2.0, 1.5, Vec{0.3, 0.1, -0.2, 0.0}, 0.4),
             true);
  pass = pass && worst_ratio <= 1.0 + 1e-9;
  d << "max ||regularized op|| / 5L = " << worst_ratio;

  report(7, "noiseless recursion", pass, d.str());
}

// ------------------------------------------------------------- check 8

void check_gap_oracles() {
  auto scalar = make_scalar_square_vi();
  double sp = sp_gap(scalar, Vec{1.0}, Vec{}).gap_value;
  double vi = vi_gap(scalar, Vec{1.0}).gap_value;
  bool pass = std::abs(sp - 1.0) <= 1e-12 && std::abs(vi - 0.5) <= 1e-12;

  auto lin = make_linear_vi(2, 2.0, 1.0, Vec{0.5, -0.25}, 0.5);
  RngStream rng(808);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec z = random_feasible_point(lin.constraint, rng);
    auto chk = vi_gap_equals_excess_risk_check(lin, z);
    worst = std::max(worst, chk.residual);
    pass = pass && chk.pass;
  }
  std::ostringstream d;
  d << "square example sp_gap(1)=" << sp << " vi_gap(1)=" << vi
    << "; max |vi_gap - excess risk| over 100 points " << worst
    << " <= 1e-9";
  report(8, "gap oracles", pass, d.str());
}

// --------------------------------------------------------- checks 9, 10

void check_rate_and_budget() {
  double t0 = now_s();
  SweepConfig cfg;
  cfg.kind = "bilinear_ssp";
  cfg.params = {{"d_w", 5}, {"d_theta", 5}};
  cfg.n_values = {256, 512, 1024, 2048, 4096, 8192};
  cfg.eps_values = {1.0};
  cfg.delta = 1e-5;
  cfg.seeds = 20;
  cfg.base_seed = 1;
  SweepResult res = rate_sweep(cfg);

  double gap_small = 0.0, gap_large = 0.0;
  for (const auto& agg : res.aggregates) {
    if (agg.n == 256) gap_small = agg.mean_gap;
    if (agg.n == 8192) gap_large = agg.mean_gap;
  }
  bool failed_cells = false;
  for (const auto& cell : res.cells) failed_cells |= cell.failed;
  bool pass9 = !failed_cells && res.fit.valid && res.fit.slope >= -0.7 &&
               res.fit.slope <= -0.3 && gap_large < gap_small;
  std::ostringstream d9;
  d9 << "slope " << res.fit.slope << " in [-0.7,-0.3], mean gap "
     << gap_large << " @ n=8192 < " << gap_small << " @ n=256, "
     << now_s() - t0 << "s";
  report(9, "private rate scaling", pass9, d9.str());

  // budget: evals <= 10 sqrt(kappa) min{n^2 eps^1.5 / sqrt(d ln(1/delta)
  // kt), n^{3/2}} per cell (kappa = kt = 1 in this geometry)
  double worst_ratio = 0.0;
  for (const auto& cell : res.cells) {
    if (cell.failed) continue;
    double n = static_cast<double>(cell.n);
    double term_priv = n * n * std::pow(cell.epsilon, 1.5) /
                       std::sqrt(cell.d * std::log(1.0 / cell.delta));
    double budget = 10.0 * std::min(term_priv, std::pow(n, 1.5));
    worst_ratio =
        std::max(worst_ratio, static_cast<double>(cell.grad_evals) / budget);
  }
  std::ostringstream d10;
  d10 << "max grad-eval/budget ratio over " << res.cells.size()
      << " cells is " << worst_ratio << " <= 1";
  report(10, "oracle budget accounting", worst_ratio <= 1.0, d10.str());
}

}  // namespace

int main() {
  check_prox_grid();
  check_mirror_identities();
  check_regret_bound();
  check_uas();
  check_stability_generalization();
  check_calibration();
  check_noiseless_recursion();
  check_gap_oracles();
  check_rate_and_budget();
  if (failures == 0) {
    std::printf("all acceptance checks passed\n");
  } else {
    std::printf("%d acceptance check(s) FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
