#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "dpvi/evaluation.hpp"

using namespace dpvi;

namespace {

ProblemInstance pure_bilinear_1d() {
  Eigen::MatrixXd A(1, 1);
  A(0, 0) = 1.0;
  return make_bilinear_ssp_explicit(A, Vec{0.0}, Vec{0.0}, 2.0, 2.0, 1.0,
                                    1.0, 0.0);
}

}  // namespace

TEST_CASE("saddle-point gap closed forms on the interval example") {
  auto inst = pure_bilinear_1d();
  CHECK(sp_gap(inst, Vec{0.0}, Vec{0.0}).gap_value ==
        doctest::Approx(0.0).epsilon(1e-12));
  auto rep = sp_gap(inst, Vec{1.0}, Vec{0.5});
  CHECK(rep.gap_value == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rep.method == GapMethod::ClosedForm);

  auto scalar = make_scalar_square_vi();
  CHECK(sp_gap(scalar, Vec{1.0}, Vec{}).gap_value == doctest::Approx(1.0));
  // non-domination: the operator gap at the same point is strictly smaller
  CHECK(vi_gap(scalar, Vec{1.0}).gap_value == doctest::Approx(0.5));

  CHECK_THROWS_AS(sp_gap(inst, Vec{5.0}, Vec{0.0}), DomainError);
}

TEST_CASE("quadratic saddle gap matches brute-force inner solves") {
  auto inst = make_quadratic_scsc_ssp(1, 1, 0.7, 1.3, 1.5, 0.0, 11);
  RngStream rng(3);
  for (int k = 0; k < 20; ++k) {
    Vec z = random_feasible_point(inst.constraint, rng);
    Vec w{z[0]}, th{z[1]};
    double gap = sp_gap(inst, w, th).gap_value;
    int N = 200001;
    double r = 1.5, hi = -1e300, lo = 1e300;
    for (int i = 0; i < N; ++i) {
      double t = -r + 2.0 * r * i / (N - 1);
      hi = std::max(hi, inst.population_loss(w, Vec{t}));
      lo = std::min(lo, inst.population_loss(Vec{t}, th));
    }
    CHECK(gap == doctest::Approx(hi - lo).epsilon(1e-7));
    CHECK(gap >= -1e-10);
  }
}

TEST_CASE("group-dro gap matches brute force") {
  auto inst = make_group_dro_ssp(2, 2, 2.0, 1.0, 0.0, 7);
  RngStream rng(5);
  for (int k = 0; k < 10; ++k) {
    Vec z = random_feasible_point(inst.constraint, rng);
    Vec w{z[0], z[1]}, th{z[2], z[3]};
    double gap = sp_gap(inst, w, th).gap_value;
    double hi = -1e300, lo = 1e300;
    int N = 2001;
    for (int i = 0; i < N; ++i) {
      double a = double(i) / (N - 1);
      hi = std::max(hi, inst.population_loss(w, Vec{a, 1.0 - a}));
    }
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        Vec u{-1.0 + 2.0 * i / (N - 1.0), -1.0 + 2.0 * j / (N - 1.0)};
        if (lp_norm(u, 2.0) <= 1.0)
          lo = std::min(lo, inst.population_loss(u, th));
      }
    CHECK(gap == doctest::Approx(hi - lo).epsilon(2e-3));
    CHECK(gap >= -1e-10);
  }
}

TEST_CASE("operator gap closed forms and equilibrium zeros") {
  auto lin = make_linear_vi(2, 2.0, 1.0, Vec{1.0, 0.0}, 0.5);
  auto rep = vi_gap(lin, Vec{0.0, 0.0});
  CHECK(rep.gap_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.method == GapMethod::ClosedForm);

  // the gap vanishes at the population equilibrium (instances with
  // closed-form or strongly monotone truths keep this check fast)
  std::vector<ProblemInstance> zoo;
  zoo.push_back(make_quadratic_scsc_ssp(2, 2, 0.8, 0.6, 1.0, 0.1, 4));
  zoo.push_back(make_linear_vi(3, 2.0, 1.0, Vec{0.3, -0.1, 0.2}, 0.3));
  zoo.push_back(make_affine_monotone_vi(3, 1.0, 0.4, 0.2, 4));
  zoo.push_back(make_scalar_square_vi());
  for (const auto& inst : zoo) {
    Vec star = inst.population_truth().equilibrium;
    double g = vi_gap(inst, star).gap_value;
    CHECK(g <= 1e-6);
    CHECK(g >= -1e-8);
  }

  // interior bilinear saddle computed directly from the offsets
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.2, -0.3, 0.8;
  auto bil = make_bilinear_ssp_explicit(A, Vec{0.1, -0.2}, Vec{0.15, 0.1},
                                        2.0, 2.0, 1.0, 1.0, 0.0);
  Eigen::Vector2d be(0.1, -0.2), ce(0.15, 0.1);
  Eigen::Vector2d ts = -A.fullPivLu().solve(be);
  Eigen::Vector2d ws = -A.transpose().fullPivLu().solve(ce);
  Vec star = {ws(0), ws(1), ts(0), ts(1)};
  REQUIRE(bil.constraint.contains(star, 1e-9));
  double gb = vi_gap(bil, star).gap_value;
  CHECK(gb <= 1e-9);
  CHECK(gb >= -1e-9);
  CHECK(sp_gap(bil, Vec{ws(0), ws(1)}, Vec{ts(0), ts(1)}).gap_value <=
        1e-9);
}

TEST_CASE("operator gap dominates probe inner products") {
  RngStream rng(9);
  std::vector<ProblemInstance> zoo;
  zoo.push_back(make_bilinear_ssp(2, 2, 2.0, 2.0, 1.0, 1.0, 0.2, 4, false));
  zoo.push_back(make_quadratic_scsc_ssp(2, 2, 0.8, 0.6, 1.0, 0.1, 4));
  zoo.push_back(make_affine_monotone_vi(2, 1.0, 0.3, 0.2, 4));
  for (const auto& inst : zoo) {
    for (int k = 0; k < 30; ++k) {
      Vec zh = random_feasible_point(inst.constraint, rng);
      double gap = vi_gap(inst, zh).gap_value;
      CHECK(gap >= -1e-7);
      for (int j = 0; j < 10; ++j) {
        Vec probe = random_feasible_point(inst.constraint, rng);
        Vec g = inst.population_operator(probe);
        CHECK(gap >= dot(g, sub(zh, probe)) - 1e-7);
      }
    }
  }
}

TEST_CASE("grid cross-checks of the operator gap") {
  // scalar: 1e-3 resolution
  auto scalar = make_scalar_square_vi();
  for (double z : {0.0, 0.3, 0.8, 1.0}) {
    double exact = vi_gap(scalar, Vec{z}).gap_value;
    double grid = vi_gap_grid(scalar, Vec{z}, 1001);
    CHECK(std::abs(exact - grid) <= 5e-3);
  }
  // linear d = 2
  auto lin = make_linear_vi(2, 2.0, 1.0, Vec{0.7, -0.4}, 0.0);
  RngStream rng(2);
  for (int k = 0; k < 5; ++k) {
    Vec zh = random_feasible_point(lin.constraint, rng);
    double exact = vi_gap(lin, zh).gap_value;
    double grid = vi_gap_grid(lin, zh, 301);
    CHECK(grid <= exact + 1e-9);
    CHECK(exact - grid <= 2e-2);
  }
  // affine monotone d = 2, ascent path
  auto aff = make_affine_monotone_vi(2, 1.0, 0.3, 0.0, 8);
  for (int k = 0; k < 5; ++k) {
    Vec zh = random_feasible_point(aff.constraint, rng);
    auto rep = vi_gap(aff, zh);
    CHECK(rep.method == GapMethod::ExactInnerSolve);
    double grid = vi_gap_grid(aff, zh, 301);
    CHECK(grid <= rep.gap_value + 1e-7);
    CHECK(rep.gap_value - grid <= 5e-2);
  }
}

TEST_CASE("gap functional is sqrt(2) L Lipschitz") {
  RngStream rng(19);
  std::vector<ProblemInstance> zoo;
  zoo.push_back(make_bilinear_ssp(2, 2, 2.0, 2.0, 1.0, 1.0, 0.2, 4, false));
  zoo.push_back(make_quadratic_scsc_ssp(2, 2, 0.8, 0.6, 1.0, 0.1, 4));
  zoo.push_back(make_group_dro_ssp(2, 3, 2.0, 1.0, 0.1, 4));
  for (const auto& inst : zoo) {
    double L = inst.operator_bound;
    int dw = inst.dim_w();
    for (int k = 0; k < 200; ++k) {
      Vec z1 = random_feasible_point(inst.constraint, rng);
      Vec z2 = random_feasible_point(inst.constraint, rng);
      ConstSpan s1(z1), s2(z2);
      double g1 = sp_gap(inst, s1.first(dw), s1.subspan(dw)).gap_value;
      double g2 = sp_gap(inst, s2.first(dw), s2.subspan(dw)).gap_value;
      double dist = inst.geometry.norm(sub(z1, z2));
      CHECK(std::abs(g1 - g2) <=
            std::sqrt(2.0) * L * dist * (1.0 + 1e-9) + 1e-9);
    }
  }
}

TEST_CASE("operator gap equals excess risk for linear operators") {
  auto lin = make_linear_vi(2, 2.0, 1.0, Vec{1.0, 0.0}, 0.4);
  auto chk = vi_gap_equals_excess_risk_check(lin, Vec{0.0, 0.0});
  CHECK(chk.pass);
  CHECK(chk.residual <= 1e-12);
  Vec star = lin.population_truth().equilibrium;
  CHECK(vi_gap_equals_excess_risk_check(lin, star).pass);
  RngStream rng(23);
  for (int k = 0; k < 100; ++k) {
    Vec z = random_feasible_point(lin.constraint, rng);
    auto c = vi_gap_equals_excess_risk_check(lin, z);
    CHECK(c.pass);
    CHECK(c.residual <= 1e-9);
  }
  CHECK_THROWS_AS(
      vi_gap_equals_excess_risk_check(make_scalar_square_vi(), Vec{0.5}),
      DomainError);
}

TEST_CASE("relative-accuracy diagnostics") {
  auto inst = pure_bilinear_1d();
  RegularizedProblem bare(inst, false);
  Dataset data = sample_dataset(inst, 8, 3);
  Vec star{0.0, 0.0};

  // at the saddle both values vanish
  auto [hs0, hd0] = h_diagnostic(bare, star, star, data);
  CHECK(std::abs(hd0) <= 1e-12);
  CHECK(std::abs(hs0) <= 1e-12);
  // unregularized bilinear at (1, 0.5): F(1, 0) - F(0, 0.5) = 0
  auto [hs1, hd1] = h_diagnostic(bare, star, Vec{1.0, 0.5}, data);
  CHECK(std::abs(hd1) <= 1e-12);
  CHECK(std::abs(hs1) <= 1e-12);

  // strongly regularized round: H_D dominates the squared distance
  RegularizedProblem rp(inst, false);
  rp.add_round(0.7, Vec{0.2, -0.1});
  Operator pop = [&](ConstSpan z) { return rp.population_operator(z); };
  ViSolveOptions opts;
  opts.tolerance = 1e-11;
  Vec zs = vi_solve(pop, inst.geometry, inst.constraint, opts);
  double mu = rp.strong_monotonicity();
  RngStream rng(31);
  for (int k = 0; k < 100; ++k) {
    Vec z = random_feasible_point(inst.constraint, rng);
    auto [hs, hd] = h_diagnostic(rp, zs, z, data);
    double d = inst.geometry.norm(sub(z, zs));
    CHECK(hd >= 0.5 * mu * d * d - 1e-9);
  }

  // operator-mode diagnostics agree with the inner-product definition
  auto lin = make_linear_vi(2, 2.0, 1.0, Vec{0.5, 0.2}, 0.3);
  RegularizedProblem rv(lin, true);
  rv.add_round(1.0, Vec{0.0, 0.0});
  Dataset ld = sample_dataset(lin, 16, 9);
  Vec lz{0.3, -0.2}, ls{0.1, 0.0};
  auto [lhs, lhd] = h_diagnostic(rv, ls, lz, ld);
  CHECK(lhd == doctest::Approx(
                   dot(rv.population_operator(lz), sub(lz, ls))));
  Vec emp = rv.empirical_operator(lz, ld);
  CHECK(lhs == doctest::Approx(dot(emp, sub(lz, ls))));
}

TEST_CASE("mean sample collapse preserves the empirical operator") {
  RngStream rng(71);
  std::vector<ProblemInstance> zoo;
  zoo.push_back(make_bilinear_ssp(2, 2, 2.0, 2.0, 1.0, 1.0, 0.3, 4, false));
  zoo.push_back(make_group_dro_ssp(2, 2, 2.0, 1.0, 0.2, 4));
  zoo.push_back(make_linear_vi(3, 2.0, 1.0, Vec{0.1, 0.2, 0.3}, 0.5));
  for (const auto& inst : zoo) {
    Dataset data = sample_dataset(inst, 40, 6);
    Dataset mean = mean_sample_dataset(data);
    for (int k = 0; k < 20; ++k) {
      Vec z = random_feasible_point(inst.constraint, rng);
      Vec a = inst.empirical_operator(z, data);
      Vec b = inst.empirical_operator(z, mean);
      for (size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("argument stability probe") {
  auto lin = make_linear_vi(3, 2.0, 1.0, Vec{0.4, -0.1, 0.2}, 0.5);
  auto bil = make_bilinear_ssp(1, 1, 2.0, 2.0, 1.0, 1.0, 0.3, 6, false);
  for (long n : {10L, 100L}) {
    for (double lam : {0.5, 1.0, 2.0}) {
      auto r1 = uas_probe(lin, lam, n, 10, 44);
      CHECK(r1.pass);
      auto r2 = uas_probe(bil, lam, n, 10, 45);
      CHECK(r2.pass);
    }
  }
  // doubling n halves the bound and the observation tracks it
  auto a = uas_probe(lin, 1.0, 10, 10, 46);
  auto b = uas_probe(lin, 1.0, 20, 10, 46);
  CHECK(b.bound == doctest::Approx(a.bound / 2.0));
  CHECK(b.max_distance <= b.bound * (1.0 + 1e-6));
}

TEST_CASE("stability bounds the generalization of the diagnostics") {
  // point-mass distribution: empirical and population values coincide
  auto det = pure_bilinear_1d();
  auto r0 = stability_generalization_probe(det, 1.0, 20, 10, 3);
  CHECK(std::abs(r0.mean_diff) <= 1e-9);
  CHECK(r0.pass);

  auto bil = make_bilinear_ssp(1, 1, 2.0, 2.0, 1.0, 1.0, 0.4, 6, false);
  auto rb = stability_generalization_probe(bil, 1.0, 50, 400, 5);
  CHECK(rb.pass);
  CHECK(rb.bound > 0.0);

  auto lin = make_linear_vi(3, 2.0, 1.0, Vec{0.4, -0.1, 0.2}, 0.5);
  auto rl = stability_generalization_probe(lin, 1.0, 50, 400, 7);
  CHECK(rl.pass);
}

TEST_CASE("rate sweep in noiseless exact mode") {
  SweepConfig cfg;
  cfg.kind = "bilinear_ssp";
  cfg.params = {{"d_w", 1}, {"d_theta", 1}, {"p", 2},       {"q", 2},
                {"radius_w", 1}, {"radius_theta", 1}, {"noise", 0},
                {"param_seed", 12}, {"zero_offsets", 0}};
  cfg.n_values = {256};
  cfg.seeds = 2;
  cfg.exact_subroutine = true;
  cfg.exact_tolerance = 1e-10;
  auto res = rate_sweep(cfg);
  REQUIRE(res.cells.size() == 2);
  auto inst = make_instance(cfg.kind, cfg.params);
  double D = product_diameter(inst.geometry, inst.constraint);
  double L = inst.operator_bound;
  long n_prime = static_cast<long>(std::floor(256.0 / std::log2(256.0)));
  double lambda = lambda_default(false, 0.0, inst.geometry.kappa, L,
                                 inst.operator_lipschitz, n_prime, D);
  auto sch = RecursionSchedule::build(false, 256, L, D, inst.geometry.kappa,
                                      lambda);
  double radius = D / std::pow(2.0, double(sch.rounds));
  for (const auto& cell : res.cells) {
    CHECK(!cell.failed);
    // final Lipschitz step: gap within sqrt(2) L of the distance bound
    CHECK(cell.gap <= std::sqrt(2.0) * L * radius + 1e-6);
    CHECK(cell.gap >= -1e-9);
  }
}

TEST_CASE("rate sweep with the private pipeline") {
  SweepConfig cfg;
  cfg.kind = "bilinear_ssp";
  cfg.params = {{"d_w", 5}, {"d_theta", 5}, {"p", 2},       {"q", 2},
                {"radius_w", 1}, {"radius_theta", 1}, {"noise", 0.3},
                {"param_seed", 12}, {"zero_offsets", 0}};
  cfg.n_values = {64, 128, 256, 512};
  cfg.eps_values = {1.0};
  cfg.seeds = 4;
  cfg.base_seed = 99;
  auto res = rate_sweep(cfg);
  CHECK(res.cells.size() == 16);
  for (const auto& cell : res.cells) {
    CHECK(!cell.failed);
    CHECK(cell.gap >= -1e-9);
    CHECK(cell.grad_evals > 0);
  }
  REQUIRE(res.aggregates.size() == 4);
  for (const auto& agg : res.aggregates) CHECK(agg.valid_seeds == 4);
  CHECK(res.fit.valid);
  // the gap must trend downward over an 8x range of n
  CHECK(res.fit.slope < 0.0);

  // deterministic outputs for identical config (timing column excluded:
  // wall-clock measurements are the only nondeterministic field)
  auto strip_timing = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
      out += line.substr(0, line.rfind(','));
      out += '\n';
    }
    return out;
  };
  auto res2 = rate_sweep(cfg);
  std::ostringstream a, b;
  write_run_csv(res, a);
  write_run_csv(res2, b);
  CHECK(strip_timing(a.str()) == strip_timing(b.str()));
  CHECK(a.str().rfind("kind,n,d,epsilon,delta,seed,gap,grad_evals,wall_ms",
                      0) == 0);

  std::ostringstream s, p;
  write_summary_csv(res, s);
  write_plotdata(res, p);
  CHECK(s.str().find("slope,") != std::string::npos);
  CHECK(!p.str().empty());
}
