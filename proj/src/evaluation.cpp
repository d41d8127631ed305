#include "dpvi/evaluation.hpp"

#include <Eigen/Dense>
#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace dpvi {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

const ConstraintSet& block_set(const ConstraintSet& set, int index) {
  if (set.kind == ConstraintSet::Kind::Product) return set.children[index];
  if (index != 0) throw DomainError("block_set: no dual block");
  return set;
}

double linear_max(const ConstraintSet& set, ConstSpan g) {
  return -linear_min(set, scaled(g, -1.0));
}

// max over the l2 ball (radius r, centered at the origin) of
// <g, u> - (mu/2) ||u||^2; mu >= 0, mu = 0 reduces to r ||g||.
double concave_ball_max(ConstSpan g, double mu, double r) {
  double ng = l2_norm(g);
  if (ng == 0.0) return 0.0;
  double t = mu > 0.0 ? std::min(1.0 / mu, r / ng) : r / ng;
  return t * ng * ng - 0.5 * mu * t * t * ng * ng;
}

// Affine form G(z) = M z + q of the population operator.
struct AffineOperator {
  Eigen::MatrixXd M;
  Vec q;
  bool skew = false;
};

AffineOperator population_affine(const ProblemInstance& inst) {
  int dw = inst.dim_w(), dt = inst.dim_theta(), d = inst.dim();
  AffineOperator op;
  op.M = Eigen::MatrixXd::Zero(d, d);
  op.q = Vec(d, 0.0);
  switch (inst.kind) {
    case ProblemKind::BilinearSsp:
    case ProblemKind::QuadraticScscSsp:
      op.M.block(0, dw, dw, dt) = inst.A;
      op.M.block(dw, 0, dt, dw) = -inst.A.transpose();
      for (int i = 0; i < dw; ++i) op.q[i] = inst.b[i];
      for (int j = 0; j < dt; ++j) op.q[dw + j] = -inst.c[j];
      if (inst.kind == ProblemKind::QuadraticScscSsp) {
        for (int i = 0; i < dw; ++i) op.M(i, i) += inst.mu_w;
        for (int j = 0; j < dt; ++j) op.M(dw + j, dw + j) += inst.mu_theta;
      } else {
        op.skew = true;
      }
      return op;
    case ProblemKind::GroupDroSsp:
      op.M.block(0, dw, dw, dt) = inst.group_means.transpose();
      op.M.block(dw, 0, dt, dw) = -inst.group_means;
      op.skew = true;
      return op;
    case ProblemKind::LinearVi:
      op.q = inst.population_operator(Vec(d, 0.0));
      op.skew = true;
      return op;
    case ProblemKind::AffineMonotoneVi:
      op.M = inst.A;
      op.q = inst.b;
      return op;
    case ProblemKind::ScalarSquareVi:
      op.M(0, 0) = 2.0;
      return op;
  }
  throw DomainError("population_affine: bad kind");
}

// Euclidean projection onto an l2 ball or a product of l2 balls.
void project_l2(const ConstraintSet& set, Eigen::VectorXd& z, int offset = 0) {
  if (set.kind == ConstraintSet::Kind::Product) {
    int pos = offset;
    for (const auto& child : set.children) {
      project_l2(child, z, pos);
      pos += child.dimension();
    }
    return;
  }
  if (set.kind != ConstraintSet::Kind::LpBall ||
      std::abs(set.ball_p - 2.0) > 1e-12)
    throw DomainError("project_l2: requires l2 ball blocks");
  int d = set.dim;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
  if (!set.center.empty())
    for (int i = 0; i < d; ++i) c(i) = set.center[i];
  Eigen::VectorXd u = z.segment(offset, d) - c;
  double nn = u.norm();
  if (nn > set.radius) z.segment(offset, d) = c + u * (set.radius / nn);
}

// max over z of phi(z) = <M z + q, z_hat - z>, concave when M + M^T is
// positive semidefinite; solved by accelerated projected gradient ascent
// over the (l2-ball) feasible set.
double concave_affine_max(const AffineOperator& op, ConstSpan z_hat,
                          const ConstraintSet& set, double tolerance) {
  int d = set.dimension();
  Eigen::VectorXd zh(d);
  for (int i = 0; i < d; ++i) zh(i) = z_hat[i];
  Eigen::MatrixXd H = op.M + op.M.transpose();
  Eigen::VectorXd lin = op.M.transpose() * zh;
  for (int i = 0; i < d; ++i) lin(i) -= op.q[i];
  // phi(z) = <q, zh> + <lin, z> - (1/2) z^T H z  (up to the constant)
  double lip = std::max(H.norm(), 1e-12);
  double step = 1.0 / lip;

  Eigen::VectorXd z(d), y(d);
  Vec start = set.canonical_point();
  for (int i = 0; i < d; ++i) z(i) = start[i];
  y = z;
  double momentum = 1.0;
  double residual = 1e300;
  for (long it = 0; it < 2000000; ++it) {
    Eigen::VectorXd grad = lin - H * y;
    Eigen::VectorXd z_new = y + step * grad;
    project_l2(set, z_new);
    residual = (z_new - y).norm() / step;
    double m_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = z_new + ((momentum - 1.0) / m_new) * (z_new - z);
    project_l2(set, y);
    z = z_new;
    momentum = m_new;
    if (residual <= tolerance) break;
  }
  if (residual > std::sqrt(tolerance))
    throw NumericError("vi_gap: inner ascent stalled at residual " +
                       std::to_string(residual));

  Eigen::VectorXd Gz = op.M * z;
  double value = 0.0;
  for (int i = 0; i < d; ++i)
    value += (Gz(i) + op.q[i]) * (z_hat[i] - z(i));
  return value;
}

void require_contains(const ConstraintSet& set, ConstSpan z,
                      const char* what) {
  if (!set.contains(z, 1e-6))
    throw DomainError(std::string(what) + ": point outside the feasible set");
}

// grid points of a set at the given per-dimension resolution
void grid_points(const ConstraintSet& set, int points_per_dim,
                 std::vector<Vec>& out) {
  int d = set.dimension();
  if (set.kind == ConstraintSet::Kind::Product) {
    std::vector<Vec> left, right;
    grid_points(set.children[0], points_per_dim, left);
    grid_points(set.children[1], points_per_dim, right);
    for (const auto& a : left)
      for (const auto& b : right) out.push_back(concat(a, b));
    return;
  }
  if (set.kind == ConstraintSet::Kind::Simplex) {
    // grid over the first d-1 free coordinates
    Vec pt(d, 0.0);
    std::function<void(int, double)> rec = [&](int i, double left) {
      if (i == d - 1) {
        pt[i] = left;
        out.push_back(pt);
        return;
      }
      for (int k = 0; k < points_per_dim; ++k) {
        double v = left * k / (points_per_dim - 1.0);
        pt[i] = v;
        rec(i + 1, left - v);
      }
    };
    rec(0, 1.0);
    return;
  }
  Vec center = set.center.empty() ? Vec(d, 0.0) : set.center;
  Vec pt(d, 0.0);
  std::function<void(int)> rec = [&](int i) {
    if (i == d) {
      if (set.contains(pt, 1e-9)) out.push_back(pt);
      return;
    }
    for (int k = 0; k < points_per_dim; ++k) {
      pt[i] = center[i] - set.radius +
              2.0 * set.radius * k / (points_per_dim - 1.0);
      rec(i + 1);
    }
  };
  rec(0);
}

double h_value_population(const RegularizedProblem& rp, ConstSpan z_star,
                          ConstSpan z) {
  int dw = rp.base->dim_w();
  if (!rp.svi_mode && rp.base->dim_theta() > 0) {
    ConstSpan w = z.first(dw), th = z.subspan(dw);
    ConstSpan ws = z_star.first(dw), ths = z_star.subspan(dw);
    return rp.population_loss(w, ths) - rp.population_loss(ws, th);
  }
  return dot(rp.population_operator(z), sub(z, z_star));
}

double h_value_chunk(const RegularizedProblem& rp, ConstSpan z_star,
                     ConstSpan z, const Dataset& chunk) {
  if (chunk.size() == 0) throw DomainError("h_diagnostic: empty chunk");
  int dw = rp.base->dim_w();
  double acc = 0.0;
  if (!rp.svi_mode && rp.base->dim_theta() > 0) {
    ConstSpan w = z.first(dw), th = z.subspan(dw);
    ConstSpan ws = z_star.first(dw), ths = z_star.subspan(dw);
    for (const auto& x : chunk.samples)
      acc += rp.per_sample_loss(w, ths, x) - rp.per_sample_loss(ws, th, x);
  } else {
    Vec diff = sub(z, z_star);
    for (const auto& x : chunk.samples)
      acc += dot(rp.per_sample_operator(z, x), diff);
  }
  return acc / chunk.size();
}

double kappa_tilde_of(const ProductGeometry& geom, int d) {
  double p = geom.w_geom.p;
  double q = geom.theta_geom ? geom.theta_geom->p : 2.0;
  return 1.0 +
         ((p < 2.0 || q < 2.0) ? std::log(static_cast<double>(d)) : 0.0);
}

}  // namespace

GapReport sp_gap(const ProblemInstance& inst, ConstSpan w_hat,
                 ConstSpan theta_hat) {
  GapReport rep;
  rep.problem = kind_name(inst.kind);
  rep.point = concat(w_hat, theta_hat);
  rep.method = GapMethod::ClosedForm;
  rep.tolerance = 1e-12;
  int dw = inst.dim_w(), dt = inst.dim_theta();
  if (static_cast<int>(w_hat.size()) != dw ||
      static_cast<int>(theta_hat.size()) != dt)
    throw DomainError("sp_gap: dimension mismatch");

  switch (inst.kind) {
    case ProblemKind::BilinearSsp:
    case ProblemKind::QuadraticScscSsp: {
      const ConstraintSet& ws = block_set(inst.constraint, 0);
      const ConstraintSet& ts = block_set(inst.constraint, 1);
      require_contains(ws, w_hat, "sp_gap");
      require_contains(ts, theta_hat, "sp_gap");
      Eigen::Map<const Eigen::VectorXd> we(w_hat.data(), dw);
      Eigen::Map<const Eigen::VectorXd> te(theta_hat.data(), dt);
      Eigen::VectorXd gt = inst.A.transpose() * we;  // dual-side slope
      Eigen::VectorXd gw = inst.A * te;              // primal-side slope
      Vec g_theta(dt), g_w(dw);
      for (int j = 0; j < dt; ++j) g_theta[j] = gt(j) + inst.c[j];
      for (int i = 0; i < dw; ++i) g_w[i] = gw(i) + inst.b[i];
      double max_term, min_term;
      if (inst.kind == ProblemKind::BilinearSsp) {
        max_term = dot(inst.b, w_hat) + linear_max(ts, g_theta);
        min_term = dot(inst.c, theta_hat) + linear_min(ws, g_w);
      } else {
        double sw = 0.5 * inst.mu_w * we.squaredNorm();
        double st = 0.5 * inst.mu_theta * te.squaredNorm();
        max_term = sw + dot(inst.b, w_hat) +
                   concave_ball_max(g_theta, inst.mu_theta, ts.radius);
        min_term = -st + dot(inst.c, theta_hat) -
                   concave_ball_max(scaled(g_w, -1.0), inst.mu_w, ws.radius);
      }
      rep.gap_value = max_term - min_term;
      return rep;
    }
    case ProblemKind::GroupDroSsp: {
      const ConstraintSet& ws = block_set(inst.constraint, 0);
      const ConstraintSet& ts = block_set(inst.constraint, 1);
      require_contains(ws, w_hat, "sp_gap");
      require_contains(ts, theta_hat, "sp_gap");
      double max_term = -1e300;
      for (int j = 0; j < dt; ++j) {
        double v = 0.0;
        for (int i = 0; i < dw; ++i) v += inst.group_means(j, i) * w_hat[i];
        max_term = std::max(max_term, v);
      }
      Vec mix(dw, 0.0);
      for (int j = 0; j < dt; ++j)
        for (int i = 0; i < dw; ++i)
          mix[i] += theta_hat[j] * inst.group_means(j, i);
      rep.gap_value = max_term - linear_min(ws, mix);
      return rep;
    }
    case ProblemKind::LinearVi: {
      // pure-primal view: excess population risk
      require_contains(inst.constraint, w_hat, "sp_gap");
      Vec g = inst.population_operator(w_hat);
      rep.gap_value = dot(g, w_hat) - linear_min(inst.constraint, g);
      return rep;
    }
    case ProblemKind::ScalarSquareVi: {
      // singleton dual set: the gap is the excess of z^2 over its minimum
      require_contains(inst.constraint, w_hat, "sp_gap");
      double lo = 1e300;
      for (double edge : {0.0, 1.0}) lo = std::min(lo, edge * edge);
      rep.gap_value = w_hat[0] * w_hat[0] - lo;
      return rep;
    }
    case ProblemKind::AffineMonotoneVi:
      throw DomainError("sp_gap: operator-only instance has no loss");
  }
  throw DomainError("sp_gap: bad kind");
}

GapReport vi_gap(const ProblemInstance& inst, ConstSpan z_hat) {
  GapReport rep;
  rep.problem = kind_name(inst.kind);
  rep.point = to_vec(z_hat);
  require_contains(inst.constraint, z_hat, "vi_gap");

  if (inst.kind == ProblemKind::ScalarSquareVi) {
    // max over u in [0,1] of 2u(z-u): interior vertex at u = z/2
    double z = z_hat[0];
    double u = std::clamp(z / 2.0, 0.0, 1.0);
    rep.gap_value = 2.0 * u * (z - u);
    rep.method = GapMethod::ClosedForm;
    rep.tolerance = 1e-12;
    return rep;
  }

  AffineOperator op = population_affine(inst);
  if (op.skew) {
    // <Mz + q, zhat - z> is linear in z when M is skew
    int d = inst.dim();
    Eigen::VectorXd zh(d);
    for (int i = 0; i < d; ++i) zh(i) = z_hat[i];
    Eigen::VectorXd slope_e = op.M.transpose() * zh;
    Vec slope(d);
    for (int i = 0; i < d; ++i) slope[i] = slope_e(i) - op.q[i];
    rep.gap_value = dot(op.q, z_hat) + linear_max(inst.constraint, slope);
    rep.method = GapMethod::ClosedForm;
    rep.tolerance = 1e-12;
    return rep;
  }

  rep.method = GapMethod::ExactInnerSolve;
  rep.tolerance = 1e-8;
  rep.gap_value = concave_affine_max(op, z_hat, inst.constraint, 1e-9);
  return rep;
}

double vi_gap_grid(const ProblemInstance& inst, ConstSpan z_hat,
                   int points_per_dim) {
  std::vector<Vec> pts;
  grid_points(inst.constraint, points_per_dim, pts);
  double best = -1e300;
  for (const auto& z : pts) {
    Vec g = inst.population_operator(z);
    best = std::max(best, dot(g, sub(z_hat, z)));
  }
  return best;
}

EqualityCheck vi_gap_equals_excess_risk_check(const ProblemInstance& inst,
                                              ConstSpan z_hat) {
  if (inst.kind != ProblemKind::LinearVi)
    throw DomainError(
        "vi_gap_equals_excess_risk_check: requires a linear operator");
  double gap = vi_gap(inst, z_hat).gap_value;
  Vec g = inst.population_operator(z_hat);
  double excess = dot(g, z_hat) - linear_min(inst.constraint, g);
  EqualityCheck c;
  c.residual = std::abs(gap - excess);
  c.pass = c.residual <= 1e-9;
  return c;
}

std::pair<double, double> h_diagnostic(const RegularizedProblem& problem,
                                       ConstSpan z_star, ConstSpan z,
                                       const Dataset& chunk) {
  double hs = h_value_chunk(problem, z_star, z, chunk);
  double hd = h_value_population(problem, z_star, z);
  return {hs, hd};
}

Dataset mean_sample_dataset(const Dataset& data) {
  if (data.size() == 0)
    throw DomainError("mean_sample_dataset: empty dataset");
  Vec mean(data.samples[0].size(), 0.0);
  for (const auto& x : data.samples) axpy(1.0 / data.size(), x, mean);
  Dataset out;
  out.samples.push_back(std::move(mean));
  return out;
}

UasProbeResult uas_probe(const ProblemInstance& inst, double weight, long n,
                         int trials, uint64_t seed) {
  if (n < 1 || trials < 1) throw DomainError("uas_probe: bad sizes");
  RegularizedProblem rp(inst, !is_ssp(inst.kind));
  rp.add_round(weight, inst.constraint.canonical_point());
  double mu = rp.strong_monotonicity();
  double L = inst.operator_bound;

  UasProbeResult res;
  res.bound = 2.0 * L / (mu * static_cast<double>(n));
  for (int k = 0; k < trials; ++k) {
    Dataset S = sample_dataset(inst, static_cast<int>(n),
                               derive_seed(seed, 101, k));
    RngStream rng(derive_seed(seed, 102, k));
    Dataset Sp = S;
    Sp.samples[rng.index(Sp.samples.size())] = inst.sample_one(rng);
    Vec z1 = exact_regularized_solver(mean_sample_dataset(S), rp, 1e-11);
    Vec z2 = exact_regularized_solver(mean_sample_dataset(Sp), rp, 1e-11);
    res.max_distance =
        std::max(res.max_distance, inst.geometry.norm(sub(z1, z2)));
  }
  res.pass = res.max_distance <= res.bound * (1.0 + 1e-6) + 1e-9;
  return res;
}

StabilityProbeResult stability_generalization_probe(
    const ProblemInstance& inst, double weight, long n, int trials,
    uint64_t seed) {
  if (n < 1 || trials < 2)
    throw DomainError("stability_generalization_probe: bad sizes");
  bool svi = !is_ssp(inst.kind);
  RegularizedProblem rp(inst, svi);
  rp.add_round(weight, inst.constraint.canonical_point());
  double mu = rp.strong_monotonicity();
  double L = inst.operator_bound;

  Operator pop = [&](ConstSpan z) { return rp.population_operator(z); };
  ViSolveOptions opts;
  opts.tolerance = 1e-10;
  Vec z_star = vi_solve(pop, inst.geometry, inst.constraint, opts);

  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < trials; ++k) {
    Dataset S = sample_dataset(inst, static_cast<int>(n),
                               derive_seed(seed, 201, k));
    Vec z_hat = exact_regularized_solver(mean_sample_dataset(S), rp, 1e-10);
    auto [hs, hd] = h_diagnostic(rp, z_star, z_hat, S);
    double diff = hd - hs;
    sum += diff;
    sum_sq += diff * diff;
  }
  StabilityProbeResult res;
  res.mean_diff = sum / trials;
  double var = std::max(0.0, sum_sq / trials - res.mean_diff * res.mean_diff);
  res.stderr_diff = std::sqrt(var / trials);
  double delta_stab = 2.0 * L / (mu * static_cast<double>(n));
  double D = product_diameter(inst.geometry, inst.constraint);
  res.bound = svi ? (inst.operator_lipschitz * D + L) * delta_stab
                  : 2.0 * delta_stab * L;
  res.pass = res.mean_diff <= res.bound + 3.0 * res.stderr_diff;
  return res;
}

SweepResult rate_sweep(const SweepConfig& config) {
  if (config.n_values.empty() || config.eps_values.empty() ||
      config.seeds < 1)
    throw DomainError("rate_sweep: empty grid");
  ProblemInstance inst = make_instance(config.kind, config.params);
  bool svi = !is_ssp(inst.kind);
  double D = product_diameter(inst.geometry, inst.constraint);
  double L = inst.operator_bound;
  double kappa = inst.geometry.kappa;
  double kt = kappa_tilde_of(inst.geometry, inst.dim());

  SweepResult result;
  for (double eps : config.eps_values) {
    for (long n : config.n_values) {
      for (int s = 0; s < config.seeds; ++s) {
        SweepCell cell;
        cell.kind = kind_name(inst.kind);
        cell.n = n;
        cell.d = inst.dim();
        cell.epsilon = eps;
        cell.delta = config.delta;
        cell.seed = static_cast<uint64_t>(s);
        uint64_t cell_tag = static_cast<uint64_t>(n) * 1000003u +
                            static_cast<uint64_t>(s);
        uint64_t eps_tag = std::bit_cast<uint64_t>(eps);
        double t0 = now_ms();
        try {
          long n_prime = static_cast<long>(std::floor(
              static_cast<double>(n) / std::log2(static_cast<double>(n))));
          double lambda =
              config.lambda_override > 0.0
                  ? config.lambda_override
                  : lambda_default(svi, 0.0, kappa, L,
                                   inst.operator_lipschitz, n_prime, D);
          Dataset data = sample_dataset(
              inst, static_cast<int>(n),
              derive_seed(config.base_seed, cell_tag, eps_tag));
          Subroutine sub;
          if (config.exact_subroutine) {
            sub = make_exact_subroutine(config.exact_tolerance);
          } else {
            PrivacyBudget budget(eps, config.delta);
            OutputMode mode =
                svi ? OutputMode::RandomIterate : OutputMode::Average;
            double acc = config.accountant_constant;
            double eta_ov = config.eta_override;
            sub = [budget, mode, acc, eta_ov](const SubroutineContext& ctx) {
              return dp_mirror_prox(ctx, budget, mode, acc, eta_ov);
            };
          }
          uint64_t run_seed =
              derive_seed(config.base_seed, cell_tag ^ 0x5157u, eps_tag);
          RecursionResult run =
              svi ? recursive_regularization_svi(data, inst, sub, lambda,
                                                 run_seed)
                  : recursive_regularization_ssp(data, inst, sub, lambda,
                                                 run_seed);
          ConstSpan z(run.final_point);
          cell.gap = svi ? vi_gap(inst, z).gap_value
                         : sp_gap(inst, z.first(inst.dim_w()),
                                  z.subspan(inst.dim_w()))
                               .gap_value;
          cell.grad_evals = run.log.total_grad_evals;
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
        }
        cell.wall_ms = now_ms() - t0;
        result.cells.push_back(std::move(cell));
      }
    }
  }

  for (double eps : config.eps_values) {
    for (long n : config.n_values) {
      SweepAggregate agg;
      agg.n = n;
      agg.epsilon = eps;
      double sum = 0.0, sum_sq = 0.0, evals = 0.0;
      for (const auto& cell : result.cells) {
        if (cell.failed || cell.n != n || cell.epsilon != eps) continue;
        sum += cell.gap;
        sum_sq += cell.gap * cell.gap;
        evals += static_cast<double>(cell.grad_evals);
        agg.valid_seeds += 1;
      }
      if (agg.valid_seeds > 0) {
        agg.mean_gap = sum / agg.valid_seeds;
        double var =
            std::max(0.0, sum_sq / agg.valid_seeds - agg.mean_gap * agg.mean_gap);
        agg.stderr_gap = agg.valid_seeds > 1
                             ? std::sqrt(var / agg.valid_seeds)
                             : 0.0;
        agg.mean_grad_evals = evals / agg.valid_seeds;
        double priv_term = D * L * kappa *
                           std::sqrt(inst.dim() *
                                     std::log(1.0 / config.delta) * kt) /
                           (static_cast<double>(n) * eps);
        if (config.exact_subroutine) priv_term = 0.0;
        agg.sampling_dominated =
            agg.mean_gap > 0.0 && priv_term <= 0.1 * agg.mean_gap;
      }
      result.aggregates.push_back(agg);
    }
  }

  // least-squares slope of log(mean gap) on log(n)
  auto fit_over = [&](bool dominated_only) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& agg : result.aggregates) {
      if (agg.valid_seeds == 0 || agg.mean_gap <= 0.0) continue;
      if (dominated_only && !agg.sampling_dominated) continue;
      pts.emplace_back(std::log(static_cast<double>(agg.n)),
                       std::log(agg.mean_gap));
    }
    return pts;
  };
  auto pts = fit_over(true);
  bool used_all = false;
  if (static_cast<int>(pts.size()) < 4) {
    pts = fit_over(false);
    used_all = true;
  }
  if (pts.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (auto& [x, y] : pts) {
      mx += x / pts.size();
      my += y / pts.size();
    }
    double sxx = 0.0, sxy = 0.0;
    for (auto& [x, y] : pts) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
    }
    if (sxx > 0.0) {
      SlopeFit fit;
      fit.slope = sxy / sxx;
      fit.intercept = my - fit.slope * mx;
      double ss_res = 0.0;
      for (auto& [x, y] : pts) {
        double r = y - (fit.intercept + fit.slope * x);
        ss_res += r * r;
      }
      double dof = std::max<double>(1.0, static_cast<double>(pts.size()) - 2);
      fit.half_width = 2.0 * std::sqrt(ss_res / dof / sxx);
      fit.cells_used = static_cast<int>(pts.size());
      fit.used_all_cells = used_all;
      fit.valid = true;
      result.fit = fit;
    }
  }
  return result;
}

void write_run_csv(const SweepResult& result, std::ostream& out) {
  out << "kind,n,d,epsilon,delta,seed,gap,grad_evals,wall_ms\n";
  out << std::setprecision(12);
  for (const auto& c : result.cells) {
    if (c.failed) continue;
    out << c.kind << ',' << c.n << ',' << c.d << ',' << c.epsilon << ','
        << c.delta << ',' << c.seed << ',' << c.gap << ',' << c.grad_evals
        << ',' << c.wall_ms << '\n';
  }
}

void write_summary_csv(const SweepResult& result, std::ostream& out) {
  out << std::setprecision(12);
  out << "n,epsilon,mean_gap,stderr_gap,mean_grad_evals,valid_seeds,"
         "sampling_dominated\n";
  for (const auto& a : result.aggregates)
    out << a.n << ',' << a.epsilon << ',' << a.mean_gap << ','
        << a.stderr_gap << ',' << a.mean_grad_evals << ',' << a.valid_seeds
        << ',' << (a.sampling_dominated ? 1 : 0) << '\n';
  out << "slope,intercept,half_width,cells_used,used_all_cells\n";
  if (result.fit.valid)
    out << result.fit.slope << ',' << result.fit.intercept << ','
        << result.fit.half_width << ',' << result.fit.cells_used << ','
        << (result.fit.used_all_cells ? 1 : 0) << '\n';
}

void write_plotdata(const SweepResult& result, std::ostream& out) {
  out << std::setprecision(12);
  for (const auto& a : result.aggregates)
    if (a.valid_seeds > 0)
      out << a.n << ' ' << a.mean_gap << ' ' << a.stderr_gap << '\n';
}

}  // namespace dpvi
