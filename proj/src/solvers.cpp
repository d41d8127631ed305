#include "dpvi/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace dpvi {

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Block constraint sets for per-block diameter bounds.
const ConstraintSet& block_set(const ConstraintSet& set, int index) {
  if (set.kind == ConstraintSet::Kind::Product) return set.children[index];
  if (index != 0) throw DomainError("block_set: no dual block");
  return set;
}

}  // namespace

SolverRun mirror_prox(const StochOracle& oracle, const ProductGeometry& geom,
                      const ConstraintSet& set, const MirrorProxConfig& cfg) {
  if (cfg.eta <= 0.0) throw DomainError("mirror_prox: eta must be > 0");
  if (cfg.iterations < 1)
    throw DomainError("mirror_prox: iterations must be >= 1");
  if (static_cast<int>(cfg.psi_center.size()) != set.dimension())
    throw DomainError("mirror_prox: psi_center dimension mismatch");

  double t0 = now_ms();
  SolverRun run;
  run.seed = cfg.seed;
  run.iterations = cfg.iterations;

  // The random output index is drawn before the run so a trace is
  // reproducible regardless of whether it is consumed.
  RngStream rng(derive_seed(cfg.seed, 0x6d70, 0));
  long t_star = 1 + static_cast<long>(rng.index(
                        static_cast<size_t>(cfg.iterations)));

  const Vec& z0 = cfg.psi_center;
  Vec z_prev = z0;
  Vec avg(z0.size(), 0.0);
  Vec picked;

  for (long t = 1; t <= cfg.iterations; ++t) {
    Vec grad_psi = geom.mirror_grad(z_prev, z0, cfg.psi_scale);

    Vec g1 = oracle(z_prev);
    run.log.record_call(0);
    Vec drift1 = scaled(g1, cfg.eta);
    axpy(-1.0, grad_psi, drift1);
    Vec z_mid = prox_step_product(z_prev, drift1, geom, set, z0,
                                  cfg.psi_scale);

    Vec g2 = oracle(z_mid);
    run.log.record_call(0);
    Vec drift2 = scaled(g2, cfg.eta);
    axpy(-1.0, grad_psi, drift2);
    Vec z_new = prox_step_product(z_mid, drift2, geom, set, z0,
                                  cfg.psi_scale);

    axpy(1.0 / cfg.iterations, z_new, avg);
    if (t == t_star) picked = z_new;
    if (cfg.record_trace) run.trace.push_back(z_new);
    z_prev = std::move(z_new);
  }

  run.final_point =
      cfg.output_mode == OutputMode::Average ? std::move(avg) : std::move(picked);
  run.wall_ms = now_ms() - t0;
  return run;
}

RegularizedProblem::RegularizedProblem(const ProblemInstance& instance,
                                       bool svi)
    : base(&instance), svi_mode(svi) {
  const ProductGeometry& geom = instance.geometry;
  rho = [&geom](ConstSpan u) {
    Vec zero(u.size(), 0.0);
    return geom.mirror_grad(u, zero, 1.0);
  };
  rho_modulus = 1.0 / geom.kappa;
  rho_bound = product_diameter(geom, instance.constraint);
}

Vec RegularizedProblem::regularizer_operator(ConstSpan z) const {
  Vec g(z.size(), 0.0);
  for (const auto& reg : regs) {
    if (svi_mode) {
      axpy(reg.weight, rho(sub(z, reg.anchor)), g);
    } else {
      // saddle operator of weight*(||w-a_w||_w^2 - ||theta-a_th||_th^2):
      // both blocks carry a + sign after the dual-block negation, which is
      // exactly the product mirror-map gradient at scale 2*weight.
      axpy(1.0, base->geometry.mirror_grad(z, reg.anchor, 2.0 * reg.weight),
           g);
    }
  }
  return g;
}

Vec RegularizedProblem::per_sample_operator(ConstSpan z, ConstSpan x) const {
  Vec g = base->per_sample_operator(z, x);
  axpy(1.0, regularizer_operator(z), g);
  return g;
}

Vec RegularizedProblem::population_operator(ConstSpan z) const {
  Vec g = base->population_operator(z);
  axpy(1.0, regularizer_operator(z), g);
  return g;
}

Vec RegularizedProblem::empirical_operator(ConstSpan z,
                                           const Dataset& data) const {
  Vec g = base->empirical_operator(z, data);
  axpy(1.0, regularizer_operator(z), g);
  return g;
}

double RegularizedProblem::per_sample_loss(ConstSpan w, ConstSpan theta,
                                           ConstSpan x) const {
  if (svi_mode)
    throw DomainError("RegularizedProblem: loss undefined in operator mode");
  double v = base->per_sample_loss(w, theta, x);
  const ProductGeometry& geom = base->geometry;
  Vec z = concat(w, theta);
  for (const auto& reg : regs) {
    Vec d = sub(z, reg.anchor);
    ConstSpan dw = geom.w_block(d);
    double nw = lp_norm(dw, geom.w_geom.p_bar) / geom.w_geom.scale;
    v += reg.weight * nw * nw;
    if (geom.theta_geom) {
      ConstSpan dt = geom.theta_block(d);
      double nt = lp_norm(dt, geom.theta_geom->p_bar) / geom.theta_geom->scale;
      v -= reg.weight * nt * nt;
    }
  }
  return v;
}

double RegularizedProblem::population_loss(ConstSpan w, ConstSpan theta) const {
  if (svi_mode)
    throw DomainError("RegularizedProblem: loss undefined in operator mode");
  double v = base->population_loss(w, theta);
  const ProductGeometry& geom = base->geometry;
  Vec z = concat(w, theta);
  for (const auto& reg : regs) {
    Vec d = sub(z, reg.anchor);
    ConstSpan dw = geom.w_block(d);
    double nw = lp_norm(dw, geom.w_geom.p_bar) / geom.w_geom.scale;
    v += reg.weight * nw * nw;
    if (geom.theta_geom) {
      ConstSpan dt = geom.theta_block(d);
      double nt = lp_norm(dt, geom.theta_geom->p_bar) / geom.theta_geom->scale;
      v -= reg.weight * nt * nt;
    }
  }
  return v;
}

double RegularizedProblem::regularizer_dual_bound() const {
  double total = 0.0;
  double diameter = product_diameter(base->geometry, base->constraint);
  for (const auto& reg : regs)
    total += (svi_mode ? 1.0 : 2.0) * reg.weight * diameter;
  return total;
}

double RegularizedProblem::operator_bound() const {
  return base->operator_bound + regularizer_dual_bound();
}

double RegularizedProblem::lipschitz_w() const {
  const LpGeometry& g = base->geometry.w_geom;
  double diam = block_set(base->constraint, 0).diameter(g.p_bar);
  double total = base->lipschitz_w;
  for (const auto& reg : regs)
    total += (svi_mode ? 1.0 : 2.0) * reg.weight * diam / (g.scale * g.scale);
  return total;
}

double RegularizedProblem::lipschitz_theta() const {
  if (!base->geometry.theta_geom) return 0.0;
  const LpGeometry& g = *base->geometry.theta_geom;
  double diam = block_set(base->constraint, 1).diameter(g.p_bar);
  double total = base->lipschitz_theta;
  for (const auto& reg : regs)
    total += (svi_mode ? 1.0 : 2.0) * reg.weight * diam / (g.scale * g.scale);
  return total;
}

double RegularizedProblem::strong_monotonicity() const {
  double total = 0.0;
  for (const auto& reg : regs)
    total += (svi_mode ? reg.weight * rho_modulus
                       : 2.0 * reg.weight / base->geometry.kappa);
  return total;
}

void RegularizedProblem::add_round(double weight, Vec anchor) {
  if (weight <= 0.0)
    throw DomainError("RegularizedProblem: weight must be > 0");
  if (static_cast<int>(anchor.size()) != base->dim())
    throw DomainError("RegularizedProblem: anchor dimension mismatch");
  regs.push_back(Regularizer{weight, std::move(anchor)});
}

Vec exact_regularized_solver(const Dataset& chunk,
                             const RegularizedProblem& problem,
                             double tolerance) {
  if (chunk.size() == 0)
    throw DomainError("exact_regularized_solver: empty chunk");
  Operator G = [&](ConstSpan z) {
    return problem.empirical_operator(z, chunk);
  };
  ViSolveOptions opts;
  opts.tolerance = tolerance;
  return vi_solve(G, problem.base->geometry, problem.base->constraint, opts);
}

Vec dp_mirror_prox(const SubroutineContext& ctx, const PrivacyBudget& budget,
                   OutputMode mode, double accountant_constant,
                   double eta_override) {
  const RegularizedProblem& rp = *ctx.problem;
  const ProblemInstance& inst = *rp.base;
  const ProductGeometry& geom = inst.geometry;
  long n = ctx.chunk->size();
  if (n == 0) throw DomainError("dp_mirror_prox: empty chunk");
  if (ctx.distance_bound <= 0.0)
    throw DomainError("dp_mirror_prox: distance_bound must be > 0");

  NoiseCalibration cal =
      calibrate(budget, geom, rp.lipschitz_w(), rp.lipschitz_theta(), n,
                inst.dim_w(), inst.dim_theta(), accountant_constant);

  double L_reg = rp.operator_bound();
  MirrorProxConfig cfg;
  cfg.iterations = cal.iterations;
  cfg.eta = eta_override > 0.0
                ? eta_override
                : ctx.distance_bound /
                      (L_reg * std::sqrt(static_cast<double>(cal.iterations)));
  cfg.psi_center = ctx.start;
  cfg.psi_scale = geom.kappa;
  cfg.distance_bound = ctx.distance_bound;
  cfg.output_mode = mode;
  cfg.seed = derive_seed(ctx.seed, 0x6470, static_cast<uint64_t>(ctx.round));
  cfg.record_trace = false;

  PrivateOracle oracle(
      [&rp](ConstSpan z, ConstSpan x) { return rp.per_sample_operator(z, x); },
      inst.dim(), inst.dim_w(), *ctx.chunk, cal, cfg.seed, ctx.log);
  StochOracle stoch = [&oracle](ConstSpan z) { return oracle(z); };
  SolverRun run = mirror_prox(stoch, geom, inst.constraint, cfg);
  return run.final_point;
}

Subroutine make_dp_subroutine(const PrivacyBudget& budget, OutputMode mode,
                              double accountant_constant) {
  return [budget, mode, accountant_constant](const SubroutineContext& ctx) {
    return dp_mirror_prox(ctx, budget, mode, accountant_constant);
  };
}

Subroutine make_exact_subroutine(double tolerance) {
  return [tolerance](const SubroutineContext& ctx) {
    return exact_regularized_solver(*ctx.chunk, *ctx.problem, tolerance);
  };
}

RecursionSchedule RecursionSchedule::build(bool svi, long n, double L,
                                           double D, double kappa,
                                           double lambda) {
  if (n < 2) throw DomainError("RecursionSchedule: need n >= 2");
  if (lambda <= 0.0 || L <= 0.0 || D <= 0.0 || kappa < 1.0)
    throw DomainError("RecursionSchedule: invalid parameters");

  double floor_lambda = svi ? L * std::sqrt(kappa) / (D * std::sqrt(double(n)))
                            : L * kappa / (D * std::sqrt(double(n)));
  if (lambda < floor_lambda * (1.0 - 1e-9)) {
    std::ostringstream msg;
    msg << "RecursionSchedule: lambda " << lambda
        << " below the admissible floor " << floor_lambda << " ("
        << (svi ? "L sqrt(kappa)/(D sqrt(n))" : "L kappa/(D sqrt(n))") << ")";
    throw DomainError(msg.str());
  }

  RecursionSchedule s;
  s.lambda = lambda;
  s.diameter = D;
  s.chunk_size = static_cast<long>(
      std::floor(static_cast<double>(n) / std::log2(static_cast<double>(n))));
  if (s.chunk_size < 1) s.chunk_size = 1;

  double ratio = svi ? L / (kappa * D * lambda) : L / (D * lambda);
  long T = ratio > 1.0 ? static_cast<long>(std::floor(std::log2(ratio))) : 0;
  if (T < 1) T = 1;
  s.rounds = T;

  if (s.rounds * s.chunk_size > n)
    throw DomainError("RecursionSchedule: rounds * chunk_size exceeds n");
  return s;
}

namespace {

RecursionResult run_recursion(const Dataset& data,
                              const ProblemInstance& instance,
                              const Subroutine& subroutine, double lambda,
                              uint64_t seed, bool svi) {
  double t0 = now_ms();
  double D = product_diameter(instance.geometry, instance.constraint);
  double L = instance.operator_bound;
  double kappa = instance.geometry.kappa;

  RecursionResult result;
  result.schedule = RecursionSchedule::build(svi, data.size(), L, D, kappa,
                                             lambda);
  const RecursionSchedule& s = result.schedule;

  RegularizedProblem rp(instance, svi);
  Vec anchor = instance.constraint.canonical_point();
  result.anchors.push_back(anchor);

  for (long t = 1; t <= s.rounds; ++t) {
    rp.add_round(std::ldexp(lambda, static_cast<int>(t)), anchor);

    Dataset chunk;
    chunk.samples.assign(
        data.samples.begin() + (t - 1) * s.chunk_size,
        data.samples.begin() + t * s.chunk_size);

    result.log.begin_round();
    SubroutineContext ctx;
    ctx.problem = &rp;
    ctx.chunk = &chunk;
    ctx.start = anchor;
    ctx.distance_bound = s.diameter / std::ldexp(1.0, static_cast<int>(t));
    ctx.round = static_cast<int>(t);
    ctx.seed = derive_seed(seed, 0x7272, static_cast<uint64_t>(t));
    ctx.log = &result.log;

    anchor = subroutine(ctx);
    if (!instance.constraint.contains(anchor, 1e-6))
      throw NumericError("recursion: subroutine output left the set");
    result.anchors.push_back(anchor);
  }

  result.final_point = anchor;
  result.wall_ms = now_ms() - t0;
  return result;
}

}  // namespace

RecursionResult recursive_regularization_ssp(const Dataset& data,
                                             const ProblemInstance& instance,
                                             const Subroutine& subroutine,
                                             double lambda, uint64_t seed) {
  if (!is_ssp(instance.kind))
    throw DomainError("recursive_regularization_ssp: not a saddle instance");
  return run_recursion(data, instance, subroutine, lambda, seed, false);
}

RecursionResult recursive_regularization_svi(const Dataset& data,
                                             const ProblemInstance& instance,
                                             const Subroutine& subroutine,
                                             double lambda, uint64_t seed) {
  return run_recursion(data, instance, subroutine, lambda, seed, true);
}

double lambda_default(bool svi, double alpha, double kappa, double L,
                      double beta, long n_prime, double D) {
  if (kappa < 1.0 || L <= 0.0 || D <= 0.0 || n_prime < 1 || alpha < 0.0 ||
      beta < 0.0)
    throw DomainError("lambda_default: invalid parameters");
  double sqrt_np = std::sqrt(static_cast<double>(n_prime));
  double lam =
      svi ? (48.0 / D) * (alpha * kappa * kappa * kappa +
                          (beta * D + L) * kappa * kappa / sqrt_np)
          : (48.0 / D) *
                (alpha * kappa * kappa + L * std::pow(kappa, 1.5) / sqrt_np);
  double floor_lambda = svi ? L * std::sqrt(kappa) / (D * sqrt_np)
                            : L * kappa / (D * sqrt_np);
  return std::max(lam, floor_lambda);
}

}  // namespace dpvi
