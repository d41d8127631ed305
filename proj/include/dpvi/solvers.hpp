#pragma once

#include "dpvi/privacy.hpp"
#include "dpvi/problems.hpp"

namespace dpvi {

enum class OutputMode { Average, RandomIterate };

struct MirrorProxConfig {
  double eta = 0.0;          // step size; must be set (> 0)
  long iterations = 1;       // T
  Vec psi_center;            // z0; psi is minimized here
  double psi_scale = 1.0;    // kappa makes psi 1-strongly convex
  double distance_bound = 1.0;
  OutputMode output_mode = OutputMode::Average;
  uint64_t seed = 0;         // draws the random iterate index up front
  bool record_trace = false;
};

struct SolverRun {
  Vec final_point;
  std::vector<Vec> trace;  // z_1..z_T when recorded
  OracleCallLog log;
  double wall_ms = 0.0;
  uint64_t seed = 0;
  long iterations = 0;
};

using StochOracle = std::function<Vec(ConstSpan)>;

// Two-step extragradient with a fixed mirror center:
//   zt   = prox(eta O(z_{t-1}) - grad psi(z_{t-1}))
//   z_t  = prox(eta O(zt)      - grad psi(z_{t-1}))
// Output: uniform average of z_1..z_T, or z_{t*} with t* drawn from the
// seed before the run.
SolverRun mirror_prox(const StochOracle& oracle, const ProductGeometry& geom,
                      const ConstraintSet& set, const MirrorProxConfig& cfg);

// Anchored squared-norm (SSP) or rho-operator (SVI) regularizers layered
// on a base instance.  Weights double per round; anchors are the round
// outputs.
struct Regularizer {
  double weight = 0.0;
  Vec anchor;
};

struct RegularizedProblem {
  const ProblemInstance* base = nullptr;
  std::vector<Regularizer> regs;
  bool svi_mode = false;
  // SVI regularizer operator; defaults to the scaled mirror map
  // z -> (1/D) grad(1/2 ||z||_pbar^2) with D the set diameter.
  std::function<Vec(ConstSpan)> rho;
  double rho_modulus = 0.0;      // strong monotonicity of rho (rescaled norm)
  double rho_bound = 0.0;        // sup dual norm of rho over the set

  explicit RegularizedProblem(const ProblemInstance& instance,
                              bool svi = false);

  Vec regularizer_operator(ConstSpan z) const;
  Vec per_sample_operator(ConstSpan z, ConstSpan x) const;
  Vec population_operator(ConstSpan z) const;
  Vec empirical_operator(ConstSpan z, const Dataset& data) const;

  double per_sample_loss(ConstSpan w, ConstSpan theta, ConstSpan x) const;
  double population_loss(ConstSpan w, ConstSpan theta) const;

  // dual-norm bound on the regularizer sum (added to the base L)
  double regularizer_dual_bound() const;
  double operator_bound() const;
  // per-block gradient bounds for noise calibration
  double lipschitz_w() const;
  double lipschitz_theta() const;
  // strong monotonicity modulus w.r.t. the rescaled product norm
  double strong_monotonicity() const;

  void add_round(double weight, Vec anchor);
};

// Deterministic noiseless equilibrium of the regularized empirical
// problem, certified by the support-function residual.
Vec exact_regularized_solver(const Dataset& chunk,
                             const RegularizedProblem& problem,
                             double tolerance);

struct SubroutineContext {
  const RegularizedProblem* problem;
  const Dataset* chunk;
  Vec start;
  double distance_bound;
  int round = 0;
  uint64_t seed = 0;
  OracleCallLog* log = nullptr;
};
using Subroutine = std::function<Vec(const SubroutineContext&)>;

// DP subroutine: calibrate on the chunk, run mirror prox with the noisy
// minibatch oracle, eta = distance_bound / (L_reg sqrt(T)).
Vec dp_mirror_prox(const SubroutineContext& ctx, const PrivacyBudget& budget,
                   OutputMode mode, double accountant_constant = 1.0,
                   double eta_override = 0.0);
Subroutine make_dp_subroutine(const PrivacyBudget& budget, OutputMode mode,
                              double accountant_constant = 1.0);
// Noiseless exact subroutine (test oracle / noiseless pipelines).
Subroutine make_exact_subroutine(double tolerance = 1e-11);

struct RecursionSchedule {
  double lambda = 0.0;
  long rounds = 0;       // T
  long chunk_size = 0;   // n'
  double diameter = 0.0; // D in the rescaled product norm

  // mode "ssp": T = floor(log2(L/(D lambda))); "svi": floor(log2(L/(kappa D lambda)))
  static RecursionSchedule build(bool svi, long n, double L, double D,
                                 double kappa, double lambda);
};

struct RecursionResult {
  Vec final_point;
  std::vector<Vec> anchors;  // z_bar_0 .. z_bar_T
  RecursionSchedule schedule;
  OracleCallLog log;
  double wall_ms = 0.0;
};

RecursionResult recursive_regularization_ssp(const Dataset& data,
                                             const ProblemInstance& instance,
                                             const Subroutine& subroutine,
                                             double lambda, uint64_t seed);

RecursionResult recursive_regularization_svi(const Dataset& data,
                                             const ProblemInstance& instance,
                                             const Subroutine& subroutine,
                                             double lambda, uint64_t seed);

// Default regularization weight:
//   ssp: (48/D)(alpha kappa^2 + L kappa^{3/2} / sqrt(n'))
//   svi: (48/D)(alpha kappa^3 + (beta D + L) kappa^2 / sqrt(n'))
// floored at the schedule's admissibility threshold.
double lambda_default(bool svi, double alpha, double kappa, double L,
                      double beta, long n_prime, double D);

}  // namespace dpvi
