#pragma once

#include <iosfwd>

#include "dpvi/solvers.hpp"

namespace dpvi {

enum class GapMethod { ClosedForm, ExactInnerSolve, CertificateGrid };

struct GapReport {
  double gap_value = 0.0;
  GapMethod method = GapMethod::ClosedForm;
  double tolerance = 0.0;
  std::string problem;
  Vec point;
};

// Population saddle-point gap: max over the dual set at w_hat minus min
// over the primal set at theta_hat.  Closed forms for every instance in
// the zoo (linear or quadratic inner problems).
GapReport sp_gap(const ProblemInstance& instance, ConstSpan w_hat,
                 ConstSpan theta_hat);

// Population variational-inequality gap: max over z of <G(z), z_hat - z>.
// Closed form for skew-affine operators; projected ascent (tolerance
// 1e-8) for operators with a symmetric part.
GapReport vi_gap(const ProblemInstance& instance, ConstSpan z_hat);

// Brute-force grid evaluation of the VI gap for cross-checks (d <= 3).
double vi_gap_grid(const ProblemInstance& instance, ConstSpan z_hat,
                   int points_per_dim);

struct EqualityCheck {
  bool pass = false;
  double residual = 0.0;
};

// For linear operators the VI gap coincides with the excess population
// risk; reports the absolute difference, passing at 1e-9.
EqualityCheck vi_gap_equals_excess_risk_check(const ProblemInstance& instance,
                                              ConstSpan z_hat);

// Relative-accuracy diagnostics at a point z against the regularized
// problem's population solution z_star:
//   saddle mode:  H(z) = F(w, theta*) - F(w*, theta)
//   operator mode: H(z) = <g(z), z - z*>
// first = chunk average (H_S), second = population value (H_D).
std::pair<double, double> h_diagnostic(const RegularizedProblem& problem,
                                       ConstSpan z_star, ConstSpan z,
                                       const Dataset& chunk);

// Collapse a dataset to its mean sample; valid for the zoo because every
// per-sample operator is affine in the sample vector.
Dataset mean_sample_dataset(const Dataset& data);

struct UasProbeResult {
  double max_distance = 0.0;
  double bound = 0.0;  // 2 L / (mu n)
  bool pass = false;
};

// Swap-one-sample stability of the exact regularized equilibrium: solves
// adjacent empirical problems over `trials` pairs and reports the largest
// argument distance against the 2L/(mu n) bound.
UasProbeResult uas_probe(const ProblemInstance& instance, double weight,
                         long n, int trials, uint64_t seed);

struct StabilityProbeResult {
  double mean_diff = 0.0;    // mean of H_D - H_S at the empirical solution
  double stderr_diff = 0.0;
  double bound = 0.0;        // 2 Delta L (saddle) or (beta D + L) Delta
  bool pass = false;
};

// Monte Carlo check that argument stability bounds the generalization gap
// of the H diagnostics; passes at a three-standard-error margin.
StabilityProbeResult stability_generalization_probe(
    const ProblemInstance& instance, double weight, long n, int trials,
    uint64_t seed);

struct SweepConfig {
  std::string kind = "bilinear_ssp";
  std::map<std::string, double> params;
  std::vector<long> n_values;
  std::vector<double> eps_values{1.0};
  double delta = 1e-5;
  int seeds = 20;
  uint64_t base_seed = 1;
  double lambda_override = 0.0;  // 0: default weight from the lambda rule
  double eta_override = 0.0;
  double accountant_constant = 1.0;
  bool exact_subroutine = false;  // noiseless mode with the exact solver
  double exact_tolerance = 1e-9;
};

struct SweepCell {
  std::string kind;
  long n = 0;
  int d = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  uint64_t seed = 0;
  double gap = 0.0;
  long grad_evals = 0;
  double wall_ms = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepAggregate {
  long n = 0;
  double epsilon = 0.0;
  double mean_gap = 0.0;
  double stderr_gap = 0.0;
  double mean_grad_evals = 0.0;
  int valid_seeds = 0;
  bool sampling_dominated = false;
};

struct SlopeFit {
  bool valid = false;
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // two slope standard errors
  int cells_used = 0;
  bool used_all_cells = false;  // fallback when < 4 dominated cells
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<SweepAggregate> aggregates;
  SlopeFit fit;
};

// Full pipeline per (n, epsilon, seed) cell: sample a dataset, run the
// recursive solver with the private (or exact) subroutine, evaluate the
// population gap, then fit log(mean gap) against log(n) over the cells
// where the predicted privacy-noise contribution is below 10% of the gap.
SweepResult rate_sweep(const SweepConfig& config);

// CSV / plot-data emission shared with the command-line tool.
void write_run_csv(const SweepResult& result, std::ostream& out);
void write_summary_csv(const SweepResult& result, std::ostream& out);
void write_plotdata(const SweepResult& result, std::ostream& out);

}  // namespace dpvi
