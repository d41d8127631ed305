#pragma once

#include "dpvi/problems.hpp"
#include "dpvi/rng.hpp"

namespace dpvi {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;

  PrivacyBudget() = default;
  PrivacyBudget(double eps, double del) : epsilon(eps), delta(del) {
    if (epsilon <= 0.0) throw DomainError("PrivacyBudget: epsilon must be > 0");
    if (delta <= 0.0 || delta > 1.0)
      throw DomainError("PrivacyBudget: delta must lie in (0,1]");
  }
};

struct NoiseCalibration {
  long iterations = 1;    // T
  long batch_size = 1;    // m
  double sigma_w = 0.0;
  double sigma_theta = 0.0;
  double accountant_constant = 1.0;
  double kappa_tilde = 1.0;
};

// Gaussian-mechanism schedule for T subsampled operator queries:
//   T  = ceil(kappa * min{n, n^2 eps^2 / (d ln(1/delta) kappa_tilde)}), >= 1
//   m  = ceil(max{n sqrt(eps/T), 1}), capped at n
//   sigma_b = c D_b L_b sqrt(T max(1, d_b^{1-2/p*}) ln(1/delta)) / (n eps)
// kappa_tilde = 1 + 1{p<2 or q<2} ln(d).  The dimension factor is floored
// at 1 so sigma never drops below the accountant's l2 requirement.
NoiseCalibration calibrate(const PrivacyBudget& budget,
                           const ProductGeometry& geom, double L_w,
                           double L_theta, long n, int d_w, int d_theta,
                           double accountant_constant = 1.0);

struct OracleCallLog {
  std::vector<long> round_calls;
  std::vector<long> round_grad_evals;
  long total_calls = 0;
  long total_grad_evals = 0;

  void begin_round() {
    round_calls.push_back(0);
    round_grad_evals.push_back(0);
  }
  void record_call(long grad_evals) {
    if (round_calls.empty()) begin_round();
    round_calls.back() += 1;
    round_grad_evals.back() += grad_evals;
    total_calls += 1;
    total_grad_evals += grad_evals;
  }
};

// Per-sample operator evaluation: (point, sample) -> dual vector.
using SampleOperator = std::function<Vec(ConstSpan, ConstSpan)>;

// Noisy minibatch operator oracle: mean of the per-sample operator over a
// with-replacement batch of size m, plus blockwise isotropic Gaussian
// noise (sigma_w, sigma_theta).  Owns its random stream; one call logs one
// oracle invocation and m gradient evaluations.
class PrivateOracle {
 public:
  PrivateOracle(SampleOperator op, int dim, int dim_w, const Dataset& chunk,
                NoiseCalibration cal, uint64_t seed,
                OracleCallLog* log = nullptr);
  PrivateOracle(const ProblemInstance& instance, const Dataset& chunk,
                NoiseCalibration cal, uint64_t seed,
                OracleCallLog* log = nullptr);

  Vec operator()(ConstSpan z);

 private:
  SampleOperator op_;
  int dim_ = 0;
  int dim_w_ = 0;
  const Dataset* chunk_;
  NoiseCalibration cal_;
  RngStream rng_;
  OracleCallLog* log_;
};

// Standard Gaussian-mechanism scale for releasing a data-dependent point:
// sigma = sensitivity * sqrt(2 ln(1.25/delta)) / epsilon.
double noise_for_released_iterate(double sensitivity,
                                  const PrivacyBudget& budget);

}  // namespace dpvi
