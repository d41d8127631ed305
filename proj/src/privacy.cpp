#include "dpvi/privacy.hpp"

#include <cmath>

namespace dpvi {

NoiseCalibration calibrate(const PrivacyBudget& budget,
                           const ProductGeometry& geom, double L_w,
                           double L_theta, long n, int d_w, int d_theta,
                           double accountant_constant) {
  if (n < 1) throw DomainError("calibrate: n must be >= 1");
  double eps = budget.epsilon;
  double log1d = std::log(1.0 / budget.delta);
  int d = d_w + d_theta;
  double kappa = geom.kappa;

  double p = geom.w_geom.p;
  double q = geom.theta_geom ? geom.theta_geom->p : 2.0;
  double kt = 1.0 + ((p < 2.0 || q < 2.0) ? std::log(static_cast<double>(d))
                                          : 0.0);

  double t_raw =
      kappa * std::min(static_cast<double>(n),
                       static_cast<double>(n) * n * eps * eps /
                           (d * log1d * kt));
  long T = static_cast<long>(std::ceil(t_raw));
  if (T < 1) T = 1;

  long m = static_cast<long>(
      std::ceil(std::max(n * std::sqrt(eps / static_cast<double>(T)), 1.0)));
  if (m > n) m = n;
  if (m < 1) m = 1;

  auto sigma_for = [&](const LpGeometry& g, double L, int dim) {
    double dim_factor =
        std::max(1.0, std::pow(static_cast<double>(dim),
                               1.0 - 2.0 / g.p_star));
    return accountant_constant * g.scale * L *
           std::sqrt(static_cast<double>(T) * dim_factor * log1d) / (n * eps);
  };

  NoiseCalibration cal;
  cal.iterations = T;
  cal.batch_size = m;
  cal.accountant_constant = accountant_constant;
  cal.kappa_tilde = kt;
  cal.sigma_w = sigma_for(geom.w_geom, L_w, d_w);
  cal.sigma_theta =
      geom.theta_geom ? sigma_for(*geom.theta_geom, L_theta, d_theta) : 0.0;

  // accountant preconditions
  double floor_w = accountant_constant * geom.w_geom.scale * L_w *
                   std::sqrt(static_cast<double>(T) * log1d) / (n * eps);
  if (cal.sigma_w < floor_w * (1.0 - 1e-12))
    throw NumericError("calibrate: sigma_w below the accountant floor");
  // subsampling precondition; vacuous once the batch covers the chunk
  if (m < n && static_cast<double>(T) <
                   static_cast<double>(n) * n * eps /
                       (static_cast<double>(m) * m) -
                       1e-9)
    throw NumericError("calibrate: T below n^2 eps / m^2");
  return cal;
}

PrivateOracle::PrivateOracle(SampleOperator op, int dim, int dim_w,
                             const Dataset& chunk, NoiseCalibration cal,
                             uint64_t seed, OracleCallLog* log)
    : op_(std::move(op)),
      dim_(dim),
      dim_w_(dim_w),
      chunk_(&chunk),
      cal_(cal),
      rng_(seed),
      log_(log) {
  if (chunk.size() == 0) throw DomainError("PrivateOracle: empty chunk");
}

PrivateOracle::PrivateOracle(const ProblemInstance& instance,
                             const Dataset& chunk, NoiseCalibration cal,
                             uint64_t seed, OracleCallLog* log)
    : PrivateOracle(
          [&instance](ConstSpan z, ConstSpan x) {
            return instance.per_sample_operator(z, x);
          },
          instance.dim(), instance.dim_w(), chunk, cal, seed, log) {}

Vec PrivateOracle::operator()(ConstSpan z) {
  Vec g(dim_, 0.0);
  long m = cal_.batch_size;
  for (long i = 0; i < m; ++i) {
    size_t idx = rng_.index(chunk_->samples.size());
    axpy(1.0 / m, op_(z, chunk_->samples[idx]), g);
  }
  if (cal_.sigma_w > 0.0)
    for (int i = 0; i < dim_w_; ++i) g[i] += rng_.normal(0.0, cal_.sigma_w);
  if (cal_.sigma_theta > 0.0)
    for (int j = dim_w_; j < dim_; ++j)
      g[j] += rng_.normal(0.0, cal_.sigma_theta);
  if (log_) log_->record_call(m);
  return g;
}

double noise_for_released_iterate(double sensitivity,
                                  const PrivacyBudget& budget) {
  if (sensitivity < 0.0)
    throw DomainError("noise_for_released_iterate: negative sensitivity");
  return sensitivity * std::sqrt(2.0 * std::log(1.25 / budget.delta)) /
         budget.epsilon;
}

}  // namespace dpvi
