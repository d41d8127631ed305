#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

#include "dpvi/geometry.hpp"
#include "dpvi/rng.hpp"
#include "dpvi/vi_solve.hpp"

namespace dpvi {

using Sample = Vec;

struct Dataset {
  std::vector<Sample> samples;
  int size() const { return static_cast<int>(samples.size()); }
};

enum class ProblemKind {
  BilinearSsp,
  QuadraticScscSsp,
  GroupDroSsp,
  LinearVi,
  AffineMonotoneVi,
  ScalarSquareVi,
};

bool is_ssp(ProblemKind k);
std::string kind_name(ProblemKind k);
ProblemKind kind_from_name(const std::string& name);

struct PopulationTruth {
  Vec equilibrium;
  double optimum_value = 0.0;  // F at the saddle (SSP kinds)
};

// Exact minimizer of <g, u> over the set; ties broken toward the lowest
// index so subgradient selection is deterministic.
Vec linear_argmin(const ConstraintSet& set, ConstSpan g);

struct ProblemInstance {
  ProblemKind kind = ProblemKind::BilinearSsp;
  ProductGeometry geometry;
  ConstraintSet constraint;

  double lipschitz_w = 0.0;      // bound on the primal gradient dual norm
  double lipschitz_theta = 0.0;  // bound on the dual gradient dual norm
  double operator_bound = 0.0;   // L in the rescaled dual norm
  double operator_lipschitz = 0.0;  // beta (zero for constant-in-z operators)

  int sample_dim = 0;
  double noise_scale = 0.0;

  // bilinear / quadratic parameters
  Eigen::MatrixXd A;  // coupling matrix (also M for affine_monotone_vi)
  Vec b, c;           // linear offsets
  double mu_w = 0.0, mu_theta = 0.0;  // quadratic curvature

  // group_dro: k means stacked row-wise
  Eigen::MatrixXd group_means;

  // linear_vi finite-support mode: sample uniformly among these atoms
  std::vector<Vec> atoms;

  int dim() const { return geometry.dim(); }
  int dim_w() const { return geometry.dim_w(); }
  int dim_theta() const { return geometry.dim_theta(); }

  Vec sample_one(RngStream& rng) const;
  Vec per_sample_operator(ConstSpan z, ConstSpan x) const;
  double per_sample_loss(ConstSpan w, ConstSpan theta, ConstSpan x) const;

  // analytic means over the sample distribution
  Vec population_operator(ConstSpan z) const;
  double population_loss(ConstSpan w, ConstSpan theta) const;

  Vec empirical_operator(ConstSpan z, const Dataset& data) const;

  PopulationTruth population_truth() const;
};

Dataset sample_dataset(const ProblemInstance& instance, int n, uint64_t seed);

// CSV export: header line "kind,n,d,seed", then one sample per row.
void write_dataset_csv(const Dataset& data, const ProblemInstance& instance,
                       uint64_t seed, std::ostream& out);

// Factories.  All distribution parameters are uniform boxes so the
// Lipschitz bounds are exact worst-case values, not estimates.
ProblemInstance make_bilinear_ssp(int d_w, int d_theta, double p, double q,
                                  double radius_w, double radius_theta,
                                  double noise, uint64_t param_seed = 0,
                                  bool zero_offsets = true);
ProblemInstance make_bilinear_ssp_explicit(const Eigen::MatrixXd& A, Vec b,
                                           Vec c, double p, double q,
                                           double radius_w,
                                           double radius_theta, double noise);
ProblemInstance make_quadratic_scsc_ssp(int d_w, int d_theta, double mu_w,
                                        double mu_theta, double radius,
                                        double noise, uint64_t param_seed = 0);
ProblemInstance make_group_dro_ssp(int d_w, int k, double p, double radius_w,
                                   double noise, uint64_t param_seed = 0);
ProblemInstance make_linear_vi(int d, double p, double radius, Vec mean,
                               double noise);
ProblemInstance make_linear_vi_two_atom(int d, double p, double radius);
ProblemInstance make_affine_monotone_vi(int d, double radius,
                                        double strong_monotonicity,
                                        double noise, uint64_t param_seed = 0);
ProblemInstance make_scalar_square_vi();

// Name + flat parameter map entry point used by the CLI.
ProblemInstance make_instance(const std::string& name,
                              const std::map<std::string, double>& params);

}  // namespace dpvi
