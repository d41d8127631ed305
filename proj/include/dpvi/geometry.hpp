#pragma once

#include <optional>
#include <vector>

#include "dpvi/rng.hpp"
#include "dpvi/vec.hpp"

namespace dpvi {

// Effective exponent p_bar = max{p, 1 + 1/ln(d)} for d >= 2; p_bar = 2 for
// d = 1 (any exponent is equivalent in one dimension).  Log base is natural.
double effective_exponent(double p, int d);

double dual_exponent(double p);

// (sum |z_i|^p)^{1/p}, p >= 1.
double lp_norm(ConstSpan z, double p);

// Gradient of (1/2)||z||_p^2, p > 1.  Zero vector at z = 0.
// Component i: sign(z_i) |z_i|^{p-1} ||z||_p^{2-p}.
Vec grad_half_sq_norm(ConstSpan z, double p);

// Inverse of grad_half_sq_norm via the conjugate-exponent identity:
// returns u with grad_half_sq_norm(u, p) = v.
Vec inverse_mirror_map(ConstSpan v, double p);

// One lp block: norm exponent p in [1,2], dimension d, ball radius, and the
// rescale constant `scale` (the D_w / D_theta of the product norm; defaults
// to the ball diameter 2*radius).
struct LpGeometry {
  double p = 2.0;
  int d = 1;
  double radius = 1.0;
  double scale = 2.0;

  double p_bar = 2.0;
  double p_star = 2.0;
  double kappa_single = 1.0;

  LpGeometry() = default;
  LpGeometry(double p_in, int d_in, double radius_in,
             std::optional<double> scale_in = std::nullopt);

  // Construct with an explicitly pinned mirror exponent (p_bar = exponent),
  // bypassing the effective-exponent rule.  Used by tests and by callers
  // that want the raw lp geometry.
  static LpGeometry with_exponent(double exponent, int d, double radius,
                                  std::optional<double> scale = std::nullopt);
};

struct ConstraintSet {
  enum class Kind { LpBall, Simplex, Product };

  Kind kind = Kind::LpBall;
  // lp_ball
  double ball_p = 2.0;
  double radius = 1.0;
  Vec center;  // empty means origin
  // simplex / ball dimension
  int dim = 0;
  // product
  std::vector<ConstraintSet> children;

  static ConstraintSet lp_ball(double p, int d, double r, Vec center = {});
  static ConstraintSet simplex(int d);
  static ConstraintSet product(std::vector<ConstraintSet> blocks);

  int dimension() const;
  // Membership up to tol (relative for balls, absolute on the simplex sum).
  bool contains(ConstSpan z, double tol = 1e-12) const;
  // Canonical interior point: ball center / uniform simplex point.
  Vec canonical_point() const;
  // Diameter of the set measured in the lp norm with the given exponent.
  double diameter(double norm_exponent) const;
};

struct ProductGeometry {
  LpGeometry w_geom;
  std::optional<LpGeometry> theta_geom;
  double kappa = 1.0;

  ProductGeometry() = default;
  explicit ProductGeometry(LpGeometry w,
                           std::optional<LpGeometry> theta = std::nullopt);

  int dim_w() const { return w_geom.d; }
  int dim_theta() const { return theta_geom ? theta_geom->d : 0; }
  int dim() const { return dim_w() + dim_theta(); }

  ConstSpan w_block(ConstSpan z) const;
  ConstSpan theta_block(ConstSpan z) const;

  // sqrt( (||w||_{p_bar}/D_w)^2 + (||theta||_{q_bar}/D_theta)^2 )
  double norm(ConstSpan z) const;
  // Dual norm of the above: sqrt( (D_w ||gw||_{p*})^2 + (D_th ||gth||_{q*})^2 )
  double dual_norm(ConstSpan g) const;

  // Gradient of psi(u) = (psi_scale/2) * norm(u - center)^2.
  Vec mirror_grad(ConstSpan u, ConstSpan center, double psi_scale) const;
  // psi value itself.
  double mirror_value(ConstSpan u, ConstSpan center, double psi_scale) const;
};

double combined_kappa(const ProductGeometry& geom);
double product_norm(ConstSpan zw, ConstSpan ztheta, const ProductGeometry& geom);

// argmin over `set` of (psi_scale/2)*||u - center||_{p_bar}^2 + <drift, u>
// for a single lp block.  `prev` is only a warm start for the iterative
// boundary solvers.  Exact closed forms are used when the minimizer is
// interior, when p_bar = 2, or when the mirror center coincides with the
// ball center; otherwise a KKT multiplier bisection with a coordinate
// descent inner solve is used.
Vec prox_step(ConstSpan prev, ConstSpan drift, const LpGeometry& geom,
              const ConstraintSet& set, ConstSpan center,
              double psi_scale = 1.0);

// Product-space prox: psi separates across blocks, so each block is solved
// independently with block scale psi_scale / D_b^2.
Vec prox_step_product(ConstSpan prev, ConstSpan drift,
                      const ProductGeometry& geom, const ConstraintSet& set,
                      ConstSpan center, double psi_scale);

// Diameter of the feasible set measured in the rescaled product norm.
double product_diameter(const ProductGeometry& geom, const ConstraintSet& set);

// Uniform-ish feasible point: rejection sampling in the ball's bounding
// box, normalized exponentials on the simplex, blockwise for products.
Vec random_feasible_point(const ConstraintSet& set, RngStream& rng);

}  // namespace dpvi
