#pragma once

#include <functional>

#include "dpvi/geometry.hpp"

namespace dpvi {

// Deterministic operator evaluated at a point.
using Operator = std::function<Vec(ConstSpan)>;

struct ViSolveOptions {
  double tolerance = 1e-10;   // target Stampacchia residual
  double eta0 = 1.0;          // initial extragradient step
  int max_inner_iterations = 40000;
  double ppa_weight = 1.0;    // proximal-point regularization weight
  int max_ppa_rounds = 400;
};

// Exact minimum of <g, u> over the set (support-function evaluation:
// closed form for balls via the dual norm, vertex minimum for the simplex,
// blockwise sum for products).
double linear_min(const ConstraintSet& set, ConstSpan g);

// max over u in the set of <Gz, z - u>; z solves the variational
// inequality iff this is <= 0.
double stampacchia_residual(ConstSpan Gz, ConstSpan z,
                            const ConstraintSet& set);

struct ViSolveResult {
  Vec z;
  double residual = 0.0;
  long operator_evals = 0;
  bool converged = false;
};

// Extragradient in the mirror geometry with adaptive step halving.
// Reliable when the operator is strongly monotone; reports the best
// iterate and its residual without throwing.
ViSolveResult vi_solve_strong(const Operator& G, const ProductGeometry& geom,
                              const ConstraintSet& set,
                              const ViSolveOptions& opts = {});

// Monotone (not necessarily strongly monotone) solve via proximal-point
// outer loop around vi_solve_strong.  Throws NumericError with the final
// residual if the tolerance is not reached.
Vec vi_solve(const Operator& G, const ProductGeometry& geom,
             const ConstraintSet& set, const ViSolveOptions& opts = {});

}  // namespace dpvi
