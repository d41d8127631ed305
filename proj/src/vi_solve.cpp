#include "dpvi/vi_solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpvi {

double linear_min(const ConstraintSet& set, ConstSpan g) {
  switch (set.kind) {
    case ConstraintSet::Kind::LpBall: {
      double dual_p =
          set.ball_p <= 1.0 ? std::numeric_limits<double>::infinity()
                            : set.ball_p / (set.ball_p - 1.0);
      double gn = std::isinf(dual_p) ? linf_norm(g) : lp_norm(g, dual_p);
      double at_center = set.center.empty() ? 0.0 : dot(g, set.center);
      return at_center - set.radius * gn;
    }
    case ConstraintSet::Kind::Simplex: {
      double m = g[0];
      for (double v : g) m = std::min(m, v);
      return m;
    }
    case ConstraintSet::Kind::Product: {
      double s = 0.0;
      size_t off = 0;
      for (const auto& c : set.children) {
        s += linear_min(c, g.subspan(off, c.dimension()));
        off += c.dimension();
      }
      return s;
    }
  }
  throw DomainError("linear_min: unsupported set kind");
}

double stampacchia_residual(ConstSpan Gz, ConstSpan z,
                            const ConstraintSet& set) {
  return dot(Gz, z) - linear_min(set, Gz);
}

ViSolveResult vi_solve_strong(const Operator& G, const ProductGeometry& geom,
                              const ConstraintSet& set,
                              const ViSolveOptions& opts) {
  ViSolveResult res;
  Vec z = set.canonical_point();
  res.z = z;
  res.residual = stampacchia_residual(G(z), z, set);
  res.operator_evals = 1;
  if (res.residual <= opts.tolerance) {
    res.converged = true;
    return res;
  }

  double eta = opts.eta0;
  const int chunk = 50;
  long iters = 0;
  while (iters < opts.max_inner_iterations && eta > 1e-14) {
    double chunk_best = res.residual;
    for (int k = 0; k < chunk && iters < opts.max_inner_iterations;
         ++k, ++iters) {
      Vec gz = G(z);
      ++res.operator_evals;
      if (!all_finite(gz)) break;
      Vec zt = prox_step_product(z, scaled(gz, eta), geom, set, z, geom.kappa);
      Vec gt = G(zt);
      ++res.operator_evals;
      if (!all_finite(gt)) break;
      z = prox_step_product(zt, scaled(gt, eta), geom, set, z, geom.kappa);
    }
    double r = stampacchia_residual(G(z), z, set);
    ++res.operator_evals;
    if (r < res.residual) {
      res.residual = r;
      res.z = z;
    }
    if (res.residual <= opts.tolerance) {
      res.converged = true;
      return res;
    }
    if (r >= chunk_best * 0.5) {
      // stalled at this step size: halve and restart from the best point
      eta *= 0.5;
      z = res.z;
    }
  }
  return res;
}

Vec vi_solve(const Operator& G, const ProductGeometry& geom,
             const ConstraintSet& set, const ViSolveOptions& opts) {
  ViSolveOptions inner = opts;
  inner.tolerance = std::max(opts.tolerance * 0.1, 1e-13);
  Vec anchor = set.canonical_point();
  double best_r = std::numeric_limits<double>::infinity();
  Vec best = anchor;
  for (int round = 0; round < opts.max_ppa_rounds; ++round) {
    Operator Greg = [&](ConstSpan z) {
      Vec g = G(z);
      axpy(opts.ppa_weight, sub(z, anchor), g);
      return g;
    };
    ViSolveResult r = vi_solve_strong(Greg, geom, set, inner);
    double resid = stampacchia_residual(G(r.z), r.z, set);
    if (resid < best_r) {
      best_r = resid;
      best = r.z;
    }
    if (best_r <= opts.tolerance) return best;
    anchor = r.z;
  }
  throw NumericError("vi_solve: residual " + std::to_string(best_r) +
                     " above tolerance");
}

}  // namespace dpvi
