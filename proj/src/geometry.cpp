#include "dpvi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dpvi {

namespace {

// sign(t) |t|^{p-1}
double phi(double t, double p) {
  if (t == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

double pow_abs(double t, double e) { return std::pow(std::abs(t), e); }

}  // namespace

double effective_exponent(double p, int d) {
  if (p < 1.0 || p > 2.0) throw DomainError("effective_exponent: p must lie in [1,2]");
  if (d < 1) throw DomainError("effective_exponent: d must be >= 1");
  if (d == 1) return 2.0;
  return std::max(p, 1.0 + 1.0 / std::log(static_cast<double>(d)));
}

double dual_exponent(double p) {
  if (p <= 1.0) throw DomainError("dual_exponent: p must be > 1");
  return p / (p - 1.0);
}

double lp_norm(ConstSpan z, double p) {
  if (p < 1.0) throw DomainError("lp_norm: p must be >= 1");
  if (!all_finite(z)) throw NumericError("lp_norm: non-finite entry");
  if (z.empty()) return 0.0;
  // scale by the max to avoid overflow for small p
  double m = linf_norm(z);
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : z) s += pow_abs(v / m, p);
  return m * std::pow(s, 1.0 / p);
}

Vec grad_half_sq_norm(ConstSpan z, double p) {
  if (p <= 1.0) throw DomainError("grad_half_sq_norm: p must be > 1");
  double n = lp_norm(z, p);
  Vec g(z.size(), 0.0);
  if (n == 0.0) return g;
  double nf = std::pow(n, 2.0 - p);
  for (size_t i = 0; i < z.size(); ++i) g[i] = phi(z[i], p) * nf;
  return g;
}

Vec inverse_mirror_map(ConstSpan v, double p) {
  if (p <= 1.0) throw DomainError("inverse_mirror_map: p must be > 1");
  return grad_half_sq_norm(v, dual_exponent(p));
}

LpGeometry::LpGeometry(double p_in, int d_in, double radius_in,
                       std::optional<double> scale_in) {
  p = p_in;
  d = d_in;
  radius = radius_in;
  p_bar = effective_exponent(p, d);
  p_star = dual_exponent(p_bar);
  kappa_single = 1.0 / (p_bar - 1.0);
  scale = scale_in.value_or(2.0 * radius);
}

LpGeometry LpGeometry::with_exponent(double exponent, int d, double radius,
                                     std::optional<double> scale) {
  if (exponent <= 1.0) throw DomainError("LpGeometry: exponent must be > 1");
  if (d < 1) throw DomainError("LpGeometry: d must be >= 1");
  LpGeometry g;
  g.p = exponent;
  g.d = d;
  g.radius = radius;
  g.p_bar = exponent;
  g.p_star = dual_exponent(exponent);
  g.kappa_single = 1.0 / (exponent - 1.0);
  g.scale = scale.value_or(2.0 * radius);
  return g;
}

ConstraintSet ConstraintSet::lp_ball(double p, int d, double r, Vec center) {
  if (p < 1.0) throw DomainError("lp_ball: p must be >= 1");
  if (d < 1 || r <= 0.0) throw DomainError("lp_ball: bad dimension or radius");
  if (!center.empty() && static_cast<int>(center.size()) != d)
    throw DomainError("lp_ball: center dimension mismatch");
  ConstraintSet s;
  s.kind = Kind::LpBall;
  s.ball_p = p;
  s.radius = r;
  s.center = std::move(center);
  s.dim = d;
  return s;
}

ConstraintSet ConstraintSet::simplex(int d) {
  if (d < 1) throw DomainError("simplex: d must be >= 1");
  ConstraintSet s;
  s.kind = Kind::Simplex;
  s.dim = d;
  return s;
}

ConstraintSet ConstraintSet::product(std::vector<ConstraintSet> blocks) {
  if (blocks.empty()) throw DomainError("product: no blocks");
  ConstraintSet s;
  s.kind = Kind::Product;
  s.children = std::move(blocks);
  s.dim = 0;
  for (const auto& c : s.children) s.dim += c.dimension();
  return s;
}

int ConstraintSet::dimension() const { return dim; }

bool ConstraintSet::contains(ConstSpan z, double tol) const {
  if (static_cast<int>(z.size()) != dim)
    throw DomainError("ConstraintSet::contains: dimension mismatch");
  switch (kind) {
    case Kind::LpBall: {
      Vec v = to_vec(z);
      if (!center.empty())
        for (int i = 0; i < dim; ++i) v[i] -= center[i];
      return lp_norm(v, ball_p) <= radius * (1.0 + tol);
    }
    case Kind::Simplex: {
      double s = 0;
      for (double v : z) {
        if (v < -tol) return false;
        s += v;
      }
      return std::abs(s - 1.0) <= tol;
    }
    case Kind::Product: {
      size_t off = 0;
      for (const auto& c : children) {
        if (!c.contains(z.subspan(off, c.dimension()), tol)) return false;
        off += c.dimension();
      }
      return true;
    }
  }
  return false;
}

Vec ConstraintSet::canonical_point() const {
  switch (kind) {
    case Kind::LpBall:
      return center.empty() ? Vec(dim, 0.0) : center;
    case Kind::Simplex:
      return Vec(dim, 1.0 / dim);
    case Kind::Product: {
      Vec r;
      for (const auto& c : children) {
        Vec b = c.canonical_point();
        r.insert(r.end(), b.begin(), b.end());
      }
      return r;
    }
  }
  return {};
}

double ConstraintSet::diameter(double norm_exponent) const {
  switch (kind) {
    case Kind::LpBall: {
      // ||z||_q <= d^{max(0, 1/q - 1/p)} ||z||_p; axis pairs attain 2r.
      double f = 1.0;
      if (norm_exponent < ball_p)
        f = std::pow(static_cast<double>(dim),
                     1.0 / norm_exponent - 1.0 / ball_p);
      return 2.0 * radius * f;
    }
    case Kind::Simplex:
      // max over vertex pairs: ||e_i - e_j||_q = 2^{1/q}
      return dim >= 2 ? std::pow(2.0, 1.0 / norm_exponent) : 0.0;
    case Kind::Product: {
      double s = 0;
      for (const auto& c : children) {
        double d_ = c.diameter(norm_exponent);
        s += d_ * d_;
      }
      return std::sqrt(s);
    }
  }
  return 0.0;
}

ProductGeometry::ProductGeometry(LpGeometry w, std::optional<LpGeometry> theta)
    : w_geom(w), theta_geom(std::move(theta)) {
  kappa = combined_kappa(*this);
}

double combined_kappa(const ProductGeometry& geom) {
  double k = geom.w_geom.kappa_single;
  if (geom.theta_geom) k = std::max(k, geom.theta_geom->kappa_single);
  return k;
}

ConstSpan ProductGeometry::w_block(ConstSpan z) const {
  return z.subspan(0, dim_w());
}

ConstSpan ProductGeometry::theta_block(ConstSpan z) const {
  return z.subspan(dim_w(), dim_theta());
}

double ProductGeometry::norm(ConstSpan z) const {
  if (static_cast<int>(z.size()) != dim())
    throw DomainError("ProductGeometry::norm: dimension mismatch");
  double nw = lp_norm(w_block(z), w_geom.p_bar) / w_geom.scale;
  if (!theta_geom) return nw;
  double nt = lp_norm(theta_block(z), theta_geom->p_bar) / theta_geom->scale;
  return std::sqrt(nw * nw + nt * nt);
}

double ProductGeometry::dual_norm(ConstSpan g) const {
  if (static_cast<int>(g.size()) != dim())
    throw DomainError("ProductGeometry::dual_norm: dimension mismatch");
  double nw = lp_norm(w_block(g), w_geom.p_star) * w_geom.scale;
  if (!theta_geom) return nw;
  double nt = lp_norm(theta_block(g), theta_geom->p_star) * theta_geom->scale;
  return std::sqrt(nw * nw + nt * nt);
}

Vec ProductGeometry::mirror_grad(ConstSpan u, ConstSpan center,
                                 double psi_scale) const {
  Vec diff = sub(u, center);
  Vec g(dim());
  double sw = psi_scale / (w_geom.scale * w_geom.scale);
  Vec gw = grad_half_sq_norm(w_block(diff), w_geom.p_bar);
  for (int i = 0; i < dim_w(); ++i) g[i] = sw * gw[i];
  if (theta_geom) {
    double st = psi_scale / (theta_geom->scale * theta_geom->scale);
    Vec gt = grad_half_sq_norm(theta_block(diff), theta_geom->p_bar);
    for (int i = 0; i < dim_theta(); ++i) g[dim_w() + i] = st * gt[i];
  }
  return g;
}

double ProductGeometry::mirror_value(ConstSpan u, ConstSpan center,
                                     double psi_scale) const {
  Vec diff = sub(u, center);
  double n = norm(diff);
  return 0.5 * psi_scale * n * n;
}

double product_norm(ConstSpan zw, ConstSpan ztheta,
                    const ProductGeometry& geom) {
  Vec z = concat(zw, ztheta);
  return geom.norm(z);
}

// ---------------------------------------------------------------------------
// Prox solvers.
//
// Single-block objective: F(u) = (s/2)||u - c||_{pm}^2 + <drift, u>,
// minimized over an lp ball or the simplex.  Interior case is closed form.
// Active-constraint cases reduce to monotone scalar problems:
//   ball:    bisection on the KKT multiplier mu of the norm constraint,
//            inner minimization of F + mu||u - b||_{pb} by cyclic
//            coordinate descent (each coordinate is a monotone derivative
//            bisection; the objective is C^1 away from the ball center);
//   simplex: bisection on the multiplier nu of the sum constraint, inner
//            minimization of F + nu*sum(u) over u >= 0 by the same
//            coordinate descent with clipping at zero.
// Both outer bisections are monotone by the standard penalty argument.
// ---------------------------------------------------------------------------

namespace {

struct BallProblem {
  ConstSpan drift;
  ConstSpan c;      // mirror center
  const Vec* b;     // ball center
  double s, pm, pb, mu;
};

// derivative of the penalized objective w.r.t. coordinate i, with u_i = t
// and rest_pm / rest_pb the p-th power sums over the other coordinates.
double ball_coord_deriv(const BallProblem& pr, double t, size_t i,
                        double rest_pm, double rest_pb) {
  double dc = t - pr.c[i];
  double npm = std::pow(rest_pm + pow_abs(dc, pr.pm), 1.0 / pr.pm);
  double g1 = (npm == 0.0) ? 0.0 : phi(dc, pr.pm) * std::pow(npm, 2.0 - pr.pm);
  double val = pr.s * g1 + pr.drift[i];
  if (pr.mu > 0.0) {
    // multiplier on (1/2)||u-b||_pb^2: smooth away from b, zero gradient
    // at b, same monotone structure as the mirror term
    double db = t - (*pr.b)[i];
    double npb = std::pow(rest_pb + pow_abs(db, pr.pb), 1.0 / pr.pb);
    if (npb > 0.0)
      val += pr.mu * phi(db, pr.pb) * std::pow(npb, 2.0 - pr.pb);
  }
  return val;
}

// minimize the 1-d restriction by monotone derivative bisection
double ball_coord_min(const BallProblem& pr, double t0, size_t i,
                      double rest_pm, double rest_pb) {
  double w = 1.0 + std::abs(t0);
  double lo = t0 - w, hi = t0 + w;
  for (int k = 0; k < 80 && ball_coord_deriv(pr, lo, i, rest_pm, rest_pb) > 0;
       ++k) {
    hi = lo;
    w *= 2;
    lo = t0 - w;
  }
  w = 1.0 + std::abs(t0);
  for (int k = 0; k < 80 && ball_coord_deriv(pr, hi, i, rest_pm, rest_pb) < 0;
       ++k) {
    lo = hi;
    w *= 2;
    hi = t0 + w;
  }
  while (hi - lo > 1e-15 * (1.0 + std::abs(t0))) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (ball_coord_deriv(pr, mid, i, rest_pm, rest_pb) < 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// cyclic coordinate descent on F + mu*||u-b||_{pb}
bool ball_cd(const BallProblem& pr, Vec& u, int max_sweeps, double tol) {
  size_t n = u.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double rest_pm = 0.0, rest_pb = 0.0;
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        rest_pm += pow_abs(u[j] - pr.c[j], pr.pm);
        if (pr.mu > 0.0) rest_pb += pow_abs(u[j] - (*pr.b)[j], pr.pb);
      }
      double t = ball_coord_min(pr, u[i], i, rest_pm, rest_pb);
      delta = std::max(delta, std::abs(t - u[i]));
      u[i] = t;
    }
    if (delta < tol) return true;
  }
  return false;
}

Vec prox_ball(ConstSpan prev, ConstSpan drift, double s, double pm,
              const ConstraintSet& set, ConstSpan c) {
  size_t n = drift.size();
  Vec bctr = set.center.empty() ? Vec(n, 0.0) : set.center;
  double r = set.radius;
  double pb = set.ball_p;

  // unconstrained minimizer
  Vec u0 = add(c, inverse_mirror_map(scaled(drift, -1.0 / s), pm));
  Vec v0 = sub(u0, bctr);
  double nv0 = lp_norm(v0, pb);
  if (nv0 <= r * (1.0 + 1e-14)) {
    if (nv0 > r) return add(bctr, scaled(v0, r / nv0));
    return u0;
  }

  Vec cb = sub(c, bctr);
  bool centers_match = lp_norm(cb, 2.0) <= 1e-14 * (1.0 + lp_norm(c, 2.0));
  if ((pm == 2.0 && pb == 2.0) || (centers_match && pm == pb)) {
    // radial rescaling is exact: the Euclidean case by the linear KKT
    // system, the centered case by degree-1 homogeneity of the map.
    return add(bctr, scaled(v0, r / nv0));
  }

  BallProblem pr{drift, c, &bctr, s, pm, pb, 0.0};
  Vec u = add(bctr, scaled(v0, r / nv0));  // warm start on the boundary
  if (!prev.empty() && set.contains(prev, 1e-9)) {
    // prefer the caller's warm start when feasible
    Vec pv = to_vec(prev);
    u = pv;
  }

  auto dist = [&](const Vec& x) { return lp_norm(sub(x, bctr), pb); };

  // bracket the multiplier (loose inner solves while searching)
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 60; ++k) {
    pr.mu = hi;
    ball_cd(pr, u, 120, 1e-11);
    if (dist(u) < r) break;
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15)
      throw NumericError("prox_step: ball multiplier bracket exhausted");
  }
  for (int k = 0; k < 52; ++k) {
    pr.mu = 0.5 * (lo + hi);
    ball_cd(pr, u, 120, 1e-11);
    if (dist(u) > r)
      lo = pr.mu;
    else
      hi = pr.mu;
  }
  pr.mu = hi;
  ball_cd(pr, u, 200, 1e-13);
  double nv = dist(u);
  if (std::abs(nv - r) > 1e-7 * r)
    throw NumericError("prox_step: ball boundary residual " +
                       std::to_string(std::abs(nv - r)));
  if (nv > r) {
    Vec v = sub(u, bctr);
    u = add(bctr, scaled(v, r / nv));
  }
  return u;
}

struct SimplexProblem {
  ConstSpan drift;
  ConstSpan c;
  double s, pm, nu;
};

double simplex_coord_deriv(const SimplexProblem& pr, double t, size_t i,
                           double rest_pm) {
  double dc = t - pr.c[i];
  double npm = std::pow(rest_pm + pow_abs(dc, pr.pm), 1.0 / pr.pm);
  double g1 = (npm == 0.0) ? 0.0 : phi(dc, pr.pm) * std::pow(npm, 2.0 - pr.pm);
  return pr.s * g1 + pr.drift[i] + pr.nu;
}

bool simplex_cd(const SimplexProblem& pr, Vec& u, int max_sweeps, double tol) {
  size_t n = u.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double rest_pm = 0.0;
      for (size_t j = 0; j < n; ++j)
        if (j != i) rest_pm += pow_abs(u[j] - pr.c[j], pr.pm);
      double t;
      if (simplex_coord_deriv(pr, 0.0, i, rest_pm) >= 0.0) {
        t = 0.0;  // clipped at the nonnegativity bound
      } else {
        double lo = 0.0, hi = 1.0;
        for (int k = 0;
             k < 80 && simplex_coord_deriv(pr, hi, i, rest_pm) < 0.0; ++k) {
          lo = hi;
          hi *= 2.0;
        }
        while (hi - lo > 1e-16 * (1.0 + hi)) {
          double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (simplex_coord_deriv(pr, mid, i, rest_pm) < 0.0)
            lo = mid;
          else
            hi = mid;
        }
        t = 0.5 * (lo + hi);
      }
      delta = std::max(delta, std::abs(t - u[i]));
      u[i] = t;
    }
    if (delta < tol) return true;
  }
  return false;
}

Vec prox_simplex(ConstSpan drift, double s, double pm, ConstSpan c) {
  size_t n = drift.size();
  SimplexProblem pr{drift, c, s, pm, 0.0};
  Vec u(n, 1.0 / n);
  double b0 = linf_norm(drift) + 1.0;
  double lo = -b0, hi = b0;
  auto sum = [&](const Vec& x) {
    double t = 0;
    for (double v : x) t += v;
    return t;
  };
  // expand the bracket if the spec'd initial one does not straddle
  for (int k = 0; k < 60; ++k) {
    pr.nu = lo;
    simplex_cd(pr, u, 300, 1e-13);
    if (sum(u) > 1.0) break;
    lo *= 2.0;
    if (lo < -1e15) throw NumericError("prox_step: simplex bracket exhausted");
  }
  for (int k = 0; k < 60; ++k) {
    pr.nu = hi;
    simplex_cd(pr, u, 300, 1e-13);
    if (sum(u) < 1.0) break;
    hi *= 2.0;
    if (hi > 1e15) throw NumericError("prox_step: simplex bracket exhausted");
  }
  double resid = 1.0;
  for (int k = 0; k < 200; ++k) {
    pr.nu = 0.5 * (lo + hi);
    simplex_cd(pr, u, 300, 1e-13);
    double sm = sum(u);
    resid = std::abs(sm - 1.0);
    if (resid <= 1e-12) break;
    if (sm > 1.0)
      lo = pr.nu;
    else
      hi = pr.nu;
  }
  if (resid > 1e-10)
    throw NumericError("prox_step: simplex bisection residual " +
                       std::to_string(resid));
  double sm = sum(u);
  if (sm > 0.0)
    for (double& v : u) v /= sm;
  return u;
}

}  // namespace

Vec prox_step(ConstSpan prev, ConstSpan drift, const LpGeometry& geom,
              const ConstraintSet& set, ConstSpan center, double psi_scale) {
  if (static_cast<int>(drift.size()) != geom.d ||
      static_cast<int>(center.size()) != geom.d)
    throw DomainError("prox_step: dimension mismatch");
  if (psi_scale <= 0.0) throw DomainError("prox_step: psi_scale must be > 0");
  switch (set.kind) {
    case ConstraintSet::Kind::LpBall:
      return prox_ball(prev, drift, psi_scale, geom.p_bar, set, center);
    case ConstraintSet::Kind::Simplex:
      return prox_simplex(drift, psi_scale, geom.p_bar, center);
    case ConstraintSet::Kind::Product:
      throw DomainError("prox_step: product sets go through prox_step_product");
  }
  throw DomainError("prox_step: unsupported set kind");
}

Vec prox_step_product(ConstSpan prev, ConstSpan drift,
                      const ProductGeometry& geom, const ConstraintSet& set,
                      ConstSpan center, double psi_scale) {
  if (!geom.theta_geom) {
    const ConstraintSet& block =
        set.kind == ConstraintSet::Kind::Product ? set.children.at(0) : set;
    double s = psi_scale / (geom.w_geom.scale * geom.w_geom.scale);
    return prox_step(prev, drift, geom.w_geom, block, center, s);
  }
  if (set.kind != ConstraintSet::Kind::Product || set.children.size() != 2)
    throw DomainError("prox_step_product: expected a two-block product set");
  int dw = geom.dim_w();
  int dt = geom.dim_theta();
  double sw = psi_scale / (geom.w_geom.scale * geom.w_geom.scale);
  double st = psi_scale / (geom.theta_geom->scale * geom.theta_geom->scale);
  Vec uw = prox_step(prev.empty() ? prev : prev.subspan(0, dw),
                     drift.subspan(0, dw), geom.w_geom, set.children[0],
                     center.subspan(0, dw), sw);
  Vec ut = prox_step(prev.empty() ? prev : prev.subspan(dw, dt),
                     drift.subspan(dw, dt), *geom.theta_geom, set.children[1],
                     center.subspan(dw, dt), st);
  return concat(uw, ut);
}

double product_diameter(const ProductGeometry& geom, const ConstraintSet& set) {
  if (!geom.theta_geom) {
    const ConstraintSet& b =
        set.kind == ConstraintSet::Kind::Product ? set.children.at(0) : set;
    return b.diameter(geom.w_geom.p_bar) / geom.w_geom.scale;
  }
  if (set.kind != ConstraintSet::Kind::Product || set.children.size() != 2)
    throw DomainError("product_diameter: expected a two-block product set");
  double dw = set.children[0].diameter(geom.w_geom.p_bar) / geom.w_geom.scale;
  double dt =
      set.children[1].diameter(geom.theta_geom->p_bar) / geom.theta_geom->scale;
  return std::sqrt(dw * dw + dt * dt);
}

Vec random_feasible_point(const ConstraintSet& set, RngStream& rng) {
  switch (set.kind) {
    case ConstraintSet::Kind::LpBall: {
      for (int attempt = 0; attempt < 10000; ++attempt) {
        Vec v(set.dim);
        for (auto& x : v) x = rng.uniform(-set.radius, set.radius);
        if (lp_norm(v, set.ball_p) <= set.radius) {
          if (!set.center.empty())
            for (int i = 0; i < set.dim; ++i) v[i] += set.center[i];
          return v;
        }
      }
      // high dimension: fall back to a scaled direction
      Vec v(set.dim);
      for (auto& x : v) x = rng.normal();
      double n = lp_norm(v, set.ball_p);
      double r = set.radius * std::pow(rng.uniform(0.0, 1.0), 1.0 / set.dim);
      Vec u = scaled(v, n > 0 ? r / n : 0.0);
      if (!set.center.empty())
        for (int i = 0; i < set.dim; ++i) u[i] += set.center[i];
      return u;
    }
    case ConstraintSet::Kind::Simplex: {
      Vec v(set.dim);
      double s = 0.0;
      for (auto& x : v) {
        x = -std::log(rng.uniform(1e-12, 1.0));
        s += x;
      }
      for (auto& x : v) x /= s;
      return v;
    }
    case ConstraintSet::Kind::Product: {
      Vec r;
      for (const auto& c : set.children) {
        Vec b = random_feasible_point(c, rng);
        r.insert(r.end(), b.begin(), b.end());
      }
      return r;
    }
  }
  throw DomainError("random_feasible_point: unsupported set kind");
}

}  // namespace dpvi
