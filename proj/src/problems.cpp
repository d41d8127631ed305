#include "dpvi/problems.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace dpvi {

bool is_ssp(ProblemKind k) {
  return k == ProblemKind::BilinearSsp || k == ProblemKind::QuadraticScscSsp ||
         k == ProblemKind::GroupDroSsp;
}

std::string kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::BilinearSsp: return "bilinear_ssp";
    case ProblemKind::QuadraticScscSsp: return "quadratic_scsc_ssp";
    case ProblemKind::GroupDroSsp: return "group_dro_ssp";
    case ProblemKind::LinearVi: return "linear_vi";
    case ProblemKind::AffineMonotoneVi: return "affine_monotone_vi";
    case ProblemKind::ScalarSquareVi: return "scalar_square_vi";
  }
  return "?";
}

ProblemKind kind_from_name(const std::string& name) {
  for (ProblemKind k :
       {ProblemKind::BilinearSsp, ProblemKind::QuadraticScscSsp,
        ProblemKind::GroupDroSsp, ProblemKind::LinearVi,
        ProblemKind::AffineMonotoneVi, ProblemKind::ScalarSquareVi})
    if (kind_name(k) == name) return k;
  throw DomainError("unknown problem kind: " + name);
}

Vec linear_argmin(const ConstraintSet& set, ConstSpan g) {
  switch (set.kind) {
    case ConstraintSet::Kind::LpBall: {
      Vec u = set.center.empty() ? Vec(set.dim, 0.0) : set.center;
      double gmax = linf_norm(g);
      if (gmax == 0.0) return u;
      if (set.ball_p <= 1.0) {
        // vertex of the l1 ball; lowest index on ties
        size_t i0 = 0;
        for (size_t i = 0; i < g.size(); ++i)
          if (std::abs(g[i]) > std::abs(g[i0])) i0 = i;
        u[i0] -= set.radius * (g[i0] >= 0 ? 1.0 : -1.0);
        return u;
      }
      double q = set.ball_p / (set.ball_p - 1.0);
      double gq = lp_norm(g, q);
      for (size_t i = 0; i < g.size(); ++i) {
        double s = std::copysign(
            std::pow(std::abs(g[i]) / gmax, q - 1.0), g[i]);
        u[i] -= set.radius * s * std::pow(gmax / gq, q - 1.0);
      }
      return u;
    }
    case ConstraintSet::Kind::Simplex: {
      size_t j0 = 0;
      for (size_t j = 1; j < g.size(); ++j)
        if (g[j] < g[j0]) j0 = j;
      Vec u(set.dim, 0.0);
      u[j0] = 1.0;
      return u;
    }
    case ConstraintSet::Kind::Product: {
      Vec u;
      size_t off = 0;
      for (const auto& c : set.children) {
        Vec b = linear_argmin(c, g.subspan(off, c.dimension()));
        u.insert(u.end(), b.begin(), b.end());
        off += c.dimension();
      }
      return u;
    }
  }
  throw DomainError("linear_argmin: unsupported set kind");
}

namespace {

double dual_ball_exponent(double p) {
  return p <= 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
}

double dual_block_norm(ConstSpan v, double q) {
  return std::isinf(q) ? linf_norm(v) : lp_norm(v, q);
}

// sup over the q-ball of radius r of <a, theta>
double support_q_ball(ConstSpan a, double q_exp, double r) {
  return r * dual_block_norm(a, dual_ball_exponent(q_exp));
}

Vec box_noise(RngStream& rng, int n, double scale) {
  Vec x(n);
  for (auto& v : x) v = rng.uniform(-scale, scale);
  return x;
}

Eigen::Map<const Eigen::VectorXd> emap(ConstSpan v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

// generic Lipschitz bound for an affine operator z -> Mz (+const) measured
// in the rescaled product norm and its dual, from a bound on sigma_max(M)
double affine_operator_lipschitz(double spectral_bound,
                                 const ProductGeometry& geom) {
  double dmax = geom.w_geom.scale;
  double dsum = geom.w_geom.scale * geom.w_geom.scale;
  if (geom.theta_geom) {
    dmax = std::max(dmax, geom.theta_geom->scale);
    dsum += geom.theta_geom->scale * geom.theta_geom->scale;
  }
  return spectral_bound * dmax * std::sqrt(dsum);
}

// sigma_max of the worst-case magnitude matrix dominates sigma_max of
// every sample matrix whose entries it bounds
double worst_case_spectral(const Eigen::MatrixXd& A, double noise) {
  Eigen::MatrixXd W = A.cwiseAbs().array() + noise;
  return spectral_norm(W);
}

}  // namespace

Vec ProblemInstance::sample_one(RngStream& rng) const {
  switch (kind) {
    case ProblemKind::BilinearSsp:
    case ProblemKind::QuadraticScscSsp:
    case ProblemKind::GroupDroSsp:
    case ProblemKind::AffineMonotoneVi:
      if (kind == ProblemKind::GroupDroSsp) {
        // one draw per group around its mean
        int k = static_cast<int>(group_means.rows());
        int d = dim_w();
        Vec x(k * d);
        for (int j = 0; j < k; ++j)
          for (int i = 0; i < d; ++i)
            x[j * d + i] =
                group_means(j, i) + rng.uniform(-noise_scale, noise_scale);
        return x;
      }
      return box_noise(rng, sample_dim, noise_scale);
    case ProblemKind::LinearVi: {
      if (!atoms.empty()) return atoms[rng.index(atoms.size())];
      Vec x = box_noise(rng, sample_dim, noise_scale);
      for (int i = 0; i < sample_dim; ++i) x[i] += b[i];  // b stores the mean
      return x;
    }
    case ProblemKind::ScalarSquareVi:
      return Vec(1, 0.0);
  }
  throw DomainError("sample_one: bad kind");
}

Vec ProblemInstance::per_sample_operator(ConstSpan z, ConstSpan x) const {
  if (static_cast<int>(z.size()) != dim())
    throw DomainError("per_sample_operator: dimension mismatch");
  if (!constraint.contains(z, 1e-6))
    throw DomainError("per_sample_operator: point outside the feasible set");
  int dw = dim_w(), dt = dim_theta();
  switch (kind) {
    case ProblemKind::BilinearSsp:
    case ProblemKind::QuadraticScscSsp: {
      Eigen::Map<const Eigen::MatrixXd> XA(x.data(), dt, dw);  // col-major
      Eigen::MatrixXd Aeff = A + XA.transpose();
      Eigen::VectorXd w = emap(z.first(dw)), th = emap(z.subspan(dw, dt));
      Eigen::VectorXd gw = Aeff * th;
      Eigen::VectorXd gt = -(Aeff.transpose() * w);
      Vec g(dw + dt);
      for (int i = 0; i < dw; ++i) g[i] = gw(i) + b[i] + x[dw * dt + i];
      for (int j = 0; j < dt; ++j)
        g[dw + j] = gt(j) - (c[j] + x[dw * dt + dw + j]);
      if (kind == ProblemKind::QuadraticScscSsp) {
        for (int i = 0; i < dw; ++i) g[i] += mu_w * z[i];
        for (int j = 0; j < dt; ++j) g[dw + j] += mu_theta * z[dw + j];
      }
      return g;
    }
    case ProblemKind::GroupDroSsp: {
      int k = dt;
      Vec g(dw + k, 0.0);
      for (int j = 0; j < k; ++j) {
        ConstSpan xj = x.subspan(static_cast<size_t>(j) * dw, dw);
        for (int i = 0; i < dw; ++i) g[i] += z[dw + j] * xj[i];
        g[dw + j] = -dot(z.first(dw), xj);
      }
      return g;
    }
    case ProblemKind::LinearVi:
      return to_vec(x);
    case ProblemKind::AffineMonotoneVi: {
      Eigen::VectorXd gz = A * emap(z);
      Vec g(dim());
      for (int i = 0; i < dim(); ++i) g[i] = gz(i) + b[i] + x[i];
      return g;
    }
    case ProblemKind::ScalarSquareVi:
      return Vec(1, 2.0 * z[0]);
  }
  throw DomainError("per_sample_operator: bad kind");
}

double ProblemInstance::per_sample_loss(ConstSpan w, ConstSpan theta,
                                        ConstSpan x) const {
  int dw = dim_w(), dt = dim_theta();
  switch (kind) {
    case ProblemKind::BilinearSsp:
    case ProblemKind::QuadraticScscSsp: {
      Eigen::Map<const Eigen::MatrixXd> XA(x.data(), dt, dw);
      Eigen::MatrixXd Aeff = A + XA.transpose();
      Eigen::VectorXd we = emap(w), te = emap(theta);
      double f = we.dot(Aeff * te);
      for (int i = 0; i < dw; ++i) f += (b[i] + x[dw * dt + i]) * w[i];
      for (int j = 0; j < dt; ++j) f += (c[j] + x[dw * dt + dw + j]) * theta[j];
      if (kind == ProblemKind::QuadraticScscSsp) {
        f += 0.5 * mu_w * we.squaredNorm() - 0.5 * mu_theta * te.squaredNorm();
      }
      return f;
    }
    case ProblemKind::GroupDroSsp: {
      double f = 0.0;
      for (int j = 0; j < dt; ++j)
        f += theta[j] * dot(w, x.subspan(static_cast<size_t>(j) * dw, dw));
      return f;
    }
    case ProblemKind::LinearVi:
      return dot(w, x);
    case ProblemKind::ScalarSquareVi:
      return w[0] * w[0];
    case ProblemKind::AffineMonotoneVi:
      throw DomainError("per_sample_loss: operator-only instance");
  }
  throw DomainError("per_sample_loss: bad kind");
}

Vec ProblemInstance::population_operator(ConstSpan z) const {
  switch (kind) {
    case ProblemKind::BilinearSsp:
    case ProblemKind::QuadraticScscSsp:
    case ProblemKind::AffineMonotoneVi:
    case ProblemKind::ScalarSquareVi:
      // noise is mean-zero: evaluate at the zero sample
      return per_sample_operator(z, Vec(sample_dim, 0.0));
    case ProblemKind::GroupDroSsp: {
      int k = dim_theta(), dw = dim_w();
      Vec x(static_cast<size_t>(k) * dw);
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < dw; ++i) x[j * dw + i] = group_means(j, i);
      return per_sample_operator(z, x);
    }
    case ProblemKind::LinearVi: {
      if (atoms.empty()) return b;
      Vec m(sample_dim, 0.0);
      for (const auto& a : atoms) axpy(1.0 / atoms.size(), a, m);
      (void)z;
      return m;
    }
  }
  throw DomainError("population_operator: bad kind");
}

double ProblemInstance::population_loss(ConstSpan w, ConstSpan theta) const {
  switch (kind) {
    case ProblemKind::BilinearSsp:
    case ProblemKind::QuadraticScscSsp:
    case ProblemKind::ScalarSquareVi:
      return per_sample_loss(w, theta, Vec(sample_dim, 0.0));
    case ProblemKind::GroupDroSsp: {
      int k = dim_theta(), dw = dim_w();
      Vec x(static_cast<size_t>(k) * dw);
      for (int j = 0; j < k; ++j)
        for (int i = 0; i < dw; ++i) x[j * dw + i] = group_means(j, i);
      return per_sample_loss(w, theta, x);
    }
    case ProblemKind::LinearVi: {
      Vec m = population_operator(w);
      return dot(w, m);
    }
    case ProblemKind::AffineMonotoneVi:
      throw DomainError("population_loss: operator-only instance");
  }
  throw DomainError("population_loss: bad kind");
}

Vec ProblemInstance::empirical_operator(ConstSpan z, const Dataset& data) const {
  if (data.size() == 0) throw DomainError("empirical_operator: empty dataset");
  Vec g(dim(), 0.0);
  for (const auto& x : data.samples)
    axpy(1.0 / data.size(), per_sample_operator(z, x), g);
  return g;
}

PopulationTruth ProblemInstance::population_truth() const {
  PopulationTruth t;
  switch (kind) {
    case ProblemKind::ScalarSquareVi:
      t.equilibrium = Vec(1, 0.0);
      t.optimum_value = 0.0;
      return t;
    case ProblemKind::LinearVi: {
      Vec m = population_operator(Vec(dim(), 0.0));
      t.equilibrium = linear_argmin(constraint, m);
      t.optimum_value = dot(m, t.equilibrium);
      return t;
    }
    case ProblemKind::QuadraticScscSsp: {
      int dw = dim_w(), dt = dim_theta();
      Eigen::MatrixXd M(dw + dt, dw + dt);
      M.setZero();
      M.topLeftCorner(dw, dw) = mu_w * Eigen::MatrixXd::Identity(dw, dw);
      M.bottomRightCorner(dt, dt) =
          mu_theta * Eigen::MatrixXd::Identity(dt, dt);
      M.topRightCorner(dw, dt) = A;
      M.bottomLeftCorner(dt, dw) = -A.transpose();
      Eigen::VectorXd rhs(dw + dt);
      for (int i = 0; i < dw; ++i) rhs(i) = -b[i];
      for (int j = 0; j < dt; ++j) rhs(dw + j) = c[j];
      Eigen::VectorXd zs = M.fullPivLu().solve(rhs);
      Vec z(zs.data(), zs.data() + zs.size());
      if (constraint.contains(z, 1e-10)) {
        t.equilibrium = z;
        t.optimum_value =
            population_loss(ConstSpan(z).first(dw), ConstSpan(z).subspan(dw, dt));
        return t;
      }
      break;  // boundary case: fall through to the generic solve
    }
    default:
      break;
  }
  // zero-offset bilinear has the saddle at the origin by symmetry
  if (kind == ProblemKind::BilinearSsp && linf_norm(b) == 0.0 &&
      linf_norm(c) == 0.0 && constraint.contains(Vec(dim(), 0.0), 1e-12)) {
    t.equilibrium = Vec(dim(), 0.0);
    t.optimum_value = 0.0;
    return t;
  }
  Operator G = [this](ConstSpan z) { return population_operator(z); };
  ViSolveOptions opts;
  opts.tolerance = 1e-11;
  t.equilibrium = vi_solve(G, geometry, constraint, opts);
  if (is_ssp(kind)) {
    int dw = dim_w();
    t.optimum_value = population_loss(ConstSpan(t.equilibrium).first(dw),
                                      ConstSpan(t.equilibrium).subspan(dw));
  }
  return t;
}

Dataset sample_dataset(const ProblemInstance& instance, int n, uint64_t seed) {
  if (n < 1) throw DomainError("sample_dataset: n must be >= 1");
  Dataset d;
  d.samples.reserve(n);
  RngStream rng(derive_seed(seed, /*tag_a=*/1));
  for (int i = 0; i < n; ++i) d.samples.push_back(instance.sample_one(rng));
  return d;
}

void write_dataset_csv(const Dataset& data, const ProblemInstance& instance,
                       uint64_t seed, std::ostream& out) {
  out << "kind,n,d,seed\n"
      << kind_name(instance.kind) << ',' << data.size() << ','
      << instance.sample_dim << ',' << seed << '\n';
  out.precision(17);
  for (const auto& x : data.samples) {
    for (size_t i = 0; i < x.size(); ++i)
      out << (i ? "," : "") << x[i];
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

namespace {

void finalize_ssp_bounds(ProblemInstance& inst, const Vec& worst_gw,
                         const Vec& worst_gt) {
  const auto& wg = inst.geometry.w_geom;
  const auto& tg = *inst.geometry.theta_geom;
  inst.lipschitz_w = lp_norm(worst_gw, wg.p_star);
  inst.lipschitz_theta = lp_norm(worst_gt, tg.p_star);
  double a = wg.scale * inst.lipschitz_w;
  double bb = tg.scale * inst.lipschitz_theta;
  inst.operator_bound = std::sqrt(a * a + bb * bb);
}

}  // namespace

ProblemInstance make_bilinear_ssp(int d_w, int d_theta, double p, double q,
                                  double radius_w, double radius_theta,
                                  double noise, uint64_t param_seed,
                                  bool zero_offsets) {
  RngStream rng(derive_seed(param_seed, /*tag_a=*/11));
  Eigen::MatrixXd A(d_w, d_theta);
  for (int i = 0; i < d_w; ++i)
    for (int j = 0; j < d_theta; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
  Vec b(d_w, 0.0), c(d_theta, 0.0);
  if (!zero_offsets) {
    for (auto& v : b) v = rng.uniform(-0.5, 0.5);
    for (auto& v : c) v = rng.uniform(-0.5, 0.5);
  }
  return make_bilinear_ssp_explicit(A, std::move(b), std::move(c), p, q,
                                    radius_w, radius_theta, noise);
}

ProblemInstance make_bilinear_ssp_explicit(const Eigen::MatrixXd& A, Vec b,
                                           Vec c, double p, double q,
                                           double radius_w,
                                           double radius_theta, double noise) {
  int d_w = static_cast<int>(A.rows()), d_theta = static_cast<int>(A.cols());
  if (static_cast<int>(b.size()) != d_w ||
      static_cast<int>(c.size()) != d_theta)
    throw DomainError("make_bilinear_ssp_explicit: offset dimension mismatch");
  ProblemInstance inst;
  inst.kind = ProblemKind::BilinearSsp;
  inst.geometry = ProductGeometry(LpGeometry(p, d_w, radius_w),
                                  LpGeometry(q, d_theta, radius_theta));
  inst.constraint =
      ConstraintSet::product({ConstraintSet::lp_ball(p, d_w, radius_w),
                              ConstraintSet::lp_ball(q, d_theta, radius_theta)});
  inst.noise_scale = noise;
  inst.sample_dim = d_w * d_theta + d_w + d_theta;
  inst.A = A;
  inst.b = std::move(b);
  inst.c = std::move(c);

  // worst-case per-component gradient magnitudes over the feasible set
  Vec worst_gw(d_w), worst_gt(d_theta);
  for (int i = 0; i < d_w; ++i) {
    Vec row(d_theta);
    for (int j = 0; j < d_theta; ++j) row[j] = std::abs(inst.A(i, j)) + noise;
    worst_gw[i] = support_q_ball(row, q, radius_theta) + std::abs(inst.b[i]) +
                  noise;
  }
  for (int j = 0; j < d_theta; ++j) {
    Vec col(d_w);
    for (int i = 0; i < d_w; ++i) col[i] = std::abs(inst.A(i, j)) + noise;
    worst_gt[j] = support_q_ball(col, p, radius_w) + std::abs(inst.c[j]) +
                  noise;
  }
  finalize_ssp_bounds(inst, worst_gw, worst_gt);

  // singular values of [[0, A], [-A^T, 0]] are those of A, maximized over
  // samples by the worst-case magnitude matrix
  inst.operator_lipschitz = affine_operator_lipschitz(
      worst_case_spectral(inst.A, noise), inst.geometry);
  return inst;
}

ProblemInstance make_quadratic_scsc_ssp(int d_w, int d_theta, double mu_w,
                                        double mu_theta, double radius,
                                        double noise, uint64_t param_seed) {
  ProblemInstance inst =
      make_bilinear_ssp(d_w, d_theta, 2.0, 2.0, radius, radius, noise,
                        param_seed, /*zero_offsets=*/false);
  inst.kind = ProblemKind::QuadraticScscSsp;
  inst.mu_w = mu_w;
  inst.mu_theta = mu_theta;
  // curvature adds mu * radius to the per-component worst case (|w_i| <= r)
  Vec worst_gw(d_w), worst_gt(d_theta);
  for (int i = 0; i < d_w; ++i) {
    Vec row(d_theta);
    for (int j = 0; j < d_theta; ++j) row[j] = std::abs(inst.A(i, j)) + noise;
    worst_gw[i] = support_q_ball(row, 2.0, radius) + std::abs(inst.b[i]) +
                  noise + mu_w * radius;
  }
  for (int j = 0; j < d_theta; ++j) {
    Vec col(d_w);
    for (int i = 0; i < d_w; ++i) col[i] = std::abs(inst.A(i, j)) + noise;
    worst_gt[j] = support_q_ball(col, 2.0, radius) + std::abs(inst.c[j]) +
                  noise + mu_theta * radius;
  }
  finalize_ssp_bounds(inst, worst_gw, worst_gt);

  inst.operator_lipschitz = affine_operator_lipschitz(
      std::max(mu_w, mu_theta) + worst_case_spectral(inst.A, noise),
      inst.geometry);
  return inst;
}

ProblemInstance make_group_dro_ssp(int d_w, int k, double p, double radius_w,
                                   double noise, uint64_t param_seed) {
  ProblemInstance inst;
  inst.kind = ProblemKind::GroupDroSsp;
  inst.geometry = ProductGeometry(LpGeometry(p, d_w, radius_w),
                                  LpGeometry(1.0, k, 1.0));
  inst.constraint = ConstraintSet::product(
      {ConstraintSet::lp_ball(p, d_w, radius_w), ConstraintSet::simplex(k)});
  inst.noise_scale = noise;
  inst.sample_dim = k * d_w;

  RngStream rng(derive_seed(param_seed, /*tag_a=*/13));
  inst.group_means.resize(k, d_w);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < d_w; ++i) inst.group_means(j, i) = rng.uniform(-1.0, 1.0);

  Vec worst_gw(d_w, 0.0), worst_gt(k, 0.0);
  for (int i = 0; i < d_w; ++i)
    for (int j = 0; j < k; ++j)
      worst_gw[i] =
          std::max(worst_gw[i], std::abs(inst.group_means(j, i)) + noise);
  for (int j = 0; j < k; ++j) {
    Vec mj(d_w);
    for (int i = 0; i < d_w; ++i) mj[i] = std::abs(inst.group_means(j, i)) + noise;
    worst_gt[j] = support_q_ball(mj, p, radius_w);
  }
  finalize_ssp_bounds(inst, worst_gw, worst_gt);

  // operator is linear in z with blocks assembled from the sample; bound
  // via the worst-case sample matrix
  inst.operator_lipschitz = affine_operator_lipschitz(
      worst_case_spectral(inst.group_means, noise), inst.geometry);
  return inst;
}

ProblemInstance make_linear_vi(int d, double p, double radius, Vec mean,
                               double noise) {
  if (static_cast<int>(mean.size()) != d)
    throw DomainError("make_linear_vi: mean dimension mismatch");
  ProblemInstance inst;
  inst.kind = ProblemKind::LinearVi;
  inst.geometry = ProductGeometry(LpGeometry(p, d, radius));
  inst.constraint = ConstraintSet::lp_ball(p, d, radius);
  inst.noise_scale = noise;
  inst.sample_dim = d;
  inst.b = std::move(mean);
  Vec worst(d);
  for (int i = 0; i < d; ++i) worst[i] = std::abs(inst.b[i]) + noise;
  inst.lipschitz_w = lp_norm(worst, inst.geometry.w_geom.p_star);
  inst.operator_bound = inst.geometry.w_geom.scale * inst.lipschitz_w;
  inst.operator_lipschitz = 0.0;
  return inst;
}

ProblemInstance make_linear_vi_two_atom(int d, double p, double radius) {
  ProblemInstance inst = make_linear_vi(d, p, radius, Vec(d, 0.0), 0.0);
  Vec plus(d, 0.0), minus(d, 0.0);
  plus[0] = 1.0;
  minus[0] = -1.0;
  inst.atoms = {minus, plus};
  Vec worst(d, 0.0);
  worst[0] = 1.0;
  inst.lipschitz_w = lp_norm(worst, inst.geometry.w_geom.p_star);
  inst.operator_bound = inst.geometry.w_geom.scale * inst.lipschitz_w;
  return inst;
}

ProblemInstance make_affine_monotone_vi(int d, double radius,
                                        double strong_monotonicity,
                                        double noise, uint64_t param_seed) {
  ProblemInstance inst;
  inst.kind = ProblemKind::AffineMonotoneVi;
  inst.geometry = ProductGeometry(LpGeometry(2.0, d, radius));
  inst.constraint = ConstraintSet::lp_ball(2.0, d, radius);
  inst.noise_scale = noise;
  inst.sample_dim = d;

  RngStream rng(derive_seed(param_seed, /*tag_a=*/17));
  Eigen::MatrixXd B(d, d), C(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      B(i, j) = rng.uniform(-1.0, 1.0);
      C(i, j) = rng.uniform(-1.0, 1.0);
    }
  // symmetric PSD part + skew part keeps M + M^T PSD by construction
  Eigen::MatrixXd S = B * B.transpose() / d;
  S += strong_monotonicity * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd K = 0.5 * (C - C.transpose());
  inst.A = S + K;
  inst.b.assign(d, 0.0);
  for (auto& v : inst.b) v = rng.uniform(-0.5, 0.5);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inst.A + inst.A.transpose());
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw NumericError("make_affine_monotone_vi: symmetric part not PSD");

  Vec worst(d);
  double zmax = radius;  // |z_i| <= r on the l2 ball
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += std::abs(inst.A(i, j));
    worst[i] = s * zmax + std::abs(inst.b[i]) + noise;
  }
  inst.lipschitz_w = lp_norm(worst, inst.geometry.w_geom.p_star);
  inst.operator_bound = inst.geometry.w_geom.scale * inst.lipschitz_w;
  inst.operator_lipschitz =
      affine_operator_lipschitz(spectral_norm(inst.A), inst.geometry);
  return inst;
}

ProblemInstance make_scalar_square_vi() {
  ProblemInstance inst;
  inst.kind = ProblemKind::ScalarSquareVi;
  inst.geometry = ProductGeometry(LpGeometry(2.0, 1, 0.5));
  inst.constraint = ConstraintSet::lp_ball(2.0, 1, 0.5, {0.5});  // [0, 1]
  inst.sample_dim = 1;
  inst.noise_scale = 0.0;
  inst.lipschitz_w = 2.0;
  inst.operator_bound = inst.geometry.w_geom.scale * 2.0;
  inst.operator_lipschitz =
      affine_operator_lipschitz(2.0, inst.geometry);
  return inst;
}

ProblemInstance make_instance(const std::string& name,
                              const std::map<std::string, double>& params) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  ProblemKind kind = kind_from_name(name);
  switch (kind) {
    case ProblemKind::BilinearSsp:
      return make_bilinear_ssp(
          static_cast<int>(get("d_w", get("d", 5))),
          static_cast<int>(get("d_theta", get("d", 5))), get("p", 2.0),
          get("q", 2.0), get("radius_w", 1.0), get("radius_theta", 1.0),
          get("noise", 0.5), static_cast<uint64_t>(get("param_seed", 0)),
          get("zero_offsets", 1.0) != 0.0);
    case ProblemKind::QuadraticScscSsp:
      return make_quadratic_scsc_ssp(
          static_cast<int>(get("d_w", get("d", 5))),
          static_cast<int>(get("d_theta", get("d", 5))), get("mu_w", 1.0),
          get("mu_theta", 1.0), get("radius", 1.0), get("noise", 0.25),
          static_cast<uint64_t>(get("param_seed", 0)));
    case ProblemKind::GroupDroSsp:
      return make_group_dro_ssp(static_cast<int>(get("d_w", get("d", 5))),
                                static_cast<int>(get("k", 3)), get("p", 2.0),
                                get("radius_w", 1.0), get("noise", 0.25),
                                static_cast<uint64_t>(get("param_seed", 0)));
    case ProblemKind::LinearVi: {
      if (get("two_atom", 0.0) != 0.0)
        return make_linear_vi_two_atom(static_cast<int>(get("d", 5)),
                                       get("p", 2.0), get("radius", 1.0));
      int d = static_cast<int>(get("d", 5));
      Vec mean(d, 0.0);
      mean[0] = get("mean0", 1.0);
      return make_linear_vi(d, get("p", 2.0), get("radius", 1.0), mean,
                            get("noise", 0.5));
    }
    case ProblemKind::AffineMonotoneVi:
      return make_affine_monotone_vi(static_cast<int>(get("d", 5)),
                                     get("radius", 1.0), get("strong", 0.5),
                                     get("noise", 0.25),
                                     static_cast<uint64_t>(get("param_seed", 0)));
    case ProblemKind::ScalarSquareVi:
      return make_scalar_square_vi();
  }
  throw DomainError("make_instance: bad kind");
}

}  // namespace dpvi
