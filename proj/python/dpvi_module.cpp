// Python bindings for the main library operations: instance construction,
// dataset sampling, noise calibration, the recursive solver, gap
// evaluation, probes, and rate sweeps.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "dpvi/evaluation.hpp"

namespace py = pybind11;
using namespace dpvi;

namespace {

py::dict calibration_dict(const NoiseCalibration& cal) {
  py::dict out;
  out["iterations"] = cal.iterations;
  out["batch_size"] = cal.batch_size;
  out["sigma_w"] = cal.sigma_w;
  out["sigma_theta"] = cal.sigma_theta;
  out["accountant_constant"] = cal.accountant_constant;
  out["kappa_tilde"] = cal.kappa_tilde;
  return out;
}

py::dict solve_impl(const ProblemInstance& inst, long n, uint64_t seed,
                    bool exact, double epsilon, double delta, double lam,
                    double eta, double accountant_constant,
                    double exact_tolerance) {
  if (n < 4) throw DomainError("solve: n must be >= 4");
  bool svi = !is_ssp(inst.kind);
  double D = product_diameter(inst.geometry, inst.constraint);
  double L = inst.operator_bound;
  double kappa = inst.geometry.kappa;
  Dataset data = sample_dataset(inst, static_cast<int>(n),
                                derive_seed(seed, 0x646174, 0));
  long n_prime = static_cast<long>(
      std::floor(static_cast<double>(n) / std::log2(static_cast<double>(n))));
  double lambda =
      lam > 0.0 ? lam
                : lambda_default(svi, 0.0, kappa, L, inst.operator_lipschitz,
                                 n_prime, D);
  Subroutine sub;
  if (exact) {
    sub = make_exact_subroutine(exact_tolerance);
  } else {
    PrivacyBudget budget(epsilon, delta);
    OutputMode mode = svi ? OutputMode::RandomIterate : OutputMode::Average;
    sub = [budget, mode, accountant_constant,
           eta](const SubroutineContext& ctx) {
      return dp_mirror_prox(ctx, budget, mode, accountant_constant, eta);
    };
  }
  RecursionResult run =
      svi ? recursive_regularization_svi(data, inst, sub, lambda, seed)
          : recursive_regularization_ssp(data, inst, sub, lambda, seed);
  ConstSpan z(run.final_point);
  double gap = svi ? vi_gap(inst, z).gap_value
                   : sp_gap(inst, z.first(inst.dim_w()),
                            z.subspan(inst.dim_w()))
                         .gap_value;
  py::dict out;
  out["final_point"] = run.final_point;
  out["gap"] = gap;
  out["rounds"] = run.schedule.rounds;
  out["chunk_size"] = run.schedule.chunk_size;
  out["lambda"] = run.schedule.lambda;
  out["final_radius"] =
      run.schedule.diameter *
      std::ldexp(1.0, -static_cast<int>(run.schedule.rounds));
  out["grad_evals"] = run.log.total_grad_evals;
  return out;
}

py::dict sweep_impl(const std::string& kind,
                    const std::map<std::string, double>& params,
                    const std::vector<long>& n_values,
                    const std::vector<double>& eps_values, double delta,
                    int seeds, uint64_t seed, bool exact, double lam,
                    double eta, double accountant_constant) {
  SweepConfig cfg;
  cfg.kind = kind;
  cfg.params = params;
  cfg.n_values = n_values;
  cfg.eps_values = eps_values;
  cfg.delta = delta;
  cfg.seeds = seeds;
  cfg.base_seed = seed;
  cfg.exact_subroutine = exact;
  cfg.lambda_override = lam;
  cfg.eta_override = eta;
  cfg.accountant_constant = accountant_constant;
  SweepResult res = rate_sweep(cfg);

  py::list cells;
  for (const auto& c : res.cells) {
    py::dict cell;
    cell["kind"] = c.kind;
    cell["n"] = c.n;
    cell["d"] = c.d;
    cell["epsilon"] = c.epsilon;
    cell["delta"] = c.delta;
    cell["seed"] = c.seed;
    cell["gap"] = c.gap;
    cell["grad_evals"] = c.grad_evals;
    cell["failed"] = c.failed;
    cell["error"] = c.error;
    cells.append(cell);
  }
  py::list aggregates;
  for (const auto& a : res.aggregates) {
    py::dict agg;
    agg["n"] = a.n;
    agg["epsilon"] = a.epsilon;
    agg["mean_gap"] = a.mean_gap;
    agg["stderr_gap"] = a.stderr_gap;
    agg["mean_grad_evals"] = a.mean_grad_evals;
    agg["valid_seeds"] = a.valid_seeds;
    agg["sampling_dominated"] = a.sampling_dominated;
    aggregates.append(agg);
  }
  py::dict fit;
  fit["valid"] = res.fit.valid;
  fit["slope"] = res.fit.slope;
  fit["intercept"] = res.fit.intercept;
  fit["half_width"] = res.fit.half_width;
  fit["cells_used"] = res.fit.cells_used;
  fit["used_all_cells"] = res.fit.used_all_cells;

  py::dict out;
  out["cells"] = cells;
  out["aggregates"] = aggregates;
  out["fit"] = fit;
  return out;
}

}  // namespace

PYBIND11_MODULE(_dpvi, m) {
  m.doc() =
      "Differentially private solvers for stochastic saddle-point and "
      "variational-inequality problems in lp/lq geometries";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError",
                                       PyExc_RuntimeError);

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def_property_readonly(
          "kind", [](const ProblemInstance& i) { return kind_name(i.kind); })
      .def_property_readonly("dim", &ProblemInstance::dim)
      .def_property_readonly("dim_w", &ProblemInstance::dim_w)
      .def_property_readonly("dim_theta", &ProblemInstance::dim_theta)
      .def_property_readonly(
          "is_saddle_point",
          [](const ProblemInstance& i) { return is_ssp(i.kind); })
      .def_property_readonly(
          "operator_bound",
          [](const ProblemInstance& i) { return i.operator_bound; })
      .def_property_readonly("diameter",
                             [](const ProblemInstance& i) {
                               return product_diameter(i.geometry,
                                                       i.constraint);
                             })
      .def("population_operator",
           [](const ProblemInstance& i, const Vec& z) {
             return i.population_operator(z);
           })
      .def("population_loss",
           [](const ProblemInstance& i, const Vec& w, const Vec& theta) {
             return i.population_loss(w, theta);
           })
      .def("equilibrium", [](const ProblemInstance& i) {
        return i.population_truth().equilibrium;
      });

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_property_readonly(
          "samples", [](const Dataset& d) { return d.samples; });

  m.def("make_instance", &make_instance, py::arg("kind"),
        py::arg("params") = std::map<std::string, double>{},
        "Build a benchmark instance by name (bilinear_ssp, "
        "quadratic_scsc_ssp, group_dro_ssp, linear_vi, affine_monotone_vi, "
        "scalar_square_vi) with a flat numeric parameter map.");

  m.def(
      "sample_dataset",
      [](const ProblemInstance& inst, int n, uint64_t seed) {
        return sample_dataset(inst, n, seed);
      },
      py::arg("instance"), py::arg("n"), py::arg("seed") = 1);

  m.def(
      "calibrate",
      [](double epsilon, double delta, long n, int d_w, int d_theta,
         double p, double q, double lipschitz_w, double lipschitz_theta,
         double radius_w, double radius_theta, double accountant_constant) {
        ProductGeometry geom(LpGeometry(p, d_w, radius_w),
                             LpGeometry(q, d_theta, radius_theta));
        return calibration_dict(
            calibrate(PrivacyBudget(epsilon, delta), geom, lipschitz_w,
                      lipschitz_theta, n, d_w, d_theta,
                      accountant_constant));
      },
      py::arg("epsilon"), py::arg("delta") = 1e-5, py::arg("n") = 1000,
      py::arg("d_w") = 5, py::arg("d_theta") = 5, py::arg("p") = 2.0,
      py::arg("q") = 2.0, py::arg("lipschitz_w") = 1.0,
      py::arg("lipschitz_theta") = 1.0, py::arg("radius_w") = 0.5,
      py::arg("radius_theta") = 0.5, py::arg("accountant_constant") = 1.0,
      "Gaussian noise schedule (iterations, batch size, per-block sigma) "
      "for a privacy budget.");

  m.def(
      "sp_gap",
      [](const ProblemInstance& inst, const Vec& w, const Vec& theta) {
        return sp_gap(inst, w, theta).gap_value;
      },
      py::arg("instance"), py::arg("w"), py::arg("theta"),
      "Strong population saddle-point gap at (w, theta).");

  m.def(
      "vi_gap",
      [](const ProblemInstance& inst, const Vec& z) {
        return vi_gap(inst, z).gap_value;
      },
      py::arg("instance"), py::arg("z"),
      "Strong population variational-inequality gap at z.");

  m.def("solve", &solve_impl, py::arg("instance"), py::arg("n") = 1024,
        py::arg("seed") = 1, py::arg("exact") = false,
        py::arg("epsilon") = 1.0, py::arg("delta") = 1e-5,
        py::arg("lam") = 0.0, py::arg("eta") = 0.0,
        py::arg("accountant_constant") = 1.0,
        py::arg("exact_tolerance") = 1e-9,
        "Run the recursive-regularization solver on a fresh dataset and "
        "report the final point and its population gap.");

  m.def("rate_sweep", &sweep_impl, py::arg("kind"),
        py::arg("params") = std::map<std::string, double>{},
        py::arg("n_values") = std::vector<long>{256, 512, 1024, 2048},
        py::arg("eps_values") = std::vector<double>{1.0},
        py::arg("delta") = 1e-5, py::arg("seeds") = 20, py::arg("seed") = 1,
        py::arg("exact") = false, py::arg("lam") = 0.0, py::arg("eta") = 0.0,
        py::arg("accountant_constant") = 1.0,
        "Gap-versus-n sweep with a log-log slope fit.");

  m.def(
      "uas_probe",
      [](const ProblemInstance& inst, double weight, long n, int trials,
         uint64_t seed) {
        auto r = uas_probe(inst, weight, n, trials, seed);
        py::dict out;
        out["max_distance"] = r.max_distance;
        out["bound"] = r.bound;
        out["pass"] = r.pass;
        return out;
      },
      py::arg("instance"), py::arg("weight"), py::arg("n"),
      py::arg("trials") = 20, py::arg("seed") = 1,
      "Swap-one-sample argument stability of the regularized equilibrium.");

  m.def(
      "stability_generalization_probe",
      [](const ProblemInstance& inst, double weight, long n, int trials,
         uint64_t seed) {
        auto r = stability_generalization_probe(inst, weight, n, trials,
                                                seed);
        py::dict out;
        out["mean_diff"] = r.mean_diff;
        out["stderr_diff"] = r.stderr_diff;
        out["bound"] = r.bound;
        out["pass"] = r.pass;
        return out;
      },
      py::arg("instance"), py::arg("weight"), py::arg("n"),
      py::arg("trials") = 200, py::arg("seed") = 1,
      "Monte Carlo check that stability bounds the generalization gap.");
}
