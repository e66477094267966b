#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ampsi/amp_engine.hpp"
#include "ampsi/denoisers.hpp"
#include "ampsi/experiment.hpp"
#include "ampsi/linear_model.hpp"
#include "ampsi/metrics.hpp"
#include "ampsi/prior_models.hpp"
#include "ampsi/state_evolution.hpp"
#include "ampsi/version.hpp"

namespace py = pybind11;
using namespace ampsi;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> matrix_to_numpy(const DenseMatrix& A) {
  py::array_t<double> out({static_cast<py::ssize_t>(A.rows()), static_cast<py::ssize_t>(A.cols())});
  std::copy(A.data().begin(), A.data().end(), out.mutable_data());
  return out;
}

using ScalarFn = double (*)(const DenoiserContext&, double, double);

// Broadcasts a scalar denoiser function over array-like a and b.
auto vectorized(ScalarFn fn) {
  return [fn](const DenoiserContext& ctx, py::array_t<double> a, py::array_t<double> b) {
    return py::vectorize([&ctx, fn](double x, double y) { return fn(ctx, x, y); })(a, b);
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "AMP with side information: priors, denoisers, state evolution and experiments";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<PriorModel>(m, "PriorModel")
      .def_static("gaussian", &PriorModel::gaussian, py::arg("sigma_x2"), py::arg("sigma_si2"))
      .def_static("bernoulli_gaussian", &PriorModel::bernoulli_gaussian, py::arg("epsilon"),
                  py::arg("sigma_si2"))
      .def_property_readonly("is_gg", &PriorModel::is_gg)
      .def_property_readonly("is_bg", &PriorModel::is_bg)
      .def_property_readonly("second_moment", [](const PriorModel& p) { return second_moment(p); })
      .def("sample", [](const PriorModel& p, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        auto s = sample_joint(p, n, rng);
        return py::make_tuple(to_numpy(s.signal), to_numpy(s.si));
      }, py::arg("n"), py::arg("seed"));

  py::class_<DenoiserContext>(m, "DenoiserContext")
      .def(py::init<double, PriorModel>(), py::arg("lambda2"), py::arg("prior"))
      .def_property_readonly("lambda2", &DenoiserContext::lambda2)
      .def_property_readonly("prior", &DenoiserContext::prior);
  m.def("denoise", vectorized(&denoise), py::arg("ctx"), py::arg("a"), py::arg("b"));
  m.def("deriv_a", vectorized(&deriv_a), py::arg("ctx"), py::arg("a"), py::arg("b"));
  m.def("deriv_b", vectorized(&deriv_b), py::arg("ctx"), py::arg("a"), py::arg("b"));
  m.def("bg_posterior_nonzero", vectorized(&bg_posterior_nonzero), py::arg("ctx"), py::arg("a"),
        py::arg("b"));

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init([](std::size_t n, std::size_t mm, double sigma_w2, PriorModel prior,
                       std::uint64_t seed) {
             return ModelConfig{n, mm, sigma_w2, std::move(prior), seed};
           }),
           py::arg("n"), py::arg("m"), py::arg("sigma_w2"), py::arg("prior"), py::arg("seed"))
      .def_readwrite("n", &ModelConfig::n)
      .def_readwrite("m", &ModelConfig::m)
      .def_readwrite("sigma_w2", &ModelConfig::sigma_w2)
      .def_readwrite("prior", &ModelConfig::prior)
      .def_readwrite("seed", &ModelConfig::seed)
      .def_property_readonly("delta", &ModelConfig::delta);

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def_property_readonly("A", [](const ProblemInstance& p) { return matrix_to_numpy(p.A); })
      .def_property_readonly("x", [](const ProblemInstance& p) { return to_numpy(p.x); })
      .def_property_readonly("x_tilde", [](const ProblemInstance& p) { return to_numpy(p.x_tilde); })
      .def_property_readonly("w", [](const ProblemInstance& p) { return to_numpy(p.w); })
      .def_property_readonly("y", [](const ProblemInstance& p) { return to_numpy(p.y); })
      .def_readonly("config", &ProblemInstance::config);
  m.def("generate_instance", &generate_instance, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("save_instance", &save_instance, py::arg("instance"), py::arg("path"));
  m.def("load_instance", &load_instance, py::arg("path"));

  py::class_<SeParams>(m, "SeParams")
      .def(py::init([](PriorModel prior, double delta, double sigma_w2) {
             return SeParams{std::move(prior), delta, sigma_w2};
           }),
           py::arg("prior"), py::arg("delta"), py::arg("sigma_w2"));
  py::class_<SeTrace>(m, "SeTrace")
      .def_readonly("lambda2", &SeTrace::lambda2)
      .def_readonly("predicted_mse", &SeTrace::predicted_mse)
      .def_readonly("std_error", &SeTrace::std_error)
      .def_property_readonly("steps", &SeTrace::steps)
      .def("above_noise_floor", &SeTrace::above_noise_floor)
      .def("non_increasing", &SeTrace::non_increasing, py::arg("slack_se") = 0.0)
      .def("convergence_index", &SeTrace::convergence_index, py::arg("tol") = 1e-8);
  m.def("se_init", &se_init, py::arg("prior"), py::arg("delta"), py::arg("sigma_w2"));
  m.def("run_se",
        [](const SeParams& p, std::size_t T, const std::string& backend, std::size_t n_samples,
           std::uint64_t seed, bool crn) {
          if (backend == "closed_form") return run_se(p, T, ClosedForm{});
          if (backend == "monte_carlo") return run_se(p, T, MonteCarlo{n_samples, seed, crn});
          throw std::invalid_argument("backend: expected 'closed_form' or 'monte_carlo'");
        },
        py::arg("params"), py::arg("T"), py::arg("backend") = "closed_form",
        py::arg("n_samples") = 1'000'000, py::arg("seed") = 0,
        py::arg("common_random_numbers") = false, py::call_guard<py::gil_scoped_release>());

  py::enum_<LambdaSource>(m, "LambdaSource")
      .value("se_prescribed", LambdaSource::se_prescribed)
      .value("empirical", LambdaSource::empirical);
  py::class_<AmpConfig>(m, "AmpConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &AmpConfig::max_iters)
      .def_readwrite("lambda_source", &AmpConfig::lambda_source)
      .def_readwrite("se_trace", &AmpConfig::se_trace)
      .def_readwrite("early_stop_tol", &AmpConfig::early_stop_tol)
      .def_readwrite("onsager", &AmpConfig::onsager);
  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("t", &IterationRecord::t)
      .def_readonly("lambda2", &IterationRecord::lambda2)
      .def_readonly("estimate_mse", &IterationRecord::estimate_mse)
      .def_readonly("eff_obs_loss", &IterationRecord::eff_obs_loss)
      .def_readonly("residual_loss", &IterationRecord::residual_loss)
      .def_readonly("onsager_coeff", &IterationRecord::onsager_coeff);
  py::class_<AmpRun>(m, "AmpRun")
      .def_readonly("records", &AmpRun::records)
      .def_property_readonly("estimate", [](const AmpRun& r) { return to_numpy(r.final_state.x); })
      .def_property_readonly("residual", [](const AmpRun& r) { return to_numpy(r.final_state.r); });
  m.def("run_amp", &run_amp, py::arg("instance"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("relative_gap", &relative_gap, py::arg("empirical"), py::arg("predicted"));

  py::enum_<Model>(m, "Model").value("gg", Model::gg).value("bg", Model::bg);
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("model", &ExperimentConfig::model)
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("m", &ExperimentConfig::m)
      .def_readwrite("delta", &ExperimentConfig::delta)
      .def_readwrite("sigma_x2", &ExperimentConfig::sigma_x2)
      .def_readwrite("sigma_w2", &ExperimentConfig::sigma_w2)
      .def_readwrite("sigma_si2", &ExperimentConfig::sigma_si2)
      .def_readwrite("epsilon", &ExperimentConfig::epsilon)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("iters", &ExperimentConfig::iters)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("se_samples", &ExperimentConfig::se_samples)
      .def_readwrite("se_common_random_numbers", &ExperimentConfig::se_common_random_numbers)
      .def_readwrite("lambda_source", &ExperimentConfig::lambda_source)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def("validate", &ExperimentConfig::validate);
  py::class_<ReportRow>(m, "ReportRow")
      .def_readonly("t", &ReportRow::t)
      .def_readonly("empirical_mse_mean", &ReportRow::empirical_mse_mean)
      .def_readonly("empirical_mse_std", &ReportRow::empirical_mse_std)
      .def_readonly("se_lambda2", &ReportRow::se_lambda2)
      .def_readonly("se_predicted_mse", &ReportRow::se_predicted_mse)
      .def_readonly("eff_obs_loss_mean", &ReportRow::eff_obs_loss_mean)
      .def_readonly("residual_loss_mean", &ReportRow::residual_loss_mean)
      .def_readonly("rel_gap", &ReportRow::rel_gap);
  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("config", &ExperimentReport::config)
      .def_readonly("trial_seeds", &ExperimentReport::trial_seeds)
      .def_readonly("se_trace", &ExperimentReport::se_trace)
      .def_readonly("rows", &ExperimentReport::rows)
      .def("to_csv", &format_csv)
      .def("to_json", &format_json);
  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}
