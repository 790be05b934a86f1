#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svrpo/envs.hpp"
#include "svrpo/errors.hpp"
#include "svrpo/experiment.hpp"
#include "svrpo/gradients.hpp"
#include "svrpo/policy.hpp"
#include "svrpo/rollout.hpp"
#include "svrpo/rng.hpp"
#include "svrpo/trustopt.hpp"

namespace py = pybind11;
using namespace svrpo;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trust-region variance-reduced policy optimization toolkit";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError",
                                                          PyExc_ArithmeticError);
  py::register_exception<DivergenceError>(m, "DivergenceError", numerical.ptr());
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
      .def("next_double", &Rng::next_double)
      .def("next_gaussian", &Rng::next_gaussian)
      .def("next_below", &Rng::next_below, py::arg("n"))
      .def("substream", &Rng::substream, py::arg("offset"))
      .def_property_readonly("seed", &Rng::seed)
      .def_property_readonly("stream_id", &Rng::stream_id);
  m.def("gaussian_sample", &gaussian_sample, py::arg("rng"), py::arg("mean"), py::arg("std"));

  py::class_<PolicyArchitecture>(m, "PolicyArchitecture")
      .def(py::init([](int obs_dim, int action_dim, std::vector<int> hidden_sizes,
                       double init_log_std) {
             PolicyArchitecture a{obs_dim, action_dim, std::move(hidden_sizes), init_log_std};
             a.validate();
             return a;
           }),
           py::arg("obs_dim"), py::arg("action_dim"), py::arg("hidden_sizes"),
           py::arg("init_log_std") = 0.0)
      .def_readonly("obs_dim", &PolicyArchitecture::obs_dim)
      .def_readonly("action_dim", &PolicyArchitecture::action_dim)
      .def_readonly("hidden_sizes", &PolicyArchitecture::hidden_sizes)
      .def_readonly("init_log_std", &PolicyArchitecture::init_log_std);

  py::class_<GaussianMlpPolicy>(m, "GaussianMlpPolicy")
      .def(py::init<PolicyArchitecture>(), py::arg("arch"))
      .def(py::init<PolicyArchitecture, Rng&>(), py::arg("arch"), py::arg("rng"))
      .def_property_readonly("arch", &GaussianMlpPolicy::arch)
      .def_property_readonly("param_count", &GaussianMlpPolicy::param_count)
      .def("flatten", &GaussianMlpPolicy::flatten)
      .def("unflatten", &GaussianMlpPolicy::unflatten, py::arg("params"))
      .def("forward", &GaussianMlpPolicy::forward, py::arg("obs"))
      .def("log_prob", &GaussianMlpPolicy::log_prob, py::arg("obs"), py::arg("action"))
      .def("grad_log_prob", &GaussianMlpPolicy::grad_log_prob, py::arg("obs"),
           py::arg("action"))
      .def("action_std", &GaussianMlpPolicy::action_std)
      .def("log_std", &GaussianMlpPolicy::log_std)
      .def("set_log_std", &GaussianMlpPolicy::set_log_std, py::arg("log_std"));
  m.def("kl", &kl, py::arg("p"), py::arg("q"), py::arg("obs"));
  m.def("fisher_vector_product", &fisher_vector_product, py::arg("policy"), py::arg("states"),
        py::arg("actions"), py::arg("v"), py::arg("damping"));

  py::class_<EnvState>(m, "EnvState")
      .def_readonly("internal", &EnvState::internal)
      .def_readonly("t", &EnvState::t)
      .def_readonly("done", &EnvState::done);
  py::class_<StepResult>(m, "StepResult")
      .def_readonly("next_observation", &StepResult::next_observation)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("done", &StepResult::done);
  py::class_<Env>(m, "Env")
      .def_property_readonly("name", &Env::name)
      .def_property_readonly("obs_dim", &Env::obs_dim)
      .def_property_readonly("action_dim", &Env::action_dim)
      .def_property_readonly("horizon", &Env::horizon)
      .def("reset", &Env::reset, py::arg("rng"))
      .def("step", &Env::step, py::arg("state"), py::arg("action"))
      .def("observe", &Env::observe, py::arg("state"));
  m.def("make_env", &make_env, py::arg("name"), py::arg("horizon_override") = 0);

  py::class_<Transition>(m, "Transition")
      .def_readonly("observation", &Transition::observation)
      .def_readonly("action", &Transition::action)
      .def_readonly("reward", &Transition::reward)
      .def_readonly("t", &Transition::t);
  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("transitions", &Trajectory::transitions)
      .def_readonly("terminal", &Trajectory::terminal)
      .def("total_reward", &Trajectory::total_reward);
  py::class_<LinearBaseline>(m, "LinearBaseline")
      .def(py::init<>())
      .def(py::init<Vector>(), py::arg("coefficients"))
      .def("value", &LinearBaseline::value, py::arg("observation"), py::arg("t"))
      .def_property_readonly("coefficients", &LinearBaseline::coefficients)
      .def_static("features", &LinearBaseline::features, py::arg("observation"), py::arg("t"));
  py::class_<SurrogateBatch>(m, "SurrogateBatch")
      .def_readonly("anchor_params", &SurrogateBatch::anchor_params)
      .def_readonly("observations", &SurrogateBatch::observations)
      .def_readonly("actions", &SurrogateBatch::actions)
      .def_readonly("advantages", &SurrogateBatch::advantages)
      .def_readonly("anchor_log_probs", &SurrogateBatch::anchor_log_probs)
      .def("__len__", &SurrogateBatch::size);

  m.def("collect", &collect, py::arg("policy"), py::arg("env"), py::arg("n_transitions"),
        py::arg("rng"));
  m.def("discounted_returns", &discounted_returns, py::arg("trajectory"), py::arg("gamma"));
  m.def("fit_baseline", &fit_baseline, py::arg("trajectories"), py::arg("gamma"));
  m.def("build_batch", &build_batch, py::arg("policy"), py::arg("trajectories"),
        py::arg("baseline"), py::arg("gamma"), py::arg("normalize") = true);

  py::enum_<EstimatorKind>(m, "EstimatorKind")
      .value("full", EstimatorKind::full)
      .value("minibatch", EstimatorKind::minibatch)
      .value("svrg", EstimatorKind::svrg);
  py::class_<GradientEstimate>(m, "GradientEstimate")
      .def_readonly("vector", &GradientEstimate::vector)
      .def_readonly("n_samples_used", &GradientEstimate::n_samples_used)
      .def_readonly("kind", &GradientEstimate::kind);
  py::class_<AnchorGradientCache>(m, "AnchorGradientCache")
      .def(py::init<const GaussianMlpPolicy&, const SurrogateBatch&>(), py::arg("anchor_policy"),
           py::arg("batch"))
      .def_property_readonly("full_gradient", &AnchorGradientCache::full_gradient);
  m.def("per_sample_grad", &per_sample_grad, py::arg("policy"), py::arg("batch"), py::arg("t"));
  m.def("importance_ratio", &importance_ratio, py::arg("policy"), py::arg("batch"),
        py::arg("t"));
  m.def("full_gradient", &full_gradient, py::arg("policy"), py::arg("batch"));
  m.def("minibatch_gradient", &minibatch_gradient, py::arg("policy"), py::arg("batch"),
        py::arg("indices"));
  m.def("svrg_gradient", &svrg_gradient, py::arg("policy"), py::arg("cache"), py::arg("batch"),
        py::arg("indices"));
  m.def("surrogate_value", &surrogate_value, py::arg("policy"), py::arg("batch"));

  py::class_<CgConfig>(m, "CgConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &CgConfig::max_iters)
      .def_readwrite("residual_tol", &CgConfig::residual_tol);
  py::class_<LineSearchConfig>(m, "LineSearchConfig")
      .def(py::init<>())
      .def_readwrite("max_backtracks", &LineSearchConfig::max_backtracks)
      .def_readwrite("delta", &LineSearchConfig::delta)
      .def_readwrite("accept_ratio", &LineSearchConfig::accept_ratio);
  py::class_<SvrpoConfig>(m, "SvrpoConfig")
      .def(py::init<>())
      .def_readwrite("n_transitions", &SvrpoConfig::n_transitions)
      .def_readwrite("epochs", &SvrpoConfig::epochs)
      .def_readwrite("inner_iters", &SvrpoConfig::inner_iters)
      .def_readwrite("minibatch_size", &SvrpoConfig::minibatch_size)
      .def_readwrite("nu", &SvrpoConfig::nu)
      .def_readwrite("gamma", &SvrpoConfig::gamma)
      .def_readwrite("cg", &SvrpoConfig::cg)
      .def_readwrite("line_search", &SvrpoConfig::line_search)
      .def_readwrite("damping", &SvrpoConfig::damping)
      .def_readwrite("seed", &SvrpoConfig::seed)
      .def_readwrite("hidden_sizes", &SvrpoConfig::hidden_sizes)
      .def_readwrite("init_log_std", &SvrpoConfig::init_log_std)
      .def_readwrite("horizon", &SvrpoConfig::horizon)
      .def_readwrite("normalize_advantages", &SvrpoConfig::normalize_advantages)
      .def_readwrite("diag_variance", &SvrpoConfig::diag_variance)
      .def_readwrite("dump_prefix", &SvrpoConfig::dump_prefix)
      .def("validate", &SvrpoConfig::validate);

  m.def(
      "conjugate_gradient",
      [](const std::function<Vector(const Vector&)>& apply_h, const Vector& g,
         const CgConfig& cfg) { return conjugate_gradient(apply_h, g, cfg); },
      py::arg("apply_h"), py::arg("g"), py::arg("cfg") = CgConfig{});
  m.def(
      "natural_step",
      [](const Vector& x, const std::function<Vector(const Vector&)>& apply_h, double delta) {
        return natural_step(x, apply_h, delta);
      },
      py::arg("x"), py::arg("apply_h"), py::arg("delta"));

  py::class_<StepOutcome>(m, "StepOutcome")
      .def_readonly("accepted", &StepOutcome::accepted)
      .def_readonly("eta", &StepOutcome::eta)
      .def_readonly("measured_kl", &StepOutcome::measured_kl)
      .def_readonly("surrogate_before", &StepOutcome::surrogate_before)
      .def_readonly("surrogate_after", &StepOutcome::surrogate_after)
      .def_readonly("backtracks", &StepOutcome::backtracks);
  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("epoch", &IterationRecord::epoch)
      .def_readonly("env_steps_cumulative", &IterationRecord::env_steps_cumulative)
      .def_readonly("mean_return", &IterationRecord::mean_return)
      .def_readonly("std_return", &IterationRecord::std_return)
      .def_readonly("mean_kl", &IterationRecord::mean_kl)
      .def_readonly("accepted_steps", &IterationRecord::accepted_steps)
      .def_readonly("rejected_steps", &IterationRecord::rejected_steps)
      .def_readonly("grad_norm", &IterationRecord::grad_norm)
      .def_readonly("wall_ms", &IterationRecord::wall_ms);
  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("records", &TrainResult::records)
      .def_readonly("param_history", &TrainResult::param_history)
      .def_readonly("step_outcomes", &TrainResult::step_outcomes)
      .def_readonly("cg_capped_steps", &TrainResult::cg_capped_steps)
      .def_readonly("variance_ratio_diag", &TrainResult::variance_ratio_diag)
      .def_readonly("arch", &TrainResult::arch)
      .def_readonly("final_params", &TrainResult::final_params);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("svrpo", Algorithm::svrpo)
      .value("trpo", Algorithm::trpo)
      .value("svrpo_sgd", Algorithm::svrpo_sgd)
      .value("svrpo_nofisher", Algorithm::svrpo_nofisher);
  m.def("algorithm_name", &algorithm_name);
  m.def("algorithm_from_name", &algorithm_from_name, py::arg("name"));
  m.def("train", &train, py::arg("algorithm"), py::arg("config"), py::arg("env"),
        py::call_guard<py::gil_scoped_release>());
  m.def("svrpo_train", &svrpo_train, py::arg("config"), py::arg("env"),
        py::call_guard<py::gil_scoped_release>());
  m.def("trpo_train", &trpo_train, py::arg("config"), py::arg("env"),
        py::call_guard<py::gil_scoped_release>());
  m.def("ablation_sgd_train", &ablation_sgd_train, py::arg("config"), py::arg("env"),
        py::call_guard<py::gil_scoped_release>());
  m.def("ablation_nofisher_train", &ablation_nofisher_train, py::arg("config"), py::arg("env"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("algorithm", &ExperimentConfig::algorithm)
      .def_readwrite("env_name", &ExperimentConfig::env_name)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("dump_trajectories", &ExperimentConfig::dump_trajectories)
      .def_readwrite("train", &ExperimentConfig::train)
      .def("validate", &ExperimentConfig::validate);
  py::class_<SeedSummary>(m, "SeedSummary")
      .def_readonly("seed", &SeedSummary::seed)
      .def_readonly("final_return", &SeedSummary::final_return)
      .def_readonly("auc", &SeedSummary::auc);
  py::class_<ExperimentSummary>(m, "ExperimentSummary")
      .def_readonly("algorithm", &ExperimentSummary::algorithm)
      .def_readonly("env", &ExperimentSummary::env)
      .def_readonly("per_seed", &ExperimentSummary::per_seed)
      .def_readonly("median_final_return", &ExperimentSummary::median_final_return)
      .def_readonly("median_auc", &ExperimentSummary::median_auc)
      .def_readonly("csv_paths", &ExperimentSummary::csv_paths)
      .def_readonly("summary_path", &ExperimentSummary::summary_path);
  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("checkpoint_policy", &checkpoint_policy, py::arg("policy"), py::arg("path"));
  m.def("restore_policy", &restore_policy, py::arg("path"));
  m.def("csv_header", [] { return std::string(kCsvHeader); });
}
