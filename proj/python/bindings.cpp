#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lnainfer/dataset_io.hpp"
#include "lnainfer/errors.hpp"
#include "lnainfer/hierarchical.hpp"
#include "lnainfer/likelihood.hpp"
#include "lnainfer/lna.hpp"
#include "lnainfer/ssa.hpp"

namespace py = pybind11;
using namespace lnainfer;

namespace {

ModelParams to_params(const py::object& params) {
  if (py::isinstance<TranslationParams>(params)) return params.cast<TranslationParams>();
  if (py::isinstance<TranscriptionParams>(params)) return params.cast<TranscriptionParams>();
  throw InputError("params must be TranslationParams or TranscriptionParams");
}

py::object from_params(const ModelParams& p) {
  return std::visit([](const auto& v) { return py::cast(v); }, p);
}

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict simulate_study(const std::string& experiment, std::size_t cells, std::size_t observations,
                        const std::map<std::string, std::pair<double, double>>& populations,
                        const std::map<std::string, double>& initial, double kappa, double interval,
                        std::uint64_t seed) {
  StudyConfig config;
  config.experiment = experiment_from_string(experiment);
  config.cells = cells;
  config.observations = observations;
  config.kappa = kappa;
  config.interval = interval;
  config.seed = seed;
  for (const auto& [name, law] : populations) config.populations[name] = {law.first, law.second};
  config.initial = initial;
  SyntheticDataset study;
  {
    py::gil_scoped_release release;
    study = generate_study(config);
  }
  py::list truth;
  for (const auto& cell : study.cells) truth.append(from_params(cell.truth));
  py::dict out;
  out["data"] = study.observations();
  out["truth"] = truth;
  return out;
}

py::array_t<std::int64_t> simulate_trajectory(const py::object& params, const std::vector<std::int64_t>& initial,
                                             const std::vector<double>& times, std::uint64_t seed) {
  const ModelParams p = to_params(params);
  const auto network = ReactionNetwork::for_experiment(experiment_of(p));
  Trajectory tr;
  {
    py::gil_scoped_release release;
    tr = simulate_ssa(network, p, initial, times, seed);
  }
  py::array_t<std::int64_t> out({tr.size(), tr.species});
  std::copy(tr.counts.begin(), tr.counts.end(), out.mutable_data());
  return out;
}

double py_lna_loglik(const py::object& params, const std::vector<double>& times, const std::vector<double>& obs,
                     double kappa) {
  const ModelParams p = to_params(params);
  const double sigma_u2 = std::visit([](const auto& v) { return v.sigma_u2; }, p);
  return lna_loglik(LinearKinetics::from(p), times, obs, kappa, sigma_u2);
}

py::dict py_kalman_filter(const py::object& params, const std::vector<double>& times, const std::vector<double>& obs,
                          double kappa) {
  const ModelParams p = to_params(params);
  const double sigma_u2 = std::visit([](const auto& v) { return v.sigma_u2; }, p);
  const auto ss = build_state_space(LinearKinetics::from(p), times, kappa, sigma_u2);
  const auto f = kalman_filter(obs, ss);
  const auto diag = standardized_residuals(f);
  py::dict out;
  out["loglik"] = f.loglik;
  out["prediction_errors"] = as_array(f.prediction_errors);
  out["prediction_variances"] = as_array(f.prediction_variances);
  out["standardized_residuals"] = as_array(diag.residuals);
  out["ljung_box_pvalue"] = diag.ljung_box_pvalue;
  return out;
}

FitResult py_fit(const std::string& experiment, const MultiCellDataset& data, std::size_t iterations,
                 std::optional<std::size_t> burn_in, std::size_t thin, std::uint64_t seed,
                 std::optional<std::pair<double, double>> delta2_prior, bool use_likelihood) {
  FitConfig config;
  config.iterations = iterations;
  config.burn_in = burn_in;
  config.thin = thin;
  config.seed = seed;
  config.use_likelihood = use_likelihood;
  if (delta2_prior) {
    config.priors.delta2_prior = GammaMeanVar{delta2_prior->first, delta2_prior->second};
  } else {
    config.priors.delta2_prior.reset();
  }
  py::gil_scoped_release release;
  return fit(experiment_from_string(experiment), data, config);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hierarchical linear-noise-approximation inference";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<TranslationParams>(m, "TranslationParams")
      .def(py::init([](double tau2, double delta2, double phi2_0, double sigma_u2) {
             TranslationParams p{tau2, delta2, phi2_0, sigma_u2};
             p.validate();
             return p;
           }),
           py::arg("tau2"), py::arg("delta2"), py::arg("phi2_0"), py::arg("sigma_u2"))
      .def_readwrite("tau2", &TranslationParams::tau2)
      .def_readwrite("delta2", &TranslationParams::delta2)
      .def_readwrite("phi2_0", &TranslationParams::phi2_0)
      .def_readwrite("sigma_u2", &TranslationParams::sigma_u2)
      .def("__repr__", [](const TranslationParams& p) {
        return "TranslationParams(tau2=" + format_double(p.tau2) + ", delta2=" + format_double(p.delta2) +
               ", phi2_0=" + format_double(p.phi2_0) + ", sigma_u2=" + format_double(p.sigma_u2) + ")";
      });

  py::class_<TranscriptionParams>(m, "TranscriptionParams")
      .def(py::init([](double tau1, double delta1, double alpha, double delta2, double phi1_0, double phi2_0,
                       double sigma_u2) {
             TranscriptionParams p{tau1, delta1, alpha, delta2, phi1_0, phi2_0, sigma_u2};
             p.validate();
             return p;
           }),
           py::arg("tau1"), py::arg("delta1"), py::arg("alpha"), py::arg("delta2"), py::arg("phi1_0"),
           py::arg("phi2_0"), py::arg("sigma_u2"))
      .def_readwrite("tau1", &TranscriptionParams::tau1)
      .def_readwrite("delta1", &TranscriptionParams::delta1)
      .def_readwrite("alpha", &TranscriptionParams::alpha)
      .def_readwrite("delta2", &TranscriptionParams::delta2)
      .def_readwrite("phi1_0", &TranscriptionParams::phi1_0)
      .def_readwrite("phi2_0", &TranscriptionParams::phi2_0)
      .def_readwrite("sigma_u2", &TranscriptionParams::sigma_u2);

  py::class_<CellSeries>(m, "CellSeries")
      .def(py::init<std::string, std::vector<double>, std::vector<double>>(), py::arg("name"), py::arg("times"),
           py::arg("values"))
      .def_readwrite("name", &CellSeries::name)
      .def_readwrite("times", &CellSeries::times)
      .def_readwrite("values", &CellSeries::values);

  py::class_<MultiCellDataset>(m, "Dataset")
      .def(py::init<>())
      .def(py::init([](std::vector<CellSeries> cells) { return MultiCellDataset{std::move(cells)}; }),
           py::arg("cells"))
      .def_readwrite("cells", &MultiCellDataset::cells)
      .def("__len__", &MultiCellDataset::size);

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("name", &SummaryRow::name)
      .def_readonly("median", &SummaryRow::median)
      .def_readonly("lower", &SummaryRow::lower)
      .def_readonly("upper", &SummaryRow::upper)
      .def_readonly("ess", &SummaryRow::ess)
      .def_readonly("geweke_z", &SummaryRow::geweke_z);

  py::class_<FitResult>(m, "FitResult")
      .def_property_readonly("names", [](const FitResult& r) { return r.chain.names; })
      .def_property_readonly("samples",
                             [](const FitResult& r) {
                               py::array_t<double> a({r.chain.rows(), r.chain.names.size()});
                               std::copy(r.chain.values.begin(), r.chain.values.end(), a.mutable_data());
                               return a;
                             })
      .def_property_readonly("log_posterior", [](const FitResult& r) { return as_array(r.chain.log_posterior); })
      .def_property_readonly("acceptance",
                             [](const FitResult& r) {
                               std::map<std::string, double> out;
                               for (const auto& a : r.chain.acceptance) out[a.name] = a.rate();
                               return out;
                             })
      .def_readonly("summary", &FitResult::summary)
      .def_readonly("warnings", &FitResult::warnings)
      .def_readonly("failed", &FitResult::failed)
      .def_readonly("failure", &FitResult::failure)
      .def("column", [](const FitResult& r, const std::string& name) { return as_array(r.chain.column(name)); });

  m.def("simulate_trajectory", &simulate_trajectory, py::arg("params"), py::arg("initial"), py::arg("times"),
        py::arg("seed"), "Exact stochastic simulation sampled at the given times; returns counts (times x species).");
  m.def("simulate_study", &simulate_study, py::arg("experiment"), py::arg("cells"), py::arg("observations"),
        py::arg("populations"), py::arg("initial") = std::map<std::string, double>{}, py::arg("kappa") = 1.0,
        py::arg("interval") = 1.0 / 12.0, py::arg("seed") = 1,
        "Synthetic multi-cell study. populations maps parameter names to (mean, variance) gamma laws.");
  m.def("lna_loglik", &py_lna_loglik, py::arg("params"), py::arg("times"), py::arg("observations"),
        py::arg("kappa") = 1.0, "Exact log-likelihood of one cell's series under the linear noise approximation.");
  m.def("kalman_filter", &py_kalman_filter, py::arg("params"), py::arg("times"), py::arg("observations"),
        py::arg("kappa") = 1.0);
  m.def("fit", &py_fit, py::arg("experiment"), py::arg("data"), py::arg("iterations") = 50000,
        py::arg("burn_in") = py::none(), py::arg("thin") = 10, py::arg("seed") = 1,
        py::arg("delta2_prior") = std::make_pair(0.57, 0.004), py::arg("use_likelihood") = true,
        "Hierarchical posterior sampling over all cells.");
  m.def("gamma_mode", &gamma_mode_meanvar, py::arg("mean"), py::arg("variance"));
  m.def("read_dataset", [](const std::filesystem::path& p, const std::string& unit) {
    return ingest(p, time_unit_from_string(unit));
  }, py::arg("path"), py::arg("time_unit") = "hours");
  m.def("write_dataset", py::overload_cast<const std::filesystem::path&, const MultiCellDataset&>(&write_dataset_csv),
        py::arg("path"), py::arg("data"));
}
