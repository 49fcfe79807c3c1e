// Python bindings for the nysgm core.

#include <memory>
#include <sstream>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nysgm/error.hpp"
#include "nysgm/eval.hpp"
#include "nysgm/experiment.hpp"
#include "nysgm/regime.hpp"
#include "nysgm/sgm.hpp"

namespace py = pybind11;
using namespace nysgm;

namespace {

using FactorPtr = std::shared_ptr<NystromFactor>;

Eigen::RowVectorXd as_point(const Vector& x) { return x.transpose(); }

std::string config_value(const py::handle& value) {
  if (py::isinstance<py::bool_>(value)) return value.cast<bool>() ? "1" : "0";
  if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
    std::string joined;
    for (const auto& item : value) {
      if (!joined.empty()) joined += ",";
      joined += py::str(item).cast<std::string>();
    }
    return joined;
  }
  return py::str(value).cast<std::string>();
}

// Starts from the toy preset and applies key=value overrides, exactly like the CLI config file.
ExperimentConfig make_config(const py::dict& overrides) {
  ExperimentConfig config = toy_preset();
  bool landmarks_given = false;
  for (const auto& [key, value] : overrides) {
    const auto name = py::str(key).cast<std::string>();
    landmarks_given |= name == "m";
    apply_config_entry(config, name, config_value(value));
  }
  if (config.regime && !landmarks_given) config.landmark_counts.clear();
  config.validate();
  return config;
}

py::dict raw_row_dict(const RawRow& r) {
  py::dict d;
  d["m"] = r.m;
  d["trial"] = r.trial;
  d["snapshot_iter"] = r.snapshot_iter;
  d["epochs"] = r.epochs;
  d["paper_passes"] = r.paper_passes;
  d["emp_risk"] = r.emp_risk;
  d["gen_error"] = r.gen_error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nysgm, m) {
  m.doc() = "Nystrom subsampling with stochastic gradient methods";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  // kernel
  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("gaussian", &KernelSpec::gaussian, py::arg("sigma"))
      .def_static("linear", &KernelSpec::linear, py::arg("kappa") = 1.0)
      .def_static("polynomial", &KernelSpec::polynomial, py::arg("degree"), py::arg("offset") = 1.0,
                  py::arg("kappa") = 1.0)
      .def_property_readonly("family", [](const KernelSpec& k) { return to_string(k.family); })
      .def_readonly("sigma", &KernelSpec::sigma)
      .def_readonly("degree", &KernelSpec::degree)
      .def_readonly("offset", &KernelSpec::offset)
      .def_readonly("kappa", &KernelSpec::kappa)
      .def("__repr__", [](const KernelSpec& k) {
        std::ostringstream s;
        s << "KernelSpec(" << to_string(k.family) << ", sigma=" << k.sigma << ", degree=" << k.degree
          << ", offset=" << k.offset << ", kappa=" << k.kappa << ")";
        return s.str();
      });
  m.def(
      "eval_kernel",
      [](const KernelSpec& k, const Vector& x, const Vector& x_prime) {
        return eval_kernel(k, as_point(x), as_point(x_prime));
      },
      py::arg("kernel"), py::arg("x"), py::arg("x_prime"));
  m.def("gram", &gram, py::arg("kernel"), py::arg("X"), py::arg("X_prime"));

  // nystrom
  py::class_<FactorCore>(m, "FactorCore")
      .def_readonly("R", &FactorCore::R)
      .def_readonly("rank", &FactorCore::rank)
      .def_readonly("rtol", &FactorCore::rtol);
  m.def("factor", &factor, py::arg("K_mm"), py::arg("rtol") = kDefaultRankTolerance);

  py::class_<NystromFactor, FactorPtr>(m, "NystromFactor")
      .def_readonly("landmark_indices", &NystromFactor::landmark_indices)
      .def_readonly("landmarks", &NystromFactor::landmarks)
      .def_readonly("R", &NystromFactor::R)
      .def_readonly("rank", &NystromFactor::rank)
      .def_readonly("rtol", &NystromFactor::rtol)
      .def("__len__", &NystromFactor::size);
  m.def(
      "select_landmarks",
      [](std::size_t n, std::size_t count, const std::string& strategy, std::uint64_t seed) {
        Rng rng(seed);
        return select_landmarks(n, count, parse_landmark_strategy(strategy), rng);
      },
      py::arg("n"), py::arg("m"), py::arg("strategy") = "first_m", py::arg("seed") = 0);
  m.def(
      "build_factor",
      [](const KernelSpec& k, const Matrix& X, std::vector<std::size_t> indices, double rtol) {
        return std::make_shared<NystromFactor>(build_factor(k, X, std::move(indices), rtol));
      },
      py::arg("kernel"), py::arg("X"), py::arg("landmark_indices"), py::arg("rtol") = kDefaultRankTolerance);
  m.def(
      "feature_matrix", [](const KernelSpec& k, const FactorPtr& f, const Matrix& X) { return feature_matrix(k, *f, X); },
      py::arg("kernel"), py::arg("factor"), py::arg("X"));

  // data
  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](Matrix X, Vector y, std::optional<Vector> f_true) {
             Dataset d{std::move(X), std::move(y), std::move(f_true), std::nullopt};
             d.validate();
             return d;
           }),
           py::arg("X"), py::arg("y"), py::arg("f_true") = py::none())
      .def_readonly("X", &Dataset::X)
      .def_readonly("y", &Dataset::y)
      .def_readonly("f_true", &Dataset::f_true)
      .def_readonly("seed", &Dataset::seed)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("dim", &Dataset::dim)
      .def("subset", &Dataset::subset, py::arg("indices"));
  m.def("toy_regression_function", py::vectorize(&toy_regression_function), py::arg("x"));
  m.def("gen_toy", &gen_toy, py::arg("n"), py::arg("seed"));
  m.def(
      "eval_grid",
      [](std::size_t count, const std::string& mode, std::uint64_t seed) {
        EvalSet e = eval_grid(count, parse_eval_mode(mode), seed);
        return py::make_tuple(e.points, e.targets);
      },
      py::arg("count"), py::arg("mode") = "grid", py::arg("seed") = 0);
  m.def("load_csv", &load_csv, py::arg("path"));
  m.def("save_csv", &save_csv, py::arg("data"), py::arg("path"));
  m.def("parse_csv", [](const std::string& text) { return parse_csv(text); }, py::arg("text"));
  m.def("format_csv", &format_csv, py::arg("data"));

  // sgm
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](double eta1, double theta, std::size_t batch_size, std::size_t iterations,
                       std::uint64_t seed, std::size_t snapshot_stride, const std::string& storage) {
             return TrainConfig{eta1, theta, batch_size, iterations, seed, snapshot_stride,
                                parse_storage_strategy(storage)};
           }),
           py::arg("eta1") = 0.1, py::arg("theta") = 0.0, py::arg("batch_size") = 1, py::arg("iterations") = 1,
           py::arg("seed") = 0, py::arg("snapshot_stride") = 0, py::arg("storage") = "precompute_cross_gram")
      .def_readwrite("eta1", &TrainConfig::eta1)
      .def_readwrite("theta", &TrainConfig::theta)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("iterations", &TrainConfig::iterations)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("snapshot_stride", &TrainConfig::snapshot_stride)
      .def_property(
          "storage", [](const TrainConfig& c) { return to_string(c.storage); },
          [](TrainConfig& c, const std::string& s) { c.storage = parse_storage_strategy(s); })
      .def("step_size", &TrainConfig::step_size, py::arg("t"));

  py::class_<Predictor>(m, "Predictor")
      .def(py::init([](const KernelSpec& k, const FactorPtr& f, Vector c) { return Predictor(k, f, std::move(c)); }),
           py::arg("kernel"), py::arg("factor"), py::arg("coefficients"))
      .def("__call__", [](const Predictor& p, const Matrix& X) { return p.predict_all(X); }, py::arg("X"))
      .def_property_readonly("coefficients", &Predictor::coefficients);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("iterations",
                             [](const Trajectory& t) {
                               std::vector<std::size_t> at;
                               for (const auto& s : t.snapshots) at.push_back(s.iteration);
                               return at;
                             })
      .def_property_readonly("coefficients",
                             [](const Trajectory& t) {
                               std::vector<Vector> c;
                               for (const auto& s : t.snapshots) c.push_back(s.coefficients);
                               return c;
                             })
      .def_readonly("warnings", &Trajectory::warnings)
      .def("__len__", [](const Trajectory& t) { return t.snapshots.size(); })
      .def("predictor", &Trajectory::predictor, py::arg("snapshot"))
      .def("final_predictor", &Trajectory::final_predictor)
      .def(
          "predict",
          [](const Trajectory& t, const Matrix& X, long snapshot) {
            const long count = static_cast<long>(t.snapshots.size());
            if (snapshot < 0) snapshot += count;
            if (snapshot < 0 || snapshot >= count) throw py::index_error("snapshot out of range");
            return t.predictor(static_cast<std::size_t>(snapshot)).predict_all(X);
          },
          py::arg("X"), py::arg("snapshot") = -1);

  m.def("draw_index_stream", &draw_index_stream, py::arg("n"), py::arg("count"), py::arg("seed"));
  m.def(
      "train",
      [](const TrainConfig& c, const Dataset& d, const KernelSpec& k, const FactorPtr& f) { return train(c, d, k, f); },
      py::arg("config"), py::arg("data"), py::arg("kernel"), py::arg("factor"),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "train_with_stream",
      [](const TrainConfig& c, const Dataset& d, const KernelSpec& k, const FactorPtr& f,
         const std::vector<std::size_t>& stream) { return train_with_stream(c, d, k, f, stream); },
      py::arg("config"), py::arg("data"), py::arg("kernel"), py::arg("factor"), py::arg("stream"),
      py::call_guard<py::gil_scoped_release>());

  // regime
  py::class_<Schedule>(m, "Schedule")
      .def_readonly("eta", &Schedule::eta)
      .def_readonly("theta", &Schedule::theta)
      .def_readonly("batch_size", &Schedule::batch_size)
      .def_readonly("iterations", &Schedule::iterations)
      .def_readonly("landmarks", &Schedule::landmarks)
      .def("__repr__", [](const Schedule& s) {
        std::ostringstream o;
        o << "Schedule(eta=" << s.eta << ", theta=" << s.theta << ", batch_size=" << s.batch_size
          << ", iterations=" << s.iterations << ", landmarks=" << s.landmarks << ")";
        return o.str();
      });
  m.def(
      "regime_schedule",
      [](const std::string& regime, std::size_t n, double zeta, double gamma, double c_eta, double c_b, double c_T,
         double c_m) {
        return regime_schedule(RegimeParams{zeta, gamma, parse_regime(regime), {c_eta, c_b, c_T, c_m}}, n);
      },
      py::arg("regime"), py::arg("n"), py::arg("zeta") = 0.5, py::arg("gamma") = 1.0, py::arg("c_eta") = 1.0,
      py::arg("c_b") = 1.0, py::arg("c_T") = 1.0, py::arg("c_m") = 1.0);

  // eval
  m.def("mean_squared_error", &mean_squared_error, py::arg("predictions"), py::arg("targets"));
  m.def(
      "batch_sample_iteration",
      [](const TrainConfig& c, const Dataset& d, const KernelSpec& k, const FactorPtr& f) {
        return batch_sample_iteration(c, d, k, f);
      },
      py::arg("config"), py::arg("data"), py::arg("kernel"), py::arg("factor"));

  py::class_<KrrModel>(m, "KrrModel")
      .def("__call__", &KrrModel::predict_all, py::arg("X"))
      .def_property_readonly("alpha", &KrrModel::alpha)
      .def_property_readonly("lam", &KrrModel::lambda);
  m.def("krr_solve", &krr_solve, py::arg("data"), py::arg("kernel"), py::arg("lam"));
  m.def("truncate", py::vectorize([](double v, double bound) { return nysgm::truncate(v, bound); }), py::arg("value"), py::arg("M"));

  py::class_<CvResult>(m, "CvResult")
      .def_readonly("chosen_eta", &CvResult::chosen_eta)
      .def_property_readonly("validation_mse",
                             [](const CvResult& r) {
                               std::vector<std::pair<double, double>> rows;
                               for (const auto& row : r.rows) rows.emplace_back(row.eta, row.validation_mse);
                               return rows;
                             })
      .def_readonly("trajectory", &CvResult::trajectory)
      .def(
          "__call__",
          [](const CvResult& r, const Matrix& X) {
            Vector out(X.rows());
            for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = r.model(X.row(i));
            return out;
          },
          py::arg("X"));
  m.def(
      "cross_validate_step_size",
      [](const std::vector<double>& grid, const Dataset& train_data, const Dataset& validation,
         const KernelSpec& k, const FactorPtr& f, const TrainConfig& config, double truncation) {
        return cross_validate_step_size(CvConfig{grid, truncation}, train_data, validation, k, f, config);
      },
      py::arg("grid"), py::arg("train"), py::arg("validation"), py::arg("kernel"), py::arg("factor"),
      py::arg("config"), py::arg("truncation") = 1.0);

  // experiment
  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("warnings", &ExperimentReport::warnings)
      .def("best_mean_error", &ExperimentReport::best_mean_error, py::arg("m"))
      .def_property_readonly("raw",
                             [](const ExperimentReport& r) {
                               py::list rows;
                               for (const auto& row : r.raw) rows.append(raw_row_dict(row));
                               return rows;
                             })
      .def_property_readonly("aggregate",
                             [](const ExperimentReport& r) {
                               py::list rows;
                               for (const auto& a : r.aggregate) {
                                 py::dict d;
                                 d["m"] = a.m;
                                 d["snapshot_iter"] = a.snapshot_iter;
                                 d["epochs"] = a.epochs;
                                 d["paper_passes"] = a.paper_passes;
                                 d["mean_gen_error"] = a.mean_gen_error;
                                 d["std_gen_error"] = a.std_gen_error;
                                 d["mean_emp_risk"] = a.mean_emp_risk;
                                 rows.append(d);
                               }
                               return rows;
                             })
      .def("raw_csv", [](const ExperimentReport& r) { return format_raw_csv(r.raw); })
      .def("aggregate_csv", [](const ExperimentReport& r) { return format_aggregate_csv(r.aggregate); })
      .def("write", &write_report, py::arg("dir"));
  m.def(
      "run_experiment",
      [](const py::dict& overrides) {
        const ExperimentConfig config = make_config(overrides);
        py::gil_scoped_release release;
        return run_experiment(config);
      },
      py::arg("overrides") = py::dict(),
      "Runs the experiment harness. Starts from the toy preset; `overrides` holds config-file keys.");
}
