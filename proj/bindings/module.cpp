// Python bindings for the main operations: CHSH statistics, the LHV
// oracle, the four-context experiment, sweeps, traces, and log ingestion.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chshnet/bell.hpp"
#include "chshnet/error.hpp"
#include "chshnet/experiment.hpp"
#include "chshnet/ingest.hpp"
#include "chshnet/net.hpp"
#include "chshnet/seeding.hpp"
#include "chshnet/tasks.hpp"
#include "chshnet/version.hpp"

namespace py = pybind11;
using namespace chshnet;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    using value_t = nlohmann::json::value_t;
    switch (j.type()) {
        case value_t::null:
            return py::none();
        case value_t::boolean:
            return py::bool_(j.get<bool>());
        case value_t::number_integer:
            return py::int_(j.get<long long>());
        case value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case value_t::number_float:
            return py::float_(j.get<double>());
        case value_t::string:
            return py::str(j.get<std::string>());
        case value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) {
                out[py::str(key)] = json_to_py(value);
            }
            return out;
        }
        default:
            return py::none();
    }
}

nn::TrainConfig make_config(int epochs, double lr, const std::string& optimizer) {
    nn::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.optimizer = nn::optimizer_from_name(optimizer);
    return cfg;
}

bell::OutcomeVector to_outcome_vector(const std::vector<int>& values) {
    for (int v : values) {
        if (v != 1 && v != -1) throw DataError("outcome values must be +1 or -1");
    }
    bell::OutcomeVector out;
    out.values = values;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "CHSH statistics for two-head networks trained under four task contexts";
    m.attr("__version__") = CHSHNET_VERSION;

    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    m.def("chsh_s",
          [](double c11, double c12, double c21, double c22) {
              return bell::chsh_s({c11, c12, c21, c22});
          },
          py::arg("c11"), py::arg("c12"), py::arg("c21"), py::arg("c22"),
          "S = c11 + c12 + c21 - c22");

    m.def("tsirelson_bound", &bell::tsirelson_bound);

    m.def("lhv_enumerate", []() {
        const auto table = bell::lhv_enumerate();
        py::list strategies;
        for (const auto& st : table.strategies) {
            py::dict d;
            d["a1"] = st.a1;
            d["a2"] = st.a2;
            d["b1"] = st.b1;
            d["b2"] = st.b2;
            d["s"] = st.s;
            strategies.append(d);
        }
        py::dict out;
        out["max_s"] = table.max_s;
        out["strategies"] = strategies;
        out["num_maximizers"] = table.maximizers.size();
        out["note"] = table.note;
        return out;
    });

    m.def("outcomes",
          [](const std::vector<uint8_t>& predictions, const std::vector<uint8_t>& labels) {
              return bell::outcomes(predictions, labels).values;
          },
          py::arg("predictions"), py::arg("labels"),
          "+1 where prediction equals label, -1 otherwise");

    m.def("correlation",
          [](const std::vector<int>& a, const std::vector<int>& b) {
              return bell::correlation(to_outcome_vector(a), to_outcome_vector(b));
          },
          py::arg("a"), py::arg("b"), "mean of elementwise products of +/-1 outcomes");

    m.def("pearson",
          [](const std::vector<int>& a, const std::vector<int>& b) {
              return bell::pearson(to_outcome_vector(a), to_outcome_vector(b));
          },
          py::arg("a"), py::arg("b"));

    m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("tag"),
          "deterministic child-seed derivation (SplitMix64 mix)");

    m.def("enumerate_dataset",
          [](int i, int j) {
              tasks::ContextPair pair{tasks::alpha(i), tasks::beta(j), i, j};
              const auto ds = tasks::enumerate_dataset(pair);
              py::list rows;
              for (const auto& row : ds.rows) {
                  rows.append(py::make_tuple(
                      py::make_tuple(row.sample.x1, row.sample.x2, row.sample.x3,
                                     row.sample.x4),
                      row.alice_label, row.bob_label));
              }
              return rows;
          },
          py::arg("i"), py::arg("j"),
          "the 16 canonical samples with labels for context (i, j)");

    m.def("run_contexts",
          [](int n, uint64_t seed, int epochs, double lr, const std::string& optimizer) {
              const auto cfg = make_config(epochs, lr, optimizer);
              bell::ChshResult result;
              {
                  py::gil_scoped_release release;
                  result = experiment::run_contexts(n, seed, cfg);
              }
              return json_to_py(experiment::chsh_result_json(result));
          },
          py::arg("n"), py::arg("seed"), py::arg("epochs") = 2000, py::arg("lr") = 0.02,
          py::arg("optimizer") = "adam",
          "train the four contexts and return the CHSH result");

    m.def("sweep",
          [](const std::vector<int>& ns, int repeats, uint64_t seed, int epochs, double lr,
             const std::string& optimizer, int workers) {
              experiment::ExperimentConfig cfg;
              cfg.train = make_config(epochs, lr, optimizer);
              cfg.master_seed = seed;
              cfg.repeats = repeats;
              cfg.hidden_sizes = ns;
              cfg.workers = workers;
              experiment::SweepResult result;
              {
                  py::gil_scoped_release release;
                  result = experiment::sweep(cfg);
              }
              py::list records;
              for (const auto& rec : result.records) {
                  py::dict d;
                  d["n"] = rec.n;
                  d["repeat"] = rec.repeat;
                  d["seed"] = rec.seed;
                  d["s"] = rec.result.s;
                  d["quad"] = json_to_py(nlohmann::json{{"c11", rec.result.quad.c11},
                                                        {"c12", rec.result.quad.c12},
                                                        {"c21", rec.result.quad.c21},
                                                        {"c22", rec.result.quad.c22}});
                  d["status"] = rec.status;
                  records.append(d);
              }
              py::dict out;
              out["records"] = records;
              out["aggregates"] =
                  json_to_py(experiment::aggregates_json(result, "").at("per_n"));
              return out;
          },
          py::arg("ns"), py::arg("repeats"), py::arg("seed"), py::arg("epochs") = 2000,
          py::arg("lr") = 0.02, py::arg("optimizer") = "adam", py::arg("workers") = 1);

    m.def("epoch_trace",
          [](int n, uint64_t seed, int stride, int epochs, double lr,
             const std::string& optimizer) {
              const auto cfg = make_config(epochs, lr, optimizer);
              experiment::EpochTrace trace;
              {
                  py::gil_scoped_release release;
                  trace = experiment::epoch_trace(n, seed, cfg, stride);
              }
              py::list out;
              for (const auto& pt : trace.points) {
                  out.append(py::make_tuple(pt.epoch, pt.s,
                                            py::make_tuple(pt.losses[0], pt.losses[1],
                                                           pt.losses[2], pt.losses[3])));
              }
              return out;
          },
          py::arg("n"), py::arg("seed"), py::arg("stride") = 10, py::arg("epochs") = 2000,
          py::arg("lr") = 0.02, py::arg("optimizer") = "adam",
          "lockstep training of the four contexts; entries (epoch, s, losses)");

    m.def("mean_slope",
          [](const std::vector<std::pair<int, double>>& points, int window_start,
             int window_end) {
              experiment::EpochTrace trace;
              for (const auto& [e, s] : points) {
                  experiment::TracePoint pt;
                  pt.epoch = e;
                  pt.s = s;
                  trace.points.push_back(pt);
              }
              const auto summary = experiment::mean_slope(trace, window_start, window_end);
              py::dict out;
              out["mu_grad_s"] = summary.mu_grad_s;
              out["telescoped"] = summary.telescoped;
              out["points_used"] = summary.points_used;
              return out;
          },
          py::arg("points"), py::arg("window_start"), py::arg("window_end"),
          "mean of instantaneous slopes of S over (epoch, s) points in the window");

    m.def("loss_oscillation",
          [](const std::vector<double>& trace, int warmup) {
              return experiment::loss_oscillation(trace, warmup);
          },
          py::arg("trace"), py::arg("warmup") = 0);

    m.def("conflict_fractions",
          [](int n, uint64_t seed, int i, int j, int epochs, double lr,
             const std::string& optimizer) {
              const auto cfg = make_config(epochs, lr, optimizer);
              tasks::ContextPair pair{tasks::alpha(i), tasks::beta(j), i, j};
              experiment::ConflictTrace trace;
              {
                  py::gil_scoped_release release;
                  trace = experiment::conflict_trace(n, seed, cfg, pair);
              }
              std::vector<double> fractions;
              fractions.reserve(trace.epochs.size());
              for (const auto& e : trace.epochs) fractions.push_back(e.conflict_fraction);
              return fractions;
          },
          py::arg("n"), py::arg("seed"), py::arg("i") = 2, py::arg("j") = 2,
          py::arg("epochs") = 2000, py::arg("lr") = 0.02, py::arg("optimizer") = "adam",
          "per-epoch share of hidden units with conflicting per-head gradients");

    m.def("ingest_report",
          [](const std::string& path, const std::string& format, double regime_low,
             double regime_high) {
              std::ifstream in(path, std::ios::binary);
              if (!in) throw DataError("cannot open '" + path + "'");
              const auto fmt = format == "csv" ? ingest::LogFormat::Csv
                                               : ingest::LogFormat::Jsonl;
              const auto log = ingest::parse_log(in, fmt);
              const auto rep =
                  ingest::report(log, ingest::RegimeThresholds{regime_low, regime_high});
              return json_to_py(ingest::report_json(rep));
          },
          py::arg("path"), py::arg("format") = "csv", py::arg("regime_low") = 1.9,
          py::arg("regime_high") = 2.1,
          "accuracies, correlations, S and regime annotation from a prediction log");
}
