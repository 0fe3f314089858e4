// Python bindings for the main operations: cell simulation, windowing,
// the two regressor families, cost estimates and Pareto extraction.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sohkit/costs.hpp"
#include "sohkit/dataset.hpp"
#include "sohkit/explore.hpp"
#include "sohkit/profiles.hpp"
#include "sohkit/ukf.hpp"

namespace py = pybind11;
using namespace sohkit;

namespace {

FeatureMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    FeatureMatrix x = FeatureMatrix::zeros(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != x.cols)
            throw DataError("all feature rows must have the same width");
        for (std::size_t c = 0; c < x.cols; ++c) x.at(r, c) = rows[r][c];
    }
    return x;
}

FeatureMask mask_of_width(std::size_t width) {
    FeatureMask mask;
    for (std::size_t i = 0; i < width; ++i) mask.kept.push_back(int(i));
    return mask;
}

py::dict trace_to_dict(const Trace& trace) {
    py::dict out;
    out["sim_id"] = trace.sim_id;
    out["time_s"] = trace.time_s;
    out["current_a"] = trace.current_a;
    out["voltage_v"] = trace.voltage_v;
    out["t_amb_c"] = trace.t_amb_c;
    out["t_cell_c"] = trace.t_cell_c;
    out["soc_true"] = trace.soc_true;
    out["soh"] = trace.soh;
    if (trace.has_estimates()) {
        out["soc_est"] = trace.soc_est;
        out["r0_est"] = trace.r0_est;
    }
    return out;
}

Trace trace_from_dict(const py::dict& src) {
    Trace trace;
    trace.sim_id = src.contains("sim_id") ? src["sim_id"].cast<std::string>() : "trace";
    trace.time_s = src["time_s"].cast<std::vector<double>>();
    trace.current_a = src["current_a"].cast<std::vector<double>>();
    trace.voltage_v = src["voltage_v"].cast<std::vector<double>>();
    trace.t_amb_c = src["t_amb_c"].cast<std::vector<double>>();
    trace.t_cell_c = src["t_cell_c"].cast<std::vector<double>>();
    trace.soc_true = src["soc_true"].cast<std::vector<double>>();
    trace.soh = src["soh"].cast<std::vector<double>>();
    trace.validate();
    return trace;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "battery SOH simulation and lightweight regressor toolkit";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<NumericError>(m, "NumericError");

    m.attr("FEATURE_NAMES") = std::vector<std::string>(kFeatureNames.begin(),
                                                       kFeatureNames.end());

    m.def("ocv",
          [](double soc) { return ocv(CellParams{}, soc); },
          py::arg("soc"), "open-circuit voltage of the default cell");

    m.def(
        "simulate",
        [](const std::string& kind, double amplitude_a, double t_ambient_c, double hours,
           std::uint64_t seed, bool ukf, double soc_low, double soc_high) {
            SimSpec spec;
            spec.sim_id = kind + "_py";
            spec.profile.kind = profile_kind_from_string(kind);
            spec.profile.amplitude_a = amplitude_a;
            spec.profile.seed = seed;
            spec.profile.soc_low = soc_low;
            spec.profile.soc_high = soc_high;
            spec.t_ambient_k = t_ambient_c + defaults::kKelvinOffset;
            spec.max_duration_s = hours * 3600.0;
            return trace_to_dict(run_simulation(spec, ukf));
        },
        py::arg("kind"), py::arg("amplitude_a") = 1.0, py::arg("t_ambient_c") = 25.0,
        py::arg("hours") = 2.0, py::arg("seed") = 1, py::arg("ukf") = false,
        py::arg("soc_low") = defaults::kSocLow, py::arg("soc_high") = defaults::kSocHigh,
        "simulate one cell under a load profile; returns the trace columns");

    m.def(
        "window_features",
        [](const py::dict& trace_dict, double window_hours) {
            const Trace trace = trace_from_dict(trace_dict);
            const auto samples = window_trace(trace, window_hours * 3600.0);
            std::vector<std::vector<double>> features;
            std::vector<double> labels;
            for (const auto& s : samples) {
                features.emplace_back(s.features.begin(), s.features.end());
                labels.push_back(s.delta_soh_raw);
            }
            return py::make_tuple(features, labels);
        },
        py::arg("trace"), py::arg("window_hours") = 2.0,
        "12 statistical features and the soh-drop label per full window");

    m.def(
        "metrics",
        [](const std::vector<double>& predictions, const std::vector<double>& labels) {
            const Metrics v = compute_metrics(predictions, labels);
            return py::make_tuple(v.mae_pct, v.mse_pct, v.r2);
        },
        py::arg("predictions"), py::arg("labels"),
        "(mae %, mse %, r2) on the given label scale");

    m.def(
        "pareto_front",
        [](const std::vector<std::pair<double, double>>& cost_error) {
            return pareto_front_indices(cost_error);
        },
        py::arg("cost_error"),
        "indices of the non-dominated (cost, error) points, ascending cost");

    py::class_<GbtEnsemble>(m, "Gbt")
        .def_readonly("base_prediction", &GbtEnsemble::base_prediction)
        .def("predict",
             [](const GbtEnsemble& self, const std::vector<double>& features) {
                 return predict(self, features);
             })
        .def("feature_importance",
             [](const GbtEnsemble& self) { return feature_importance(self); })
        .def("count_branches", [](const GbtEnsemble& self) { return count_branches(self); })
        .def("serialized_bytes",
             [](const GbtEnsemble& self) { return serialized_bytes(self); })
        .def("__repr__", [](const GbtEnsemble& self) {
            return "<Gbt trees=" + std::to_string(self.trees.size()) +
                   " depth<=" + std::to_string(self.config.max_depth) + ">";
        });

    m.def(
        "fit_gbt",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           int n_trees, int max_depth, double learning_rate, int min_samples_leaf) {
            const FeatureMatrix mx = to_matrix(x);
            return fit_gbt(mx, y, GbtConfig{n_trees, max_depth, learning_rate, min_samples_leaf},
                           mask_of_width(mx.cols));
        },
        py::arg("x"), py::arg("y"), py::arg("n_trees") = 100, py::arg("max_depth") = 3,
        py::arg("learning_rate") = 0.1, py::arg("min_samples_leaf") = 1,
        "boosted regression trees on residuals");

    py::class_<MlpNetwork>(m, "Mlp")
        .def_readonly("input_dim", &MlpNetwork::input_dim)
        .def("predict",
             [](const MlpNetwork& self, const std::vector<double>& features) {
                 return forward(self, features);
             })
        .def("count_macs", [](const MlpNetwork& self) { return count_macs(self); })
        .def("memory_bytes", [](const MlpNetwork& self) { return memory_bytes(self); })
        .def("__repr__", [](const MlpNetwork& self) {
            std::string dims = std::to_string(self.input_dim);
            for (const auto& layer : self.layers) dims += "-" + std::to_string(layer.out);
            return "<Mlp " + dims + ">";
        });

    m.def(
        "fit_mlp",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           const std::vector<int>& hidden_sizes, int epochs, int batch_size,
           double learning_rate, std::uint64_t seed) {
            const FeatureMatrix mx = to_matrix(x);
            MlpConfig cfg;
            cfg.hidden_sizes = hidden_sizes;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.learning_rate = learning_rate;
            cfg.seed = seed;
            MlpNetwork net = init_mlp(cfg, int(mx.cols));
            const TrainHistory history = train_mlp(net, mx, y, FeatureMatrix{}, {}, cfg);
            return py::make_tuple(net, history.train_mse);
        },
        py::arg("x"), py::arg("y"), py::arg("hidden_sizes") = std::vector<int>{16},
        py::arg("epochs") = 50, py::arg("batch_size") = 64, py::arg("learning_rate") = 1e-3,
        py::arg("seed") = 0,
        "train a rectifier network with Adam on mse; returns (model, loss history)");

    m.def(
        "feature_cost",
        [](std::int64_t window_samples, std::int64_t n_features) {
            return feature_cost(window_samples, n_features);
        },
        py::arg("window_samples"), py::arg("n_features"));

    m.def(
        "rfe_masks",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           int min_features) {
            const FeatureMatrix mx = to_matrix(x);
            std::vector<std::vector<int>> out;
            for (const auto& mask : rfe(mx, y, min_features)) out.push_back(mask.kept);
            return out;
        },
        py::arg("x"), py::arg("y"), py::arg("min_features") = 3,
        "recursive feature elimination over the 12 canonical features");
}
