#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sohkit/config.hpp"
#include "sohkit/costs.hpp"
#include "sohkit/dataset.hpp"
#include "sohkit/gbt.hpp"
#include "sohkit/matrix.hpp"
#include "sohkit/mlp.hpp"

namespace sohkit {

/// Hyper-parameter grids; the defaults span 48 tree and 42 network
/// configurations, each evaluated once per RFE feature subset.
struct SearchSpace {
    std::vector<int> gbt_n_trees{5, 10, 20, 50, 100, 200};
    std::vector<int> gbt_max_depths{1, 2, 3, 4, 5, 10, 30, 50};
    double gbt_learning_rate = 0.1;
    int gbt_min_samples_leaf = 1;
    std::vector<int> mlp_hidden_sizes{4, 8, 16, 32, 64, 128};
    int mlp_max_hidden_layers = 2;
    int mlp_epochs = 50;
    int mlp_batch_size = 64;
    double mlp_learning_rate = 1e-3;
    int rfe_min_features = 3;

    static SearchSpace from_file(const KeyValueFile& cfg);
    void validate() const;
};

/// One grid cell (either family).
struct ModelSpec {
    bool is_gbt = true;
    GbtConfig gbt;
    MlpConfig mlp;
    std::string key;
};

/// Deterministic enumeration: every GBT cell, then every MLP cell
/// (single-hidden sizes first, then both two-hidden size combinations).
std::vector<ModelSpec> enumerate_space(const SearchSpace& space);

struct Metrics {
    double mae_pct = 0.0;
    double mse_pct = 0.0;
    double r2 = 0.0;
};

/// Errors on the normalized label scale, reported in percent.
/// Throws NumericError when the labels have zero variance (r2 undefined).
Metrics compute_metrics(std::span<const double> predictions, std::span<const double> labels);

struct ParetoPoint {
    std::string model_kind;  // "gbt" | "mlp"
    std::string config_key;
    FeatureMask mask;
    Metrics test;
    double val_mse = std::numeric_limits<double>::quiet_NaN();
    CostEstimate cost;
    bool ok = true;
    std::string error;
};

enum class CostAxis : std::uint8_t { Time = 0, Memory = 1 };

/// Non-dominated subset of (cost, error) pairs: a point survives iff no other
/// point is <= on both axes with at least one strict. Exact ties keep the
/// earliest point. Returns indices in ascending-cost order.
std::vector<std::size_t> pareto_front_indices(
    const std::vector<std::pair<double, double>>& cost_error);

/// Front over the successful points, error axis = test MSE.
std::vector<std::size_t> pareto_front(const std::vector<ParetoPoint>& points, CostAxis axis);

struct Extremes {
    std::size_t lowest_error = 0;
    std::size_t lowest_time = 0;
    std::size_t lowest_memory = 0;
};

/// Per-axis argmins; ties break toward the other axis, then enumeration order.
Extremes extremes(const std::vector<ParetoPoint>& points);

/// Recursive feature elimination with a reference GBT: returns masks of sizes
/// |canonical| down to min_features (10 masks for the 12-feature set).
/// Importance ties drop the highest canonical feature index.
std::vector<FeatureMask> rfe(const FeatureMatrix& x_full, std::span<const double> y,
                             int min_features,
                             const GbtConfig& reference = GbtConfig{50, 5, 0.1, 1});

/// Split matrices assembled from a dataset (12 columns, normalized labels).
struct SplitData {
    FeatureMatrix x_train, x_val, x_test;
    std::vector<double> y_train, y_val, y_test;
};

SplitData assemble_splits(const Dataset& ds);

struct RunReport {
    std::vector<ParetoPoint> points;
    std::vector<std::size_t> front_time;
    std::vector<std::size_t> front_memory;
    Extremes extreme;
    std::uint64_t seed = 0;
    std::int64_t window_samples = 0;
    std::size_t n_masks = 0;
};

/// Full exploration: RFE masks x model grid, trained on the train split,
/// validation-selected, scored on the test split. Individual failures are
/// recorded per point and the search continues. Deterministic per seed,
/// independent of the worker count.
RunReport grid_search(const SearchSpace& space, const Dataset& ds, std::uint64_t seed,
                      int jobs = 1);

void write_report(const RunReport& report, const std::string& dir);
RunReport read_report(const std::string& dir);

enum class ReportFormat : std::uint8_t { Csv = 0, PlotData = 1 };
void export_report(const RunReport& report, const std::string& out_dir, ReportFormat format);

}  // namespace sohkit
