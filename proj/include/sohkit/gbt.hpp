#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sohkit/dataset.hpp"
#include "sohkit/matrix.hpp"

namespace sohkit {

struct GbtConfig {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 1;

    void validate() const;
};

/// feature < 0 marks a leaf; then value holds the leaf prediction, otherwise
/// the split threshold (feature <= threshold goes left).
struct GbtNode {
    int feature = -1;
    double value = 0.0;
    double gain = 0.0;  // squared-error reduction of this split
    int left = -1;
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

struct GbtTree {
    std::vector<GbtNode> nodes;  // node 0 is the root
};

struct GbtEnsemble {
    double base_prediction = 0.0;
    GbtConfig config;
    FeatureMask mask;
    std::vector<GbtTree> trees;
    std::vector<double> train_mse_history;  // after each boosting round; not serialized
};

/// Boosted least-squares trees on residuals. X columns must match the mask
/// width; splits scan every midpoint between consecutive distinct values, ties
/// resolved toward the lowest feature index and threshold.
GbtEnsemble fit_gbt(const FeatureMatrix& x, std::span<const double> y,
                    const GbtConfig& cfg, const FeatureMask& mask);

/// Raw response of a single tree.
double tree_value(const GbtTree& tree, std::span<const double> features);

double predict(const GbtEnsemble& ensemble, std::span<const double> features);

/// Total split gain per kept feature, normalized to sum 1 (all zero when the
/// ensemble contains no splits).
std::vector<double> feature_importance(const GbtEnsemble& ensemble);

/// Worst-case branch evaluations per inference: trees x configured max depth.
std::int64_t count_branches(const GbtEnsemble& ensemble);

/// Cost-model footprint: 8 bytes per node plus the input feature buffer.
std::int64_t serialized_bytes(const GbtEnsemble& ensemble);

std::string gbt_to_text(const GbtEnsemble& ensemble);

}  // namespace sohkit
