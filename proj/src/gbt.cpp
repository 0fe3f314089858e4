#include "sohkit/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sohkit/trace.hpp"

namespace sohkit {

void GbtConfig::validate() const {
    if (n_trees < 1) throw ConfigError("gbt: n_trees must be >= 1");
    if (max_depth < 1) throw ConfigError("gbt: max_depth must be >= 1");
    if (!(learning_rate > 0 && learning_rate <= 1))
        throw ConfigError("gbt: learning_rate must be in (0, 1]");
    if (min_samples_leaf < 1) throw ConfigError("gbt: min_samples_leaf must be >= 1");
}

namespace {

struct TreeBuilder {
    const FeatureMatrix& x;
    const std::vector<double>& residuals;
    const GbtConfig& cfg;
    GbtTree tree;
    std::vector<std::pair<double, double>> scratch;  // (feature value, residual)

    int build(std::vector<std::size_t>& indices, int depth) {
        const int node_id = int(tree.nodes.size());
        tree.nodes.emplace_back();

        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i : indices) {
            sum += residuals[i];
            sum_sq += residuals[i] * residuals[i];
        }
        const double n = double(indices.size());
        const double node_mean = sum / n;
        const double node_sse = sum_sq - sum * sum / n;
        tree.nodes[std::size_t(node_id)].value = node_mean;

        if (depth >= cfg.max_depth ||
            indices.size() < std::size_t(2 * cfg.min_samples_leaf))
            return node_id;

        // exact scan: for each feature, sort the node samples and evaluate the
        // midpoint between every pair of consecutive distinct values
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_sse = node_sse;
        for (std::size_t f = 0; f < x.cols; ++f) {
            scratch.clear();
            for (std::size_t i : indices) scratch.emplace_back(x.at(i, f), residuals[i]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t k = 0; k + 1 < scratch.size(); ++k) {
                left_sum += scratch[k].second;
                left_sq += scratch[k].second * scratch[k].second;
                if (scratch[k].first == scratch[k + 1].first) continue;
                const auto n_left = double(k + 1);
                const auto n_right = double(scratch.size() - k - 1);
                if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf)
                    continue;
                const double right_sum = sum - left_sum;
                const double right_sq = sum_sq - left_sq;
                const double sse = (left_sq - left_sum * left_sum / n_left) +
                                   (right_sq - right_sum * right_sum / n_right);
                if (sse < best_sse) {
                    best_sse = sse;
                    best_feature = int(f);
                    best_threshold = 0.5 * (scratch[k].first + scratch[k + 1].first);
                }
            }
        }

        if (best_feature < 0) return node_id;  // no strictly improving split

        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(indices.size());
        right_idx.reserve(indices.size());
        for (std::size_t i : indices) {
            if (x.at(i, std::size_t(best_feature)) <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        indices.clear();
        indices.shrink_to_fit();

        const int left_id = build(left_idx, depth + 1);
        const int right_id = build(right_idx, depth + 1);

        GbtNode& node = tree.nodes[std::size_t(node_id)];
        node.feature = best_feature;
        node.value = best_threshold;
        node.gain = node_sse - best_sse;
        node.left = left_id;
        node.right = right_id;
        return node_id;
    }
};

}  // namespace

GbtEnsemble fit_gbt(const FeatureMatrix& x, std::span<const double> y,
                    const GbtConfig& cfg, const FeatureMask& mask) {
    cfg.validate();
    // structural mask check only; the pipeline-level 3..12 bound is enforced
    // where masks are produced
    if (mask.kept.empty()) throw ConfigError("gbt fit: empty feature mask");
    for (std::size_t i = 0; i < mask.kept.size(); ++i) {
        if (mask.kept[i] < 0 || mask.kept[i] >= kNumFeatures)
            throw ConfigError("gbt fit: feature mask index out of range");
        if (i > 0 && mask.kept[i] <= mask.kept[i - 1])
            throw ConfigError("gbt fit: feature mask indices must be ascending");
    }
    if (x.rows == 0) throw DataError("gbt fit: no samples");
    if (x.rows != y.size()) throw DataError("gbt fit: feature/label count mismatch");
    if (x.cols != mask.size()) throw DataError("gbt fit: matrix width differs from mask");
    for (double v : x.values)
        if (!std::isfinite(v)) throw DataError("gbt fit: non-finite feature value");
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("gbt fit: non-finite label");

    GbtEnsemble ens;
    ens.config = cfg;
    ens.mask = mask;
    ens.base_prediction = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());

    std::vector<double> prediction(x.rows, ens.base_prediction);
    std::vector<double> residuals(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) residuals[i] = y[i] - prediction[i];

    ens.trees.reserve(std::size_t(cfg.n_trees));
    for (int m = 0; m < cfg.n_trees; ++m) {
        TreeBuilder builder{x, residuals, cfg, {}, {}};
        std::vector<std::size_t> all(x.rows);
        std::iota(all.begin(), all.end(), 0);
        builder.build(all, 0);
        ens.trees.push_back(std::move(builder.tree));

        double sse = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            prediction[i] += cfg.learning_rate * tree_value(ens.trees.back(), x.row(i));
            residuals[i] = y[i] - prediction[i];
            sse += residuals[i] * residuals[i];
        }
        ens.train_mse_history.push_back(sse / double(x.rows));
    }
    return ens;
}

double tree_value(const GbtTree& tree, std::span<const double> features) {
    const GbtNode* node = &tree.nodes[0];
    while (!node->is_leaf()) {
        const bool go_left = features[std::size_t(node->feature)] <= node->value;
        node = &tree.nodes[std::size_t(go_left ? node->left : node->right)];
    }
    return node->value;
}

double predict(const GbtEnsemble& ensemble, std::span<const double> features) {
    if (features.size() != ensemble.mask.size())
        throw DataError("gbt predict: feature vector width differs from mask");
    double out = ensemble.base_prediction;
    for (const auto& tree : ensemble.trees)
        out += ensemble.config.learning_rate * tree_value(tree, features);
    return out;
}

std::vector<double> feature_importance(const GbtEnsemble& ensemble) {
    std::vector<double> gains(ensemble.mask.size(), 0.0);
    double total = 0.0;
    for (const auto& tree : ensemble.trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            gains[std::size_t(node.feature)] += node.gain;
            total += node.gain;
        }
    }
    if (total > 0.0)
        for (double& g : gains) g /= total;
    return gains;
}

std::int64_t count_branches(const GbtEnsemble& ensemble) {
    return std::int64_t(ensemble.trees.size()) * ensemble.config.max_depth;
}

std::int64_t serialized_bytes(const GbtEnsemble& ensemble) {
    std::int64_t nodes = 0;
    for (const auto& tree : ensemble.trees) nodes += std::int64_t(tree.nodes.size());
    return 8 * nodes + 4 * std::int64_t(ensemble.mask.size());
}

std::string gbt_to_text(const GbtEnsemble& ensemble) {
    std::ostringstream out;
    out << "gbt ensemble\n"
        << "features: " << ensemble.mask.describe() << '\n'
        << "trees: " << ensemble.trees.size() << "  max_depth: " << ensemble.config.max_depth
        << "  learning_rate: " << format_value(ensemble.config.learning_rate) << '\n'
        << "base: " << format_value(ensemble.base_prediction) << '\n';
    for (std::size_t t = 0; t < ensemble.trees.size(); ++t) {
        out << "tree " << t << ":\n";
        const auto& nodes = ensemble.trees[t].nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& n = nodes[i];
            if (n.is_leaf()) {
                out << "  [" << i << "] leaf value=" << format_value(n.value) << '\n';
            } else {
                out << "  [" << i << "] if "
                    << kFeatureNames[std::size_t(ensemble.mask.kept[std::size_t(n.feature)])]
                    << " <= " << format_value(n.value) << " -> [" << n.left << "] else -> ["
                    << n.right << "]  gain=" << format_value(n.gain) << '\n';
            }
        }
    }
    return out.str();
}

}  // namespace sohkit
