#include "sohkit/costs.hpp"

#include "sohkit/errors.hpp"

namespace sohkit {

std::int64_t feature_cost(std::int64_t window_samples, std::int64_t n_features) {
    if (window_samples < 0 || n_features < 0)
        throw NumericError("feature_cost: counts must be >= 0");
    return window_samples * n_features;
}

CostEstimate estimate(const GbtEnsemble& model, std::int64_t window_samples) {
    CostEstimate c;
    c.feature_ops = feature_cost(window_samples, std::int64_t(model.mask.size()));
    c.eval_ops = count_branches(model);
    c.total_time_proxy = c.feature_ops + c.eval_ops;
    c.memory_bytes = serialized_bytes(model);
    return c;
}

CostEstimate estimate(const MlpNetwork& model, std::int64_t window_samples) {
    CostEstimate c;
    c.feature_ops = feature_cost(window_samples, model.input_dim);
    c.eval_ops = count_macs(model);
    c.total_time_proxy = c.feature_ops + c.eval_ops;
    c.memory_bytes = memory_bytes(model);
    return c;
}

}  // namespace sohkit
