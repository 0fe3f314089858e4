#pragma once

#include <cstdint>

#include "sohkit/gbt.hpp"
#include "sohkit/mlp.hpp"

namespace sohkit {

/// Platform-independent operation/byte counts used to rank configurations.
struct CostEstimate {
    std::int64_t feature_ops = 0;
    std::int64_t eval_ops = 0;
    std::int64_t total_time_proxy = 0;  // feature_ops + eval_ops
    std::int64_t memory_bytes = 0;
};

/// Feature extraction cost: one pass per feature over the window samples.
std::int64_t feature_cost(std::int64_t window_samples, std::int64_t n_features);

CostEstimate estimate(const GbtEnsemble& model, std::int64_t window_samples);
CostEstimate estimate(const MlpNetwork& model, std::int64_t window_samples);

}  // namespace sohkit
