#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sohkit/matrix.hpp"

namespace sohkit {

struct MlpConfig {
    std::vector<int> hidden_sizes{16};  // 1 or 2 entries from {4,8,16,32,64,128}
    int batch_size = 64;
    double learning_rate = 1e-3;
    int epochs = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MlpLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
};

/// Fully connected regression net: rectifier hidden layers, linear scalar output.
struct MlpNetwork {
    int input_dim = 0;
    std::vector<MlpLayer> layers;
};

/// Glorot-uniform weights, zero biases; dims = [input, hidden..., output].
/// Deterministic per seed.
MlpNetwork make_mlp(const std::vector<int>& dims, std::uint64_t seed);

/// Validated construction from a config (hidden sizes checked against the
/// allowed grid values).
MlpNetwork init_mlp(const MlpConfig& cfg, int input_dim);

double forward(const MlpNetwork& net, std::span<const double> features);

/// forward with a multiply-accumulate counter, for cost-model cross-checks.
double forward_counted(const MlpNetwork& net, std::span<const double> features,
                       std::int64_t& mac_count);

struct MlpGradients {
    std::vector<std::vector<double>> dw;
    std::vector<std::vector<double>> db;
};

/// Gradients of (forward(x) - target)^2 with respect to every parameter.
MlpGradients backward(const MlpNetwork& net, std::span<const double> features, double target);

/// Max relative disagreement between the given gradients and central finite
/// differences (h = 1e-4) on the same loss.
double grad_max_rel_error(const MlpNetwork& net, const MlpGradients& grads,
                          std::span<const double> features, double target);

double gradient_check(const MlpNetwork& net, std::span<const double> features, double target);

struct TrainHistory {
    std::vector<double> train_mse;
    std::vector<double> val_mse;  // empty when no validation samples
    int best_epoch = -1;
};

/// Mini-batch Adam on MSE with a seeded shuffle per epoch. Returns the
/// parameters of the epoch with the best validation MSE (training MSE when no
/// validation set is given).
TrainHistory train_mlp(MlpNetwork& net, const FeatureMatrix& x_train,
                       std::span<const double> y_train, const FeatureMatrix& x_val,
                       std::span<const double> y_val, const MlpConfig& cfg);

std::int64_t count_macs(const MlpNetwork& net);

/// Weights plus the two largest activation buffers, 4 bytes per scalar.
std::int64_t memory_bytes(const MlpNetwork& net);

std::string mlp_to_text(const MlpNetwork& net);

}  // namespace sohkit
