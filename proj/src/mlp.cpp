#include "sohkit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sohkit/rng.hpp"
#include "sohkit/trace.hpp"

namespace sohkit {

namespace {

constexpr int kAllowedSizes[] = {4, 8, 16, 32, 64, 128};

struct ForwardPass {
    std::vector<std::vector<double>> activations;  // a[0] = input, a[k] = output
    std::vector<std::vector<double>> pre;          // z per layer
};

ForwardPass run_forward(const MlpNetwork& net, std::span<const double> x) {
    ForwardPass fp;
    fp.activations.emplace_back(x.begin(), x.end());
    fp.pre.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const MlpLayer& layer = net.layers[l];
        const std::vector<double>& a = fp.activations.back();
        std::vector<double> z(std::size_t(layer.out));
        for (int o = 0; o < layer.out; ++o) {
            double acc = layer.b[std::size_t(o)];
            const double* wrow = layer.w.data() + std::size_t(o) * std::size_t(layer.in);
            for (int i = 0; i < layer.in; ++i) acc += wrow[i] * a[std::size_t(i)];
            z[std::size_t(o)] = acc;
        }
        fp.pre[l] = z;
        const bool hidden = l + 1 < net.layers.size();
        if (hidden)
            for (double& v : z) v = std::max(0.0, v);
        fp.activations.push_back(std::move(z));
    }
    return fp;
}

}  // namespace

void MlpConfig::validate() const {
    if (hidden_sizes.empty() || hidden_sizes.size() > 2)
        throw ConfigError("mlp: 1 or 2 hidden layers required");
    for (int h : hidden_sizes) {
        if (std::find(std::begin(kAllowedSizes), std::end(kAllowedSizes), h) ==
            std::end(kAllowedSizes))
            throw ConfigError("mlp: hidden size " + std::to_string(h) +
                              " not in {4,8,16,32,64,128}");
    }
    if (batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    if (learning_rate < 0) throw ConfigError("mlp: learning_rate must be >= 0");
    if (epochs < 1) throw ConfigError("mlp: epochs must be >= 1");
}

MlpNetwork make_mlp(const std::vector<int>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw ConfigError("mlp: need at least input and output dims");
    for (int d : dims)
        if (d < 1) throw ConfigError("mlp: layer dims must be >= 1");

    MlpNetwork net;
    net.input_dim = dims.front();
    std::mt19937_64 gen(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        MlpLayer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.w.resize(std::size_t(layer.in) * std::size_t(layer.out));
        layer.b.assign(std::size_t(layer.out), 0.0);
        const double bound = std::sqrt(6.0 / double(layer.in + layer.out));
        for (double& w : layer.w) w = (2.0 * uniform01(gen) - 1.0) * bound;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

MlpNetwork init_mlp(const MlpConfig& cfg, int input_dim) {
    cfg.validate();
    if (input_dim < 1) throw ConfigError("mlp: input_dim must be >= 1");
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int h : cfg.hidden_sizes) dims.push_back(h);
    dims.push_back(1);
    return make_mlp(dims, cfg.seed);
}

double forward(const MlpNetwork& net, std::span<const double> features) {
    std::int64_t ignored = 0;
    return forward_counted(net, features, ignored);
}

double forward_counted(const MlpNetwork& net, std::span<const double> features,
                       std::int64_t& mac_count) {
    if (int(features.size()) != net.input_dim)
        throw DataError("mlp forward: feature vector width differs from input_dim");
    std::vector<double> a(features.begin(), features.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const MlpLayer& layer = net.layers[l];
        next.assign(std::size_t(layer.out), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            double acc = layer.b[std::size_t(o)];
            const double* wrow = layer.w.data() + std::size_t(o) * std::size_t(layer.in);
            for (int i = 0; i < layer.in; ++i) {
                acc += wrow[i] * a[std::size_t(i)];
                ++mac_count;
            }
            next[std::size_t(o)] = acc;
        }
        if (l + 1 < net.layers.size())
            for (double& v : next) v = std::max(0.0, v);
        a.swap(next);
    }
    return a[0];
}

MlpGradients backward(const MlpNetwork& net, std::span<const double> features,
                      double target) {
    const ForwardPass fp = run_forward(net, features);
    const std::size_t k = net.layers.size();

    MlpGradients g;
    g.dw.resize(k);
    g.db.resize(k);
    for (std::size_t l = 0; l < k; ++l) {
        g.dw[l].assign(net.layers[l].w.size(), 0.0);
        g.db[l].assign(net.layers[l].b.size(), 0.0);
    }

    // dL/dz for the output layer; L = (out - target)^2
    std::vector<double> delta{2.0 * (fp.activations.back()[0] - target)};

    for (std::size_t li = k; li-- > 0;) {
        const MlpLayer& layer = net.layers[li];
        const std::vector<double>& a_in = fp.activations[li];
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[std::size_t(o)];
            g.db[li][std::size_t(o)] = d;
            double* dwrow = g.dw[li].data() + std::size_t(o) * std::size_t(layer.in);
            for (int i = 0; i < layer.in; ++i) dwrow[i] = d * a_in[std::size_t(i)];
        }
        if (li == 0) break;
        std::vector<double> prev(std::size_t(layer.in), 0.0);
        for (int i = 0; i < layer.in; ++i) {
            double acc = 0.0;
            for (int o = 0; o < layer.out; ++o)
                acc += layer.w[std::size_t(o) * std::size_t(layer.in) + std::size_t(i)] *
                       delta[std::size_t(o)];
            // rectifier gate of the upstream hidden layer
            prev[std::size_t(i)] = fp.pre[li - 1][std::size_t(i)] > 0.0 ? acc : 0.0;
        }
        delta = std::move(prev);
    }
    return g;
}

double grad_max_rel_error(const MlpNetwork& net, const MlpGradients& grads,
                          std::span<const double> features, double target) {
    constexpr double h = 1e-4;
    MlpNetwork probe = net;
    const auto loss = [&]() {
        const double out = forward(probe, features);
        return (out - target) * (out - target);
    };

    double worst = 0.0;
    const auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double lp = loss();
        param = saved - h;
        const double lm = loss();
        param = saved;
        const double fd = (lp - lm) / (2.0 * h);
        const double denom = std::max(1e-8, std::abs(analytic) + std::abs(fd));
        worst = std::max(worst, std::abs(analytic - fd) / denom);
    };

    for (std::size_t l = 0; l < probe.layers.size(); ++l) {
        for (std::size_t i = 0; i < probe.layers[l].w.size(); ++i)
            check(probe.layers[l].w[i], grads.dw[l][i]);
        for (std::size_t i = 0; i < probe.layers[l].b.size(); ++i)
            check(probe.layers[l].b[i], grads.db[l][i]);
    }
    return worst;
}

double gradient_check(const MlpNetwork& net, std::span<const double> features,
                      double target) {
    return grad_max_rel_error(net, backward(net, features, target), features, target);
}

TrainHistory train_mlp(MlpNetwork& net, const FeatureMatrix& x_train,
                       std::span<const double> y_train, const FeatureMatrix& x_val,
                       std::span<const double> y_val, const MlpConfig& cfg) {
    if (x_train.rows == 0) throw DataError("mlp train: no training samples");
    if (x_train.rows != y_train.size() || x_val.rows != y_val.size())
        throw DataError("mlp train: feature/label count mismatch");
    if (int(x_train.cols) != net.input_dim)
        throw DataError("mlp train: matrix width differs from input_dim");

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    // Adam moments, one pair per parameter tensor
    std::vector<std::vector<double>> mw(net.layers.size()), vw(net.layers.size());
    std::vector<std::vector<double>> mb(net.layers.size()), vb(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        mw[l].assign(net.layers[l].w.size(), 0.0);
        vw[l].assign(net.layers[l].w.size(), 0.0);
        mb[l].assign(net.layers[l].b.size(), 0.0);
        vb[l].assign(net.layers[l].b.size(), 0.0);
    }

    const auto mse_on = [&](const FeatureMatrix& x, std::span<const double> y) {
        if (x.rows == 0) return 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double e = forward(net, x.row(i)) - y[i];
            acc += e * e;
        }
        return acc / double(x.rows);
    };

    std::mt19937_64 gen(cfg.seed ^ 0x5bf0315273c2f9d3ULL);
    std::vector<std::size_t> order(x_train.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainHistory history;
    MlpNetwork best = net;
    double best_metric = std::numeric_limits<double>::infinity();
    std::int64_t adam_t = 0;
    const bool have_val = x_val.rows > 0;

    std::vector<std::vector<double>> gw(net.layers.size()), gb(net.layers.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = std::size_t(gen() % (i + 1));
            std::swap(order[i], order[j]);
        }

        for (std::size_t begin = 0; begin < order.size(); begin += std::size_t(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + std::size_t(cfg.batch_size));
            const double batch_n = double(end - begin);

            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                gw[l].assign(net.layers[l].w.size(), 0.0);
                gb[l].assign(net.layers[l].b.size(), 0.0);
            }
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t row = order[k];
                const MlpGradients g = backward(net, x_train.row(row), y_train[row]);
                for (std::size_t l = 0; l < net.layers.size(); ++l) {
                    for (std::size_t i = 0; i < gw[l].size(); ++i)
                        gw[l][i] += g.dw[l][i] / batch_n;
                    for (std::size_t i = 0; i < gb[l].size(); ++i)
                        gb[l][i] += g.db[l][i] / batch_n;
                }
            }

            ++adam_t;
            const double corr1 = 1.0 - std::pow(beta1, double(adam_t));
            const double corr2 = 1.0 - std::pow(beta2, double(adam_t));
            const auto adam_step = [&](double& p, double grad, double& m, double& v) {
                m = beta1 * m + (1.0 - beta1) * grad;
                v = beta2 * v + (1.0 - beta2) * grad * grad;
                p -= cfg.learning_rate * (m / corr1) / (std::sqrt(v / corr2) + eps);
            };
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                for (std::size_t i = 0; i < gw[l].size(); ++i)
                    adam_step(net.layers[l].w[i], gw[l][i], mw[l][i], vw[l][i]);
                for (std::size_t i = 0; i < gb[l].size(); ++i)
                    adam_step(net.layers[l].b[i], gb[l][i], mb[l][i], vb[l][i]);
            }
        }

        const double train_mse = mse_on(x_train, y_train);
        if (!std::isfinite(train_mse))
            throw NumericError("mlp train: loss diverged at epoch " + std::to_string(epoch));
        history.train_mse.push_back(train_mse);

        double metric = train_mse;
        if (have_val) {
            const double val_mse = mse_on(x_val, y_val);
            history.val_mse.push_back(val_mse);
            metric = val_mse;
        }
        if (metric < best_metric) {
            best_metric = metric;
            best = net;
            history.best_epoch = epoch;
        }
    }

    net = best;
    return history;
}

std::int64_t count_macs(const MlpNetwork& net) {
    std::int64_t macs = 0;
    for (const auto& layer : net.layers)
        macs += std::int64_t(layer.in) * std::int64_t(layer.out);
    return macs;
}

std::int64_t memory_bytes(const MlpNetwork& net) {
    std::int64_t params = 0;
    std::vector<std::int64_t> widths{net.input_dim};
    for (const auto& layer : net.layers) {
        params += std::int64_t(layer.w.size()) + std::int64_t(layer.b.size());
        widths.push_back(layer.out);
    }
    std::sort(widths.begin(), widths.end(), std::greater<>());
    const std::int64_t buffers = widths[0] + (widths.size() > 1 ? widths[1] : 0);
    return 4 * params + 4 * buffers;
}

std::string mlp_to_text(const MlpNetwork& net) {
    std::ostringstream out;
    out << "mlp network\n" << "input_dim: " << net.input_dim << '\n';
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        out << "layer " << l << ": " << layer.in << " -> " << layer.out
            << (l + 1 < net.layers.size() ? " (relu)" : " (linear)") << '\n';
        for (int o = 0; o < layer.out; ++o) {
            out << "  w[" << o << "]:";
            for (int i = 0; i < layer.in; ++i)
                out << ' ' << format_value(layer.w[std::size_t(o) * std::size_t(layer.in) +
                                                   std::size_t(i)]);
            out << "  b: " << format_value(layer.b[std::size_t(o)]) << '\n';
        }
    }
    return out.str();
}

}  // namespace sohkit
