#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "sohkit/mlp.hpp"
#include "sohkit/model_io.hpp"
#include "sohkit/rng.hpp"

using namespace sohkit;
namespace fs = std::filesystem;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
    FeatureMatrix x = FeatureMatrix::zeros(rows, cols);
    for (double& v : x.values) v = 2.0 * uniform01(gen) - 1.0;
    return x;
}

}  // namespace

TEST_CASE("init: shapes, zero biases, determinism") {
    MlpConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.seed = 5;
    const MlpNetwork net = init_mlp(cfg, 4);

    REQUIRE(net.layers.size() == 2);
    CHECK(net.layers[0].in == 4);
    CHECK(net.layers[0].out == 8);
    CHECK(net.layers[0].w.size() == 32);
    CHECK(net.layers[0].b.size() == 8);
    CHECK(net.layers[1].in == 8);
    CHECK(net.layers[1].out == 1);
    for (const auto& layer : net.layers)
        for (double b : layer.b) CHECK(b == 0.0);

    const MlpNetwork again = init_mlp(cfg, 4);
    CHECK(net.layers[0].w == again.layers[0].w);
    CHECK(net.layers[1].w == again.layers[1].w);

    cfg.seed = 6;
    const MlpNetwork other = init_mlp(cfg, 4);
    CHECK(net.layers[0].w != other.layers[0].w);

    // glorot bound
    const double bound = std::sqrt(6.0 / (4 + 8));
    for (double w : net.layers[0].w) CHECK(std::abs(w) <= bound);
}

TEST_CASE("config validation enforces the allowed grid") {
    MlpConfig cfg;
    cfg.hidden_sizes = {4, 8};
    CHECK_NOTHROW(cfg.validate());
    cfg.hidden_sizes = {7};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.hidden_sizes = {4, 8, 16};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.hidden_sizes = {};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("forward: zero net, hand chain, rectifier gating") {
    SUBCASE("all-zero parameters give zero output") {
        MlpNetwork net = make_mlp({3, 4, 1}, 0);
        for (auto& layer : net.layers) std::fill(layer.w.begin(), layer.w.end(), 0.0);
        const double x[] = {1.0, -2.0, 3.0};
        CHECK(forward(net, x) == 0.0);
    }
    SUBCASE("1x1 chain computes by hand") {
        // y = w2 * relu(w1 * x + b1) + b2
        MlpNetwork net = make_mlp({1, 1, 1}, 0);
        net.layers[0].w = {2.0};
        net.layers[0].b = {0.5};
        net.layers[1].w = {-3.0};
        net.layers[1].b = {1.0};
        const double xp[] = {2.0};  // relu(4.5) = 4.5 -> -3*4.5 + 1 = -12.5
        CHECK(forward(net, xp) == doctest::Approx(-12.5));
        const double xn[] = {-2.0};  // relu(-3.5) = 0 -> 1.0
        CHECK(forward(net, xn) == doctest::Approx(1.0));
    }
    SUBCASE("dimension mismatch") {
        const MlpNetwork net = make_mlp({3, 4, 1}, 0);
        const double x[] = {1.0, 2.0};
        CHECK_THROWS_AS(forward(net, x), DataError);
    }
}

// Frozen stream for the finite-difference trials. With h = 1e-4 a rectifier
// pre-activation can land inside the probe window of some parameter, where
// central differences legitimately disagree with the subgradient; the frozen
// seed pins 20 kink-free samples.
constexpr std::uint64_t kGradCheckStream = 18;

TEST_CASE("gradient check across all allowed shapes") {
    std::mt19937_64 gen(kGradCheckStream);
    const std::vector<std::vector<int>> shapes = {
        {5, 4, 1},  {5, 8, 1},   {5, 16, 1},    {5, 32, 1},    {5, 64, 1},
        {5, 128, 1}, {5, 4, 4, 1}, {5, 8, 32, 1}, {5, 128, 128, 1}, {5, 16, 64, 1}};
    int trials = 0;
    for (const auto& dims : shapes) {
        for (int rep = 0; rep < 2; ++rep) {
            const MlpNetwork net = make_mlp(dims, gen());
            std::vector<double> x(std::size_t(dims[0]), 0.0);
            for (double& v : x) v = 2.0 * uniform01(gen) - 1.0;
            const double target = 2.0 * uniform01(gen) - 1.0;
            CHECK(gradient_check(net, x, target) < 1e-4);
            ++trials;
        }
    }
    CHECK(trials == 20);
}

TEST_CASE("corrupted gradients are caught by the finite-difference oracle") {
    std::mt19937_64 gen(999);
    const MlpNetwork net = make_mlp({4, 8, 1}, 7);
    std::vector<double> x{0.3, -0.2, 0.9, 0.1};
    const double target = 0.4;

    MlpGradients g = backward(net, x, target);
    CHECK(grad_max_rel_error(net, g, x, target) < 1e-4);

    g.dw[0][5] += 0.5;  // deliberate corruption
    CHECK(grad_max_rel_error(net, g, x, target) > 1e-2);
    (void)gen;
}

TEST_CASE("gradient check survives a degenerate all-zero net") {
    MlpNetwork net = make_mlp({3, 4, 1}, 0);
    for (auto& layer : net.layers) std::fill(layer.w.begin(), layer.w.end(), 0.0);
    const double x[] = {0.5, -0.5, 1.0};
    const double err = gradient_check(net, x, 1.0);
    CHECK(std::isfinite(err));
}

TEST_CASE("training memorizes a single sample") {
    FeatureMatrix x = FeatureMatrix::zeros(1, 2);
    x.at(0, 0) = 0.4;
    x.at(0, 1) = -0.3;
    const std::vector<double> y{0.7};

    MlpConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.epochs = 200;
    cfg.batch_size = 1;
    cfg.learning_rate = 0.01;
    cfg.seed = 3;

    MlpNetwork net = init_mlp(cfg, 2);
    const TrainHistory h = train_mlp(net, x, y, FeatureMatrix{}, {}, cfg);
    CHECK(h.train_mse.back() < 1e-6);
    CHECK(forward(net, x.row(0)) == doctest::Approx(0.7).epsilon(1e-2));
}

TEST_CASE("zero learning rate leaves parameters untouched") {
    std::mt19937_64 gen(21);
    const FeatureMatrix x = random_matrix(16, 3, gen);
    std::vector<double> y(16, 0.5);

    MlpConfig cfg;
    cfg.hidden_sizes = {4};
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    cfg.seed = 11;

    MlpNetwork net = init_mlp(cfg, 3);
    const MlpNetwork before = net;
    train_mlp(net, x, y, FeatureMatrix{}, {}, cfg);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(net.layers[l].w == before.layers[l].w);
        CHECK(net.layers[l].b == before.layers[l].b);
    }
}

TEST_CASE("training history is deterministic per seed") {
    std::mt19937_64 gen(77);
    const FeatureMatrix x = random_matrix(64, 4, gen);
    std::vector<double> y;
    for (std::size_t r = 0; r < 64; ++r) y.push_back(x.at(r, 0) * 0.5 + 0.1);

    MlpConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.epochs = 10;
    cfg.seed = 42;

    MlpNetwork a = init_mlp(cfg, 4);
    MlpNetwork b = init_mlp(cfg, 4);
    const TrainHistory ha = train_mlp(a, x, y, FeatureMatrix{}, {}, cfg);
    const TrainHistory hb = train_mlp(b, x, y, FeatureMatrix{}, {}, cfg);
    CHECK(ha.train_mse == hb.train_mse);
    CHECK(ha.best_epoch == hb.best_epoch);
    for (std::size_t l = 0; l < a.layers.size(); ++l) CHECK(a.layers[l].w == b.layers[l].w);
}

TEST_CASE("linear target reaches mse < 1e-4 with a 16-unit net") {
    std::mt19937_64 gen(123);
    const FeatureMatrix x = random_matrix(2048, 3, gen);
    std::vector<double> y;
    for (std::size_t r = 0; r < 2048; ++r)
        y.push_back(0.3 * x.at(r, 0) - 0.2 * x.at(r, 1) + 0.05 * x.at(r, 2) + 0.1);

    MlpConfig cfg;
    cfg.hidden_sizes = {16};  // 1 hidden layer of 16
    cfg.epochs = 50;
    cfg.seed = 5;

    MlpNetwork net = init_mlp(cfg, 3);
    const TrainHistory h = train_mlp(net, x, y, FeatureMatrix{}, {}, cfg);
    CHECK(*std::min_element(h.train_mse.begin(), h.train_mse.end()) < 1e-4);
}

TEST_CASE("best-validation-epoch parameters are returned") {
    std::mt19937_64 gen(31);
    const FeatureMatrix x = random_matrix(64, 2, gen);
    std::vector<double> y;
    for (std::size_t r = 0; r < 64; ++r) y.push_back(x.at(r, 0));
    const FeatureMatrix xv = random_matrix(32, 2, gen);
    std::vector<double> yv;
    for (std::size_t r = 0; r < 32; ++r) yv.push_back(xv.at(r, 0));

    MlpConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.epochs = 25;
    cfg.seed = 9;

    MlpNetwork net = init_mlp(cfg, 2);
    const TrainHistory h = train_mlp(net, x, y, xv, yv, cfg);
    REQUIRE(h.best_epoch >= 0);
    REQUIRE(std::size_t(h.best_epoch) < h.val_mse.size());

    // returned parameters reproduce the best recorded validation mse
    double sse = 0.0;
    for (std::size_t r = 0; r < xv.rows; ++r) {
        const double e = forward(net, xv.row(r)) - yv[r];
        sse += e * e;
    }
    CHECK(sse / double(xv.rows) ==
          doctest::Approx(h.val_mse[std::size_t(h.best_epoch)]).epsilon(1e-12));
    CHECK(h.val_mse[std::size_t(h.best_epoch)] ==
          *std::min_element(h.val_mse.begin(), h.val_mse.end()));
}

TEST_CASE("mac and memory formulas") {
    // table shapes: 10-128-128-1 -> 17,792 MACs; 4-8-1 -> 40 MACs
    CHECK(count_macs(make_mlp({10, 128, 128, 1}, 0)) == 17792);
    CHECK(count_macs(make_mlp({4, 8, 1}, 0)) == 40);
    CHECK(count_macs(make_mlp({1, 1}, 0)) == 1);

    const MlpNetwork tiny = make_mlp({1, 1}, 0);
    CHECK(memory_bytes(tiny) == 4 * 2 + 4 * 2);  // w+b, two widths of 1

    const MlpNetwork big = make_mlp({10, 128, 128, 1}, 0);
    const std::int64_t params = 10 * 128 + 128 + 128 * 128 + 128 + 128 * 1 + 1;
    CHECK(memory_bytes(big) == 4 * params + 4 * (128 + 128));
}

TEST_CASE("instrumented forward counts exactly count_macs") {
    std::mt19937_64 gen(55);
    for (const auto& dims : std::vector<std::vector<int>>{
             {3, 4, 1}, {12, 128, 1}, {7, 16, 64, 1}, {1, 1}}) {
        const MlpNetwork net = make_mlp(dims, gen());
        std::vector<double> x(std::size_t(dims[0]), 0.3);
        std::int64_t macs = 0;
        forward_counted(net, x, macs);
        CHECK(macs == count_macs(net));
    }
}

TEST_CASE("mlp serialization round-trips") {
    const MlpNetwork net = make_mlp({4, 8, 1}, 17);
    ModelMeta meta;
    meta.mask.kept = {0, 1, 2, 3};
    meta.norm_max_delta = 0.015;

    const fs::path path =
        fs::temp_directory_path() / ("sohkit_mlp_" + std::to_string(std::rand()) + ".bin");
    save_mlp(net, meta, path.string());
    CHECK(model_kind_of(path.string()) == ModelKind::Mlp);

    ModelMeta back_meta;
    const MlpNetwork back = load_mlp(path.string(), &back_meta);
    CHECK(back.input_dim == 4);
    CHECK(back_meta.norm_max_delta == doctest::Approx(0.015));

    const double x[] = {0.1, -0.4, 0.2, 0.9};
    CHECK(forward(back, x) == doctest::Approx(forward(net, x)).epsilon(1e-5));

    const std::string text = mlp_to_text(net);
    CHECK(text.find("mlp network") != std::string::npos);

    fs::remove(path);
}

TEST_CASE("training failures are reported") {
    FeatureMatrix x = FeatureMatrix::zeros(4, 2);
    std::vector<double> y(4, 0.0);
    for (std::size_t r = 0; r < 4; ++r) {
        x.at(r, 0) = 1.0;
        x.at(r, 1) = -1.0;
    }

    MlpConfig cfg;
    cfg.hidden_sizes = {4};
    cfg.epochs = 5;
    cfg.learning_rate = 1e200;  // one Adam step throws the weights past overflow
    cfg.seed = 1;

    MlpNetwork net = init_mlp(cfg, 2);
    try {
        train_mlp(net, x, y, FeatureMatrix{}, {}, cfg);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}
