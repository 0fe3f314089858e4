#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "sohkit/explore.hpp"
#include "sohkit/rng.hpp"

using namespace sohkit;
namespace fs = std::filesystem;

namespace {

// O(n^2) dominance oracle
std::set<std::size_t> brute_force_front(const std::vector<std::pair<double, double>>& pts) {
    std::set<std::size_t> front;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (i == j) continue;
            const bool leq = pts[j].first <= pts[i].first && pts[j].second <= pts[i].second;
            const bool strict = pts[j].first < pts[i].first || pts[j].second < pts[i].second;
            if (leq && strict) dominated = true;
            // exact duplicates keep only the earliest
            if (j < i && pts[j] == pts[i]) dominated = true;
        }
        if (!dominated) front.insert(i);
    }
    return front;
}

Dataset synthetic_dataset(std::size_t n_sims, std::size_t windows_per_sim,
                          std::uint64_t seed) {
    Dataset ds;
    std::mt19937_64 gen(seed);
    std::vector<std::string> sims;
    for (std::size_t s = 0; s < n_sims; ++s) sims.push_back("sim" + std::to_string(s));
    ds.meta.assignment = split_by_simulation(sims, {0.5, 0.2, 0.3}, seed);
    ds.meta.split_seed = seed;
    ds.meta.window_len_s = 7200.0;
    ds.meta.sample_period_s = 1.0;

    double max_raw = 0.0;
    std::vector<double> raws;
    for (std::size_t s = 0; s < n_sims; ++s) {
        const double temp = 10.0 + double(s % 7) * 5.0;
        for (std::size_t w = 0; w < windows_per_sim; ++w) {
            WindowSample sample;
            sample.sim_id = sims[s];
            sample.window_index = std::int64_t(w);
            for (int f = 0; f < kNumFeatures; ++f)
                sample.features[std::size_t(f)] = uniform01(gen);
            sample.features[8] = temp + 0.1 * uniform01(gen);  // t_mean carries the signal
            sample.delta_soh_raw =
                1e-4 * std::exp(0.05 * (temp - 25.0)) * (1.0 + 0.1 * uniform01(gen));
            max_raw = std::max(max_raw, sample.delta_soh_raw);
            raws.push_back(sample.delta_soh_raw);
            ds.samples.push_back(std::move(sample));
        }
    }
    ds.meta.scale.max_delta = max_raw;
    for (auto& s : ds.samples) s.delta_soh_norm = s.delta_soh_raw / max_raw;
    return ds;
}

}  // namespace

TEST_CASE("metrics definitions") {
    const std::vector<double> labels{0.0, 1.0};

    SUBCASE("perfect predictions") {
        const std::vector<double> preds{0.0, 1.0};
        const Metrics m = compute_metrics(preds, labels);
        CHECK(m.mae_pct == 0.0);
        CHECK(m.mse_pct == 0.0);
        CHECK(m.r2 == doctest::Approx(1.0));
    }
    SUBCASE("predicting the label mean gives r2 = 0") {
        const std::vector<double> preds{0.5, 0.5};
        const Metrics m = compute_metrics(preds, labels);
        CHECK(m.mae_pct == doctest::Approx(50.0));
        CHECK(m.mse_pct == doctest::Approx(25.0));
        CHECK(m.r2 == doctest::Approx(0.0));
    }
    SUBCASE("zero-variance labels are rejected") {
        const std::vector<double> flat{0.5, 0.5};
        const std::vector<double> preds{0.4, 0.6};
        CHECK_THROWS_AS(compute_metrics(preds, flat), NumericError);
    }
    SUBCASE("length mismatch") {
        const std::vector<double> preds{0.1};
        CHECK_THROWS_AS(compute_metrics(preds, labels), DataError);
    }
}

TEST_CASE("pareto front on the documented example") {
    const std::vector<std::pair<double, double>> pts{{1, 5}, {2, 3}, {3, 4}};
    const auto front = pareto_front_indices(pts);
    REQUIRE(front.size() == 2);
    CHECK(front[0] == 0);
    CHECK(front[1] == 1);  // (3,4) dominated by (2,3)
}

TEST_CASE("pareto front edge cases") {
    CHECK(pareto_front_indices({{2.0, 2.0}}) == std::vector<std::size_t>{0});

    // duplicated point kept once, first wins
    const auto dup = pareto_front_indices({{1, 1}, {1, 1}});
    REQUIRE(dup.size() == 1);
    CHECK(dup[0] == 0);

    CHECK_THROWS_AS(pareto_front_indices({}), DataError);
}

TEST_CASE("pareto front equals the brute-force oracle on random sets") {
    std::mt19937_64 gen(4242);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + gen() % 50;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid provokes ties
            pts.emplace_back(double(gen() % 8), double(gen() % 8));
        }
        const auto fast = pareto_front_indices(pts);
        const auto slow = brute_force_front(pts);
        CHECK(std::set<std::size_t>(fast.begin(), fast.end()) == slow);
    }
}

TEST_CASE("every point is dominated by or member of the front") {
    std::mt19937_64 gen(7);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 64; ++i) pts.emplace_back(uniform01(gen), uniform01(gen));
    const auto front = pareto_front_indices(pts);
    const std::set<std::size_t> member(front.begin(), front.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (member.count(i)) continue;
        bool dominated = false;
        for (std::size_t j : front)
            if (pts[j].first <= pts[i].first && pts[j].second <= pts[i].second)
                dominated = true;
        CHECK(dominated);
    }
}

TEST_CASE("extremes of a front") {
    auto make_point = [](double time_proxy, double memory, double mse) {
        ParetoPoint p;
        p.cost.total_time_proxy = std::int64_t(time_proxy);
        p.cost.memory_bytes = std::int64_t(memory);
        p.test.mse_pct = mse;
        return p;
    };

    SUBCASE("single point repeats three times") {
        const std::vector<ParetoPoint> pts{make_point(10, 100, 1.0)};
        const Extremes ex = extremes(pts);
        CHECK(ex.lowest_error == 0);
        CHECK(ex.lowest_time == 0);
        CHECK(ex.lowest_memory == 0);
    }
    SUBCASE("two points split the roles") {
        const std::vector<ParetoPoint> pts{make_point(1, 50, 5.0), make_point(2, 20, 3.0)};
        const Extremes ex = extremes(pts);
        CHECK(ex.lowest_error == 1);
        CHECK(ex.lowest_time == 0);
        CHECK(ex.lowest_memory == 1);  // memory extreme can coincide with lowest error
    }
}

TEST_CASE("default space enumerates 48 + 42 configurations") {
    const SearchSpace space;
    const auto models = enumerate_space(space);
    std::size_t gbt = 0, mlp = 0;
    for (const auto& m : models) (m.is_gbt ? gbt : mlp) += 1;
    CHECK(gbt == 48);
    CHECK(mlp == 42);

    std::set<std::string> keys;
    for (const auto& m : models) keys.insert(m.key);
    CHECK(keys.size() == models.size());

    // default search: (48 + 42) x 10 masks = 900 evaluations
    const int masks = kNumFeatures - space.rfe_min_features + 1;
    CHECK(int(models.size()) * masks == 900);
}

TEST_CASE("single-config space yields one point") {
    SearchSpace space;
    space.gbt_n_trees = {5};
    space.gbt_max_depths = {1};
    space.mlp_hidden_sizes = {4};
    space.mlp_max_hidden_layers = 1;
    const auto models = enumerate_space(space);
    CHECK(models.size() == 2);  // one gbt cell + one mlp cell
}

TEST_CASE("rfe returns masks from 12 down to min_features") {
    const Dataset ds = synthetic_dataset(12, 30, 5);
    const SplitData splits = assemble_splits(ds);

    const auto masks = rfe(splits.x_train, splits.y_train, 3);
    REQUIRE(masks.size() == 10);
    for (std::size_t i = 0; i < masks.size(); ++i) CHECK(masks[i].size() == 12 - i);

    // single identity mask when nothing may be dropped
    const auto full = rfe(splits.x_train, splits.y_train, 12);
    REQUIRE(full.size() == 1);
    CHECK(full[0].kept == FeatureMask::all().kept);
}

TEST_CASE("rfe keeps a planted signal feature to the end") {
    std::mt19937_64 gen(3);
    FeatureMatrix x = FeatureMatrix::zeros(300, kNumFeatures);
    std::vector<double> y;
    for (std::size_t r = 0; r < 300; ++r) {
        for (int f = 0; f < kNumFeatures; ++f) x.at(r, std::size_t(f)) = uniform01(gen);
        y.push_back(3.0 * x.at(r, 5));  // v_var carries all the signal
    }
    const auto masks = rfe(x, y, 3);
    const FeatureMask& last = masks.back();
    CHECK(std::find(last.kept.begin(), last.kept.end(), 5) != last.kept.end());
}

TEST_CASE("grid search on a small synthetic dataset") {
    const Dataset ds = synthetic_dataset(10, 40, 11);

    SearchSpace space;
    space.gbt_n_trees = {5, 20};
    space.gbt_max_depths = {1, 3};
    space.mlp_hidden_sizes = {8};
    space.mlp_max_hidden_layers = 1;
    space.mlp_epochs = 10;
    space.rfe_min_features = 10;

    const RunReport report = grid_search(space, ds, 99, 2);
    CHECK(report.points.size() == (4 + 1) * 3);  // 5 configs x masks of size 12, 11, 10
    CHECK(report.window_samples == 7200);

    for (const auto& p : report.points) {
        REQUIRE(p.ok);
        CHECK(p.test.mse_pct >= 0.0);
        CHECK(p.test.r2 <= 1.0);
        CHECK(p.cost.total_time_proxy > 0);
    }

    // fronts are mutually non-dominated and extremes sit on them
    for (auto axis : {CostAxis::Time, CostAxis::Memory}) {
        const auto& front = axis == CostAxis::Time ? report.front_time : report.front_memory;
        REQUIRE(!front.empty());
        for (std::size_t a : front)
            for (std::size_t b : front) {
                if (a == b) continue;
                const auto& pa = report.points[a];
                const auto& pb = report.points[b];
                const double ca = axis == CostAxis::Time ? double(pa.cost.total_time_proxy)
                                                         : double(pa.cost.memory_bytes);
                const double cb = axis == CostAxis::Time ? double(pb.cost.total_time_proxy)
                                                         : double(pb.cost.memory_bytes);
                const bool dominates =
                    ca <= cb && pa.test.mse_pct <= pb.test.mse_pct &&
                    (ca < cb || pa.test.mse_pct < pb.test.mse_pct);
                CHECK(!dominates);
            }
    }
    const std::set<std::size_t> time_front(report.front_time.begin(), report.front_time.end());
    CHECK(time_front.count(report.extreme.lowest_time) == 1);
    const std::set<std::size_t> mem_front(report.front_memory.begin(),
                                          report.front_memory.end());
    CHECK(mem_front.count(report.extreme.lowest_memory) == 1);

    SUBCASE("same seed gives identical points regardless of worker count") {
        const RunReport again = grid_search(space, ds, 99, 1);
        REQUIRE(again.points.size() == report.points.size());
        for (std::size_t i = 0; i < report.points.size(); ++i) {
            CHECK(report.points[i].config_key == again.points[i].config_key);
            CHECK(report.points[i].test.mse_pct == again.points[i].test.mse_pct);
            CHECK(report.points[i].test.mae_pct == again.points[i].test.mae_pct);
        }
    }

    SUBCASE("report round-trips through the directory format") {
        const fs::path dir =
            fs::temp_directory_path() / ("sohkit_report_" + std::to_string(std::rand()));
        write_report(report, dir.string());
        const RunReport back = read_report(dir.string());
        REQUIRE(back.points.size() == report.points.size());
        for (std::size_t i = 0; i < report.points.size(); ++i) {
            CHECK(back.points[i].config_key == report.points[i].config_key);
            CHECK(back.points[i].mask.kept == report.points[i].mask.kept);
            CHECK(back.points[i].cost.total_time_proxy ==
                  report.points[i].cost.total_time_proxy);
            CHECK(back.points[i].test.mse_pct ==
                  doctest::Approx(report.points[i].test.mse_pct).epsilon(1e-8));
        }
        CHECK(back.front_time == report.front_time);
        CHECK(back.front_memory == report.front_memory);

        export_report(back, (dir / "plot").string(), ReportFormat::PlotData);
        CHECK(fs::exists(dir / "plot" / "front_time.xy"));
        CHECK(fs::exists(dir / "plot" / "points_mlp_memory.xy"));
        fs::remove_all(dir);
    }
}

TEST_CASE("rfe propagates data errors from degenerate training data") {
    Dataset ds = synthetic_dataset(10, 20, 17);
    for (auto& s : ds.samples)
        if (ds.meta.assignment.of(s.sim_id) == Split::Train) {
            s.features[2] = std::nan("");
            break;
        }

    SearchSpace space;
    space.gbt_n_trees = {5};
    space.gbt_max_depths = {1};
    space.mlp_hidden_sizes = {4};
    space.mlp_max_hidden_layers = 1;
    space.mlp_epochs = 2;
    space.rfe_min_features = 11;  // forces one reference fit on the poisoned data

    CHECK_THROWS_AS(grid_search(space, ds, 1, 1), DataError);
}

TEST_CASE("individual training failures are recorded and the search continues") {
    const Dataset ds = synthetic_dataset(10, 20, 17);

    SearchSpace space;
    space.gbt_n_trees = {5};
    space.gbt_max_depths = {1};
    space.mlp_hidden_sizes = {4};
    space.mlp_max_hidden_layers = 1;
    space.mlp_epochs = 3;
    space.mlp_learning_rate = 1e200;  // every network training overflows
    space.rfe_min_features = 12;

    const RunReport report = grid_search(space, ds, 1, 1);
    REQUIRE(report.points.size() == 2);
    std::size_t ok = 0, failed = 0;
    for (const auto& p : report.points) {
        if (p.ok) {
            CHECK(p.model_kind == "gbt");
            ++ok;
        } else {
            CHECK(p.model_kind == "mlp");
            CHECK(!p.error.empty());
            ++failed;
        }
    }
    CHECK(ok == 1);
    CHECK(failed == 1);
    // fronts are built from the surviving points only
    for (std::size_t idx : report.front_time) CHECK(report.points[idx].ok);
}
