#include "sohkit/explore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "sohkit/rng.hpp"
#include "sohkit/trace.hpp"

namespace fs = std::filesystem;

namespace sohkit {

SearchSpace SearchSpace::from_file(const KeyValueFile& cfg) {
    SearchSpace s;
    auto to_int_vec = [](const std::vector<std::int64_t>& v) {
        std::vector<int> out;
        out.reserve(v.size());
        for (auto x : v) out.push_back(int(x));
        return out;
    };
    if (cfg.has("gbt_n_trees")) s.gbt_n_trees = to_int_vec(cfg.get_ints("gbt_n_trees"));
    if (cfg.has("gbt_max_depths")) s.gbt_max_depths = to_int_vec(cfg.get_ints("gbt_max_depths"));
    s.gbt_learning_rate = cfg.get_double("gbt_learning_rate", s.gbt_learning_rate);
    s.gbt_min_samples_leaf = int(cfg.get_int("gbt_min_samples_leaf", s.gbt_min_samples_leaf));
    if (cfg.has("mlp_hidden_sizes"))
        s.mlp_hidden_sizes = to_int_vec(cfg.get_ints("mlp_hidden_sizes"));
    s.mlp_max_hidden_layers = int(cfg.get_int("mlp_max_hidden_layers", s.mlp_max_hidden_layers));
    s.mlp_epochs = int(cfg.get_int("mlp_epochs", s.mlp_epochs));
    s.mlp_batch_size = int(cfg.get_int("mlp_batch_size", s.mlp_batch_size));
    s.mlp_learning_rate = cfg.get_double("mlp_learning_rate", s.mlp_learning_rate);
    s.rfe_min_features = int(cfg.get_int("rfe_min_features", s.rfe_min_features));
    s.validate();
    return s;
}

void SearchSpace::validate() const {
    if (gbt_n_trees.empty() || gbt_max_depths.empty())
        throw ConfigError("search space: empty GBT axis");
    if (mlp_hidden_sizes.empty()) throw ConfigError("search space: empty MLP size axis");
    if (mlp_max_hidden_layers < 1 || mlp_max_hidden_layers > 2)
        throw ConfigError("search space: mlp_max_hidden_layers must be 1 or 2");
    if (rfe_min_features < 3 || rfe_min_features > kNumFeatures)
        throw ConfigError("search space: rfe_min_features must be in [3, 12]");
}

std::vector<ModelSpec> enumerate_space(const SearchSpace& space) {
    space.validate();
    std::vector<ModelSpec> out;
    for (int trees : space.gbt_n_trees) {
        for (int depth : space.gbt_max_depths) {
            ModelSpec m;
            m.is_gbt = true;
            m.gbt = GbtConfig{trees, depth, space.gbt_learning_rate,
                              space.gbt_min_samples_leaf};
            m.key = "gbt_t" + std::to_string(trees) + "_d" + std::to_string(depth);
            out.push_back(std::move(m));
        }
    }
    auto push_mlp = [&](const std::vector<int>& hidden) {
        ModelSpec m;
        m.is_gbt = false;
        m.mlp.hidden_sizes = hidden;
        m.mlp.batch_size = space.mlp_batch_size;
        m.mlp.learning_rate = space.mlp_learning_rate;
        m.mlp.epochs = space.mlp_epochs;
        m.key = "mlp_h" + std::to_string(hidden[0]);
        if (hidden.size() > 1) m.key += "x" + std::to_string(hidden[1]);
        out.push_back(std::move(m));
    };
    for (int h : space.mlp_hidden_sizes) push_mlp({h});
    if (space.mlp_max_hidden_layers >= 2)
        for (int h1 : space.mlp_hidden_sizes)
            for (int h2 : space.mlp_hidden_sizes) push_mlp({h1, h2});
    return out;
}

Metrics compute_metrics(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size() || labels.empty())
        throw DataError("metrics: prediction/label lengths differ or are empty");
    double abs_sum = 0.0, sq_sum = 0.0, label_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double e = predictions[i] - labels[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        label_sum += labels[i];
    }
    const double n = double(labels.size());
    const double mean = label_sum / n;
    double ss_tot = 0.0;
    for (double y : labels) ss_tot += (y - mean) * (y - mean);
    if (!(ss_tot > 0.0)) throw NumericError("metrics: r2 undefined for zero-variance labels");

    Metrics m;
    m.mae_pct = 100.0 * abs_sum / n;
    m.mse_pct = 100.0 * sq_sum / n;
    m.r2 = 1.0 - sq_sum / ss_tot;
    return m;
}

std::vector<std::size_t> pareto_front_indices(
    const std::vector<std::pair<double, double>>& cost_error) {
    if (cost_error.empty()) throw DataError("pareto_front: no points");
    std::vector<std::size_t> order(cost_error.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cost_error[a].first != cost_error[b].first)
            return cost_error[a].first < cost_error[b].first;
        if (cost_error[a].second != cost_error[b].second)
            return cost_error[a].second < cost_error[b].second;
        return a < b;
    });
    std::vector<std::size_t> front;
    double best_error = std::numeric_limits<double>::infinity();
    for (std::size_t idx : order) {
        if (cost_error[idx].second < best_error) {
            front.push_back(idx);
            best_error = cost_error[idx].second;
        }
    }
    return front;
}

namespace {

double cost_of(const ParetoPoint& p, CostAxis axis) {
    return axis == CostAxis::Time ? double(p.cost.total_time_proxy)
                                  : double(p.cost.memory_bytes);
}

}  // namespace

std::vector<std::size_t> pareto_front(const std::vector<ParetoPoint>& points, CostAxis axis) {
    std::vector<std::pair<double, double>> pairs;
    std::vector<std::size_t> map;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].ok) continue;
        pairs.emplace_back(cost_of(points[i], axis), points[i].test.mse_pct);
        map.push_back(i);
    }
    std::vector<std::size_t> local = pareto_front_indices(pairs);
    std::vector<std::size_t> out;
    out.reserve(local.size());
    for (std::size_t idx : local) out.push_back(map[idx]);
    return out;
}

Extremes extremes(const std::vector<ParetoPoint>& points) {
    bool any = false;
    Extremes ex;
    auto better = [](double a1, double a2, double b1, double b2, std::size_t ia,
                     std::size_t ib) {
        if (a1 != b1) return a1 < b1;
        if (a2 != b2) return a2 < b2;
        return ia < ib;
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        const ParetoPoint& p = points[i];
        if (!p.ok) continue;
        if (!any) {
            ex.lowest_error = ex.lowest_time = ex.lowest_memory = i;
            any = true;
            continue;
        }
        const ParetoPoint& e = points[ex.lowest_error];
        if (better(p.test.mse_pct, double(p.cost.total_time_proxy), e.test.mse_pct,
                   double(e.cost.total_time_proxy), i, ex.lowest_error))
            ex.lowest_error = i;
        const ParetoPoint& t = points[ex.lowest_time];
        if (better(double(p.cost.total_time_proxy), p.test.mse_pct,
                   double(t.cost.total_time_proxy), t.test.mse_pct, i, ex.lowest_time))
            ex.lowest_time = i;
        const ParetoPoint& m = points[ex.lowest_memory];
        if (better(double(p.cost.memory_bytes), p.test.mse_pct, double(m.cost.memory_bytes),
                   m.test.mse_pct, i, ex.lowest_memory))
            ex.lowest_memory = i;
    }
    if (!any) throw DataError("extremes: no successful points");
    return ex;
}

std::vector<FeatureMask> rfe(const FeatureMatrix& x_full, std::span<const double> y,
                             int min_features, const GbtConfig& reference) {
    if (int(x_full.cols) < min_features)
        throw ConfigError("rfe: fewer features than min_features");

    FeatureMask current = FeatureMask::all();
    if (x_full.cols != std::size_t(kNumFeatures))
        throw DataError("rfe: expected the full canonical feature matrix");

    auto project = [&](const FeatureMask& mask) {
        FeatureMatrix out = FeatureMatrix::zeros(x_full.rows, mask.size());
        for (std::size_t r = 0; r < x_full.rows; ++r)
            for (std::size_t c = 0; c < mask.size(); ++c)
                out.at(r, c) = x_full.at(r, std::size_t(mask.kept[c]));
        return out;
    };

    std::vector<FeatureMask> masks{current};
    while (int(current.size()) > min_features) {
        const FeatureMatrix x = project(current);
        const GbtEnsemble ens = fit_gbt(x, y, reference, current);
        const std::vector<double> importance = feature_importance(ens);

        // least useful feature; ties drop the highest canonical index
        std::size_t drop = 0;
        for (std::size_t pos = 1; pos < importance.size(); ++pos)
            if (importance[pos] <= importance[drop]) drop = pos;

        current.kept.erase(current.kept.begin() + std::ptrdiff_t(drop));
        masks.push_back(current);
    }
    return masks;
}

SplitData assemble_splits(const Dataset& ds) {
    SplitData out;
    std::array<std::vector<const WindowSample*>, 3> buckets;
    for (const auto& s : ds.samples)
        buckets[std::size_t(ds.meta.assignment.of(s.sim_id))].push_back(&s);

    auto fill = [](const std::vector<const WindowSample*>& rows, FeatureMatrix& x,
                   std::vector<double>& y) {
        x = FeatureMatrix::zeros(rows.size(), kNumFeatures);
        y.resize(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (int c = 0; c < kNumFeatures; ++c)
                x.at(r, std::size_t(c)) = rows[r]->features[std::size_t(c)];
            y[r] = rows[r]->delta_soh_norm;
        }
    };
    fill(buckets[0], out.x_train, out.y_train);
    fill(buckets[1], out.x_val, out.y_val);
    fill(buckets[2], out.x_test, out.y_test);
    if (out.x_train.rows == 0 || out.x_test.rows == 0)
        throw DataError("grid_search: empty train or test split");
    return out;
}

namespace {

FeatureMatrix project_mask(const FeatureMatrix& x, const FeatureMask& mask) {
    FeatureMatrix out = FeatureMatrix::zeros(x.rows, mask.size());
    for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t c = 0; c < mask.size(); ++c)
            out.at(r, c) = x.at(r, std::size_t(mask.kept[c]));
    return out;
}

ParetoPoint evaluate_point(const ModelSpec& model, const FeatureMask& mask,
                           const SplitData& splits, std::int64_t window_samples,
                           std::uint64_t job_seed) {
    ParetoPoint point;
    point.model_kind = model.is_gbt ? "gbt" : "mlp";
    point.config_key = model.key;
    point.mask = mask;

    const FeatureMatrix x_train = project_mask(splits.x_train, mask);
    const FeatureMatrix x_val = project_mask(splits.x_val, mask);
    const FeatureMatrix x_test = project_mask(splits.x_test, mask);

    std::vector<double> test_pred(x_test.rows);
    if (model.is_gbt) {
        const GbtEnsemble ens = fit_gbt(x_train, splits.y_train, model.gbt, mask);
        if (splits.x_val.rows > 0) {
            double sse = 0.0;
            for (std::size_t i = 0; i < x_val.rows; ++i) {
                const double e = predict(ens, x_val.row(i)) - splits.y_val[i];
                sse += e * e;
            }
            point.val_mse = sse / double(x_val.rows);
        }
        for (std::size_t i = 0; i < x_test.rows; ++i) test_pred[i] = predict(ens, x_test.row(i));
        point.cost = estimate(ens, window_samples);
    } else {
        MlpConfig cfg = model.mlp;
        cfg.seed = job_seed;
        MlpNetwork net = init_mlp(cfg, int(mask.size()));
        const TrainHistory history =
            train_mlp(net, x_train, splits.y_train, x_val, splits.y_val, cfg);
        if (!history.val_mse.empty())
            point.val_mse = history.val_mse[std::size_t(history.best_epoch)];
        for (std::size_t i = 0; i < x_test.rows; ++i) test_pred[i] = forward(net, x_test.row(i));
        point.cost = estimate(net, window_samples);
    }
    point.test = compute_metrics(test_pred, splits.y_test);
    return point;
}

}  // namespace

RunReport grid_search(const SearchSpace& space, const Dataset& ds, std::uint64_t seed,
                      int jobs) {
    space.validate();
    const SplitData splits = assemble_splits(ds);

    // shared feature ranking for both model families
    FeatureMatrix x_trainval = FeatureMatrix::zeros(
        splits.x_train.rows + splits.x_val.rows, kNumFeatures);
    std::vector<double> y_trainval;
    y_trainval.reserve(splits.y_train.size() + splits.y_val.size());
    for (std::size_t r = 0; r < splits.x_train.rows; ++r)
        for (int c = 0; c < kNumFeatures; ++c)
            x_trainval.at(r, std::size_t(c)) = splits.x_train.at(r, std::size_t(c));
    for (std::size_t r = 0; r < splits.x_val.rows; ++r)
        for (int c = 0; c < kNumFeatures; ++c)
            x_trainval.at(splits.x_train.rows + r, std::size_t(c)) =
                splits.x_val.at(r, std::size_t(c));
    y_trainval.insert(y_trainval.end(), splits.y_train.begin(), splits.y_train.end());
    y_trainval.insert(y_trainval.end(), splits.y_val.begin(), splits.y_val.end());

    const std::vector<FeatureMask> masks = rfe(x_trainval, y_trainval, space.rfe_min_features);
    const std::vector<ModelSpec> models = enumerate_space(space);

    RunReport report;
    report.seed = seed;
    report.n_masks = masks.size();
    report.window_samples =
        std::int64_t(std::llround(ds.meta.window_len_s / ds.meta.sample_period_s));
    report.points.resize(masks.size() * models.size());

    std::atomic<std::size_t> next{0};
    const std::size_t total = report.points.size();
    auto worker = [&]() {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total) break;
            const FeatureMask& mask = masks[job / models.size()];
            const ModelSpec& model = models[job % models.size()];
            try {
                report.points[job] = evaluate_point(model, mask, splits,
                                                    report.window_samples, mix64(seed, job));
            } catch (const std::exception& e) {
                ParetoPoint failed;
                failed.model_kind = model.is_gbt ? "gbt" : "mlp";
                failed.config_key = model.key;
                failed.mask = mask;
                failed.ok = false;
                failed.error = e.what();
                report.points[job] = std::move(failed);
            }
        }
    };

    const int n_threads = std::max(1, jobs);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    report.front_time = pareto_front(report.points, CostAxis::Time);
    report.front_memory = pareto_front(report.points, CostAxis::Memory);
    report.extreme = extremes(report.points);
    return report;
}

namespace {

constexpr const char* kPointsHeader =
    "model_kind,config_key,n_features,features,mae_pct,mse_pct,r2,val_mse,"
    "feature_ops,eval_ops,total_time_proxy,memory_bytes,status,error";

void write_point_row(std::ofstream& out, const ParetoPoint& p) {
    out << p.model_kind << ',' << p.config_key << ',' << p.mask.size() << ',';
    const std::string features = p.mask.describe();
    std::string joined;
    for (char c : features) joined += (c == ',') ? ';' : c;
    out << joined << ',';
    if (p.ok) {
        out << format_value(p.test.mae_pct) << ',' << format_value(p.test.mse_pct) << ','
            << format_value(p.test.r2) << ','
            << (std::isnan(p.val_mse) ? "nan" : format_value(p.val_mse));
    } else {
        out << "nan,nan,nan,nan";
    }
    out << ',' << p.cost.feature_ops << ',' << p.cost.eval_ops << ','
        << p.cost.total_time_proxy << ',' << p.cost.memory_bytes << ','
        << (p.ok ? "ok" : "failed") << ',' << p.error << '\n';
}

void write_points_csv(const std::vector<ParetoPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open report file for writing: " + path);
    out << kPointsHeader << '\n';
    for (const auto& p : points) write_point_row(out, p);
    if (!out) throw DataError("write failed: " + path);
}

void write_subset_csv(const std::vector<ParetoPoint>& points,
                      const std::vector<std::size_t>& subset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open report file for writing: " + path);
    out << kPointsHeader << '\n';
    for (std::size_t idx : subset) write_point_row(out, points[idx]);
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace

void write_report(const RunReport& report, const std::string& dir) {
    fs::create_directories(dir);
    write_points_csv(report.points, (fs::path(dir) / "points.csv").string());
    write_subset_csv(report.points, report.front_time,
                     (fs::path(dir) / "front_time.csv").string());
    write_subset_csv(report.points, report.front_memory,
                     (fs::path(dir) / "front_memory.csv").string());

    {
        std::ofstream out(fs::path(dir) / "extremes.csv", std::ios::binary);
        out << "role," << kPointsHeader << '\n';
        const std::pair<const char*, std::size_t> rows[] = {
            {"lowest_error", report.extreme.lowest_error},
            {"lowest_time", report.extreme.lowest_time},
            {"lowest_memory", report.extreme.lowest_memory},
        };
        for (const auto& [role, idx] : rows) {
            out << role << ',';
            write_point_row(out, report.points[idx]);
        }
    }
    {
        std::ofstream out(fs::path(dir) / "meta.txt", std::ios::binary);
        out << "seed = " << report.seed << '\n'
            << "points = " << report.points.size() << '\n'
            << "masks = " << report.n_masks << '\n'
            << "window_samples = " << report.window_samples << '\n';
    }
}

RunReport read_report(const std::string& dir) {
    const std::string points_path = (fs::path(dir) / "points.csv").string();
    std::ifstream in(points_path, std::ios::binary);
    if (!in) throw DataError("cannot open report: " + points_path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(points_path + ":1: missing header");

    RunReport report;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() < 14)
            throw DataError(points_path + ":" + std::to_string(line_no) + ": short row");
        ParetoPoint p;
        p.model_kind = f[0];
        p.config_key = f[1];
        for (std::size_t pos = 0;;) {
            const auto semi = f[3].find(';', pos);
            const std::string name = f[3].substr(pos, semi - pos);
            for (int i = 0; i < kNumFeatures; ++i)
                if (name == kFeatureNames[std::size_t(i)]) p.mask.kept.push_back(i);
            if (semi == std::string::npos) break;
            pos = semi + 1;
        }
        p.ok = f[12] == "ok";
        if (p.ok) {
            p.test.mae_pct = parse_double(f[4], "mae_pct");
            p.test.mse_pct = parse_double(f[5], "mse_pct");
            p.test.r2 = parse_double(f[6], "r2");
            p.val_mse = f[7] == "nan" ? std::numeric_limits<double>::quiet_NaN()
                                      : parse_double(f[7], "val_mse");
        }
        p.cost.feature_ops = parse_int(f[8], "feature_ops");
        p.cost.eval_ops = parse_int(f[9], "eval_ops");
        p.cost.total_time_proxy = parse_int(f[10], "total_time_proxy");
        p.cost.memory_bytes = parse_int(f[11], "memory_bytes");
        p.error = f[13];
        report.points.push_back(std::move(p));
    }
    if (report.points.empty()) throw DataError(points_path + ": no points");

    const KeyValueFile meta = KeyValueFile::load((fs::path(dir) / "meta.txt").string());
    report.seed = std::uint64_t(meta.get_int("seed", 0));
    report.n_masks = std::size_t(meta.get_int("masks", 0));
    report.window_samples = meta.get_int("window_samples", 0);

    report.front_time = pareto_front(report.points, CostAxis::Time);
    report.front_memory = pareto_front(report.points, CostAxis::Memory);
    report.extreme = extremes(report.points);
    return report;
}

void export_report(const RunReport& report, const std::string& out_dir, ReportFormat format) {
    fs::create_directories(out_dir);
    if (format == ReportFormat::Csv) {
        write_report(report, out_dir);
        return;
    }
    // x/y series for external plotting: cost on x, test error on y
    auto write_xy = [&](const std::string& name, const std::vector<std::size_t>& subset,
                        CostAxis axis, const char* kind_filter) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        if (!out) throw DataError("cannot open plot file for writing: " + name);
        out << "# cost error_mse_pct\n";
        for (std::size_t idx : subset) {
            const ParetoPoint& p = report.points[idx];
            if (!p.ok) continue;
            if (kind_filter && p.model_kind != kind_filter) continue;
            out << format_value(cost_of(p, axis)) << ' ' << format_value(p.test.mse_pct)
                << '\n';
        }
    };
    std::vector<std::size_t> all(report.points.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    write_xy("front_time.xy", report.front_time, CostAxis::Time, nullptr);
    write_xy("front_memory.xy", report.front_memory, CostAxis::Memory, nullptr);
    write_xy("points_gbt_time.xy", all, CostAxis::Time, "gbt");
    write_xy("points_mlp_time.xy", all, CostAxis::Time, "mlp");
    write_xy("points_gbt_memory.xy", all, CostAxis::Memory, "gbt");
    write_xy("points_mlp_memory.xy", all, CostAxis::Memory, "mlp");
}

}  // namespace sohkit
