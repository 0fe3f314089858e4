// sohkit command line: simulate -> dataset -> train -> explore -> report,
// plus windowed inference on a stored trace with `predict`.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "sohkit/dataset.hpp"
#include "sohkit/explore.hpp"
#include "sohkit/model_io.hpp"
#include "sohkit/profiles.hpp"
#include "sohkit/trace.hpp"

namespace fs = std::filesystem;
using namespace sohkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

CellParams load_cell(const std::string& path) {
    if (path.empty()) return CellParams{};
    return cell_from_file(KeyValueFile::load(path));
}

std::array<double, 3> parse_split(const std::string& text) {
    std::array<double, 3> out{};
    int consumed = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%n", &out[0], &out[1], &out[2], &consumed) != 3 ||
        consumed != int(text.size()))
        throw ConfigError("--split expects three comma-separated numbers, e.g. 50,20,30");
    const double total = out[0] + out[1] + out[2];
    if (!(total > 0)) throw ConfigError("--split proportions must be positive");
    for (double& v : out) v /= total;
    return out;
}

int run_simulate(const std::string& doe_path, const std::string& cell_path,
                 const std::string& out_dir, bool with_ukf, int jobs) {
    DoeConfig doe = DoeConfig::from_file(KeyValueFile::load(doe_path));
    doe.cell = load_cell(cell_path);
    const std::vector<SimSpec> specs = generate_campaign(doe);

    fs::create_directories(out_dir);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::vector<std::string> errors(specs.size());
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) break;
            try {
                const Trace trace = run_simulation(specs[i], with_ukf);
                write_trace(trace, (fs::path(out_dir) / (specs[i].sim_id + ".csv")).string());
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
            const std::size_t n = done.fetch_add(1) + 1;
            std::fprintf(stderr, "\r[simulate] %zu/%zu", n, specs.size());
        }
    };

    const int n_threads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    std::fprintf(stderr, "\n");

    for (std::size_t i = 0; i < specs.size(); ++i)
        if (!errors[i].empty())
            throw NumericError("simulation " + specs[i].sim_id + " failed: " + errors[i]);

    write_manifest(specs, (fs::path(out_dir) / "manifest.csv").string());
    std::printf("wrote %zu traces and manifest.csv to %s\n", specs.size(), out_dir.c_str());
    return kExitOk;
}

std::vector<std::string> trace_files(const std::string& dir) {
    const fs::path manifest = fs::path(dir) / "manifest.csv";
    std::vector<std::string> files;
    if (fs::exists(manifest)) {
        for (const auto& spec : read_manifest(manifest.string(), CellParams{}))
            files.push_back((fs::path(dir) / (spec.sim_id + ".csv")).string());
        return files;
    }
    // no manifest: ingest every csv in the directory (external datasets)
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

int run_dataset(const std::string& traces_dir, double window_hours,
                const std::string& split_text, std::uint64_t seed,
                const std::string& out_file, bool use_ambient) {
    const std::array<double, 3> proportions = parse_split(split_text);
    const double window_len_s = window_hours * 3600.0;

    const std::vector<std::string> files = trace_files(traces_dir);
    if (files.empty()) throw DataError("no traces found in " + traces_dir);

    Dataset ds;
    ds.meta.split_seed = seed;
    ds.meta.proportions = proportions;
    ds.meta.window_len_s = window_len_s;

    std::vector<std::string> sim_ids;
    for (const auto& file : files) {
        const Trace trace = read_trace(file);
        if (trace.rows() >= 2 && ds.meta.sample_period_s == 1.0)
            ds.meta.sample_period_s = trace.time_s[1] - trace.time_s[0];
        sim_ids.push_back(trace.sim_id);
        for (auto& sample : window_trace(trace, window_len_s, use_ambient))
            ds.samples.push_back(std::move(sample));
    }
    if (ds.samples.empty()) throw DataError("no full windows in any trace");

    ds.meta.assignment = split_by_simulation(sim_ids, proportions, seed);

    std::vector<double> train_labels;
    for (const auto& s : ds.samples)
        if (ds.meta.assignment.of(s.sim_id) == Split::Train)
            train_labels.push_back(s.delta_soh_raw);
    ds.meta.scale = fit_norm(train_labels);
    for (auto& s : ds.samples) s.delta_soh_norm = apply_norm(ds.meta.scale, s.delta_soh_raw);

    write_dataset(ds, out_file, meta_path_for(out_file));
    std::printf("wrote %zu window samples from %zu simulations to %s\n", ds.samples.size(),
                sim_ids.size(), out_file.c_str());
    std::printf("norm max_delta = %s, clamped labels = %lld\n",
                format_value(ds.meta.scale.max_delta).c_str(),
                (long long)ds.meta.scale.clamp_count);
    return kExitOk;
}

FeatureMask mask_from_names(const std::vector<std::string>& names) {
    FeatureMask mask;
    for (const auto& name : names) {
        bool found = false;
        for (int i = 0; i < kNumFeatures; ++i) {
            if (name == kFeatureNames[std::size_t(i)]) {
                mask.kept.push_back(i);
                found = true;
                break;
            }
        }
        if (!found) throw ConfigError("unknown feature name '" + name + "'");
    }
    std::sort(mask.kept.begin(), mask.kept.end());
    mask.validate();
    return mask;
}

int run_train(const std::string& model_kind, const std::string& config_path,
              const std::string& dataset_path, const std::string& out_path,
              const std::string& text_dump) {
    const Dataset ds = read_dataset(dataset_path, meta_path_for(dataset_path));
    const SplitData splits = assemble_splits(ds);

    KeyValueFile cfg = config_path.empty() ? KeyValueFile::parse("")
                                           : KeyValueFile::load(config_path);

    FeatureMask mask = FeatureMask::all();
    if (cfg.has("features")) mask = mask_from_names(cfg.get_strings("features"));

    auto project = [&](const FeatureMatrix& x) {
        FeatureMatrix out = FeatureMatrix::zeros(x.rows, mask.size());
        for (std::size_t r = 0; r < x.rows; ++r)
            for (std::size_t c = 0; c < mask.size(); ++c)
                out.at(r, c) = x.at(r, std::size_t(mask.kept[c]));
        return out;
    };
    const FeatureMatrix x_train = project(splits.x_train);
    const FeatureMatrix x_val = project(splits.x_val);
    const FeatureMatrix x_test = project(splits.x_test);

    ModelMeta meta;
    meta.mask = mask;
    meta.norm_max_delta = ds.meta.scale.max_delta;
    meta.window_len_s = ds.meta.window_len_s;

    std::vector<double> test_pred(x_test.rows);
    if (model_kind == "gbt") {
        GbtConfig gc;
        gc.n_trees = int(cfg.get_int("n_trees", 100));
        gc.max_depth = int(cfg.get_int("max_depth", 3));
        gc.learning_rate = cfg.get_double("learning_rate", 0.1);
        gc.min_samples_leaf = int(cfg.get_int("min_samples_leaf", 1));
        const GbtEnsemble ens = fit_gbt(x_train, splits.y_train, gc, mask);
        for (std::size_t i = 0; i < x_test.rows; ++i) test_pred[i] = predict(ens, x_test.row(i));
        save_gbt(ens, meta, out_path);
        if (!text_dump.empty()) {
            std::ofstream dump(text_dump);
            dump << gbt_to_text(ens);
        }
    } else if (model_kind == "mlp") {
        MlpConfig mc;
        if (cfg.has("hidden_sizes")) {
            mc.hidden_sizes.clear();
            for (auto v : cfg.get_ints("hidden_sizes")) mc.hidden_sizes.push_back(int(v));
        }
        mc.batch_size = int(cfg.get_int("batch_size", mc.batch_size));
        mc.learning_rate = cfg.get_double("learning_rate", mc.learning_rate);
        mc.epochs = int(cfg.get_int("epochs", mc.epochs));
        mc.seed = std::uint64_t(cfg.get_int("seed", 0));
        MlpNetwork net = init_mlp(mc, int(mask.size()));
        const TrainHistory history =
            train_mlp(net, x_train, splits.y_train, x_val, splits.y_val, mc);
        std::printf("best epoch %d\n", history.best_epoch);
        for (std::size_t i = 0; i < x_test.rows; ++i) test_pred[i] = forward(net, x_test.row(i));
        save_mlp(net, meta, out_path);
        if (!text_dump.empty()) {
            std::ofstream dump(text_dump);
            dump << mlp_to_text(net);
        }
    } else {
        throw ConfigError("--model must be gbt or mlp");
    }

    const Metrics m = compute_metrics(test_pred, splits.y_test);
    std::printf("test mae %.4f%%  mse %.4f%%  r2 %.4f\n", m.mae_pct, m.mse_pct, m.r2);
    std::printf("saved model to %s\n", out_path.c_str());
    return kExitOk;
}

int run_explore(const std::string& dataset_path, const std::string& space_path,
                std::uint64_t seed, const std::string& report_dir, int jobs) {
    const Dataset ds = read_dataset(dataset_path, meta_path_for(dataset_path));
    const SearchSpace space = space_path.empty()
                                  ? SearchSpace{}
                                  : SearchSpace::from_file(KeyValueFile::load(space_path));

    const RunReport report = grid_search(space, ds, seed, jobs);
    write_report(report, report_dir);

    std::size_t failed = 0;
    for (const auto& p : report.points) failed += !p.ok;
    std::printf("evaluated %zu points (%zu failed), fronts: time %zu, memory %zu\n",
                report.points.size(), failed, report.front_time.size(),
                report.front_memory.size());
    const ParetoPoint& best = report.points[report.extreme.lowest_error];
    std::printf("lowest error: %s %s (%zu features) mae %.4f%% mse %.4f%%\n",
                best.model_kind.c_str(), best.config_key.c_str(), best.mask.size(),
                best.test.mae_pct, best.test.mse_pct);
    std::printf("report written to %s\n", report_dir.c_str());
    return kExitOk;
}

int run_report(const std::string& in_dir, const std::string& format,
               const std::string& out_dir) {
    const RunReport report = read_report(in_dir);
    ReportFormat fmt;
    if (format == "csv")
        fmt = ReportFormat::Csv;
    else if (format == "plotdata")
        fmt = ReportFormat::PlotData;
    else
        throw ConfigError("--format must be csv or plotdata");
    const std::string dest = out_dir.empty() ? (fs::path(in_dir) / "export").string() : out_dir;
    export_report(report, dest, fmt);
    std::printf("exported %s tables to %s\n", format.c_str(), dest.c_str());
    return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& trace_path) {
    const Trace trace = read_trace(trace_path);

    ModelMeta meta;
    const ModelKind kind = model_kind_of(model_path);
    GbtEnsemble gbt;
    MlpNetwork mlp;
    if (kind == ModelKind::Gbt)
        gbt = load_gbt(model_path, &meta);
    else
        mlp = load_mlp(model_path, &meta);

    const auto windows = segment_windows(trace, meta.window_len_s);
    if (windows.empty()) throw DataError("trace shorter than one analysis window");

    // de-normalize and accumulate: one multiply and one subtraction per window
    double soh_accum = trace.soh[windows.front().first];
    std::printf("window_index,delta_soh_pred,soh_accum\n");
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto feats = extract_features(trace, windows[w], meta.mask, meta.use_ambient_temp);
        const double norm_pred = kind == ModelKind::Gbt ? predict(gbt, feats) : forward(mlp, feats);
        const double raw_pred = norm_pred * meta.norm_max_delta;
        soh_accum -= raw_pred;
        std::printf("%zu,%s,%s\n", w, format_value(raw_pred).c_str(),
                    format_value(soh_accum).c_str());
    }
    std::printf("# final accumulated soh: %s (trace label: %s)\n",
                format_value(soh_accum).c_str(),
                format_value(trace.soh[windows.back().last]).c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"battery SOH dataset generation and model exploration"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a DoE campaign of cell simulations");
    std::string doe_path, cell_path, sim_out;
    bool with_ukf = false;
    int sim_jobs = int(std::thread::hardware_concurrency());
    simulate->add_option("--doe", doe_path, "DoE config file")->required();
    simulate->add_option("--cell", cell_path, "cell parameter file (defaults built in)");
    simulate->add_option("--out", sim_out, "output directory")->required();
    simulate->add_flag("--ukf", with_ukf, "run the state estimator alongside");
    simulate->add_option("--jobs", sim_jobs, "parallel simulations");

    // dataset
    auto* dataset = app.add_subcommand("dataset", "window traces into a training dataset");
    std::string traces_dir, dataset_out, split_text = "50,20,30";
    double window_hours = 2.0;
    std::uint64_t dataset_seed = 1;
    bool use_ambient = false;
    dataset->add_option("--traces", traces_dir, "directory of trace csv files")->required();
    dataset->add_option("--window-hours", window_hours, "window length in hours");
    dataset->add_option("--split", split_text, "train/val/test percentages");
    dataset->add_option("--seed", dataset_seed, "split shuffle seed");
    dataset->add_option("--out", dataset_out, "dataset csv path")->required();
    dataset->add_flag("--use-ambient-temp", use_ambient,
                      "take temperature features from t_amb_c instead of t_cell_c");

    // train
    auto* train = app.add_subcommand("train", "train a single model configuration");
    std::string model_kind, train_config, train_dataset, model_out, text_dump;
    train->add_option("--model", model_kind, "gbt | mlp")->required();
    train->add_option("--config", train_config, "model config file");
    train->add_option("--dataset", train_dataset, "dataset csv path")->required();
    train->add_option("--out", model_out, "model output path")->required();
    train->add_option("--text-dump", text_dump, "also write a readable model dump");

    // explore
    auto* explore = app.add_subcommand("explore", "grid search over configurations x features");
    std::string explore_dataset, space_path, report_dir;
    std::uint64_t explore_seed = 1;
    int explore_jobs = int(std::thread::hardware_concurrency());
    explore->add_option("--dataset", explore_dataset, "dataset csv path")->required();
    explore->add_option("--space", space_path, "search space config (defaults built in)");
    explore->add_option("--seed", explore_seed, "exploration seed");
    explore->add_option("--report", report_dir, "report output directory")->required();
    explore->add_option("--jobs", explore_jobs, "parallel grid workers");

    // report
    auto* report = app.add_subcommand("report", "export pareto tables and plot series");
    std::string report_in, report_format = "csv", report_out;
    report->add_option("--in", report_in, "report directory from explore")->required();
    report->add_option("--format", report_format, "csv | plotdata");
    report->add_option("--out", report_out, "export directory (default <in>/export)");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "windowed SOH inference on a trace");
    std::string predict_model, predict_trace;
    predict_cmd->add_option("--model", predict_model, "trained model file")->required();
    predict_cmd->add_option("--trace", predict_trace, "trace csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*simulate)
            return run_simulate(doe_path, cell_path, sim_out, with_ukf, sim_jobs);
        if (*dataset)
            return run_dataset(traces_dir, window_hours, split_text, dataset_seed, dataset_out,
                               use_ambient);
        if (*train)
            return run_train(model_kind, train_config, train_dataset, model_out, text_dump);
        if (*explore)
            return run_explore(explore_dataset, space_path, explore_seed, report_dir,
                               explore_jobs);
        if (*report) return run_report(report_in, report_format, report_out);
        if (*predict_cmd) return run_predict(predict_model, predict_trace);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitOk;
}
