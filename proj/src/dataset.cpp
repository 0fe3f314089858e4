#include "sohkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "sohkit/config.hpp"
#include "sohkit/errors.hpp"

namespace sohkit {

FeatureMask FeatureMask::all() {
    FeatureMask mask;
    mask.kept.resize(kNumFeatures);
    for (int i = 0; i < kNumFeatures; ++i) mask.kept[i] = i;
    return mask;
}

void FeatureMask::validate() const {
    if (kept.size() < 3 || kept.size() > kNumFeatures)
        throw ConfigError("feature mask must keep between 3 and 12 features");
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] < 0 || kept[i] >= kNumFeatures)
            throw ConfigError("feature mask index out of range");
        if (i > 0 && kept[i] <= kept[i - 1])
            throw ConfigError("feature mask indices must be strictly ascending");
    }
}

std::string FeatureMask::describe() const {
    std::string out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i) out += ',';
        out += kFeatureNames[std::size_t(kept[i])];
    }
    return out;
}

const char* to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Split split_from_string(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw ConfigError("unknown split name '" + name + "'");
}

Split SplitAssignment::of(const std::string& sim_id) const {
    auto it = by_sim.find(sim_id);
    if (it == by_sim.end()) throw DataError("sim_id not in split assignment: " + sim_id);
    return it->second;
}

std::vector<WindowRange> segment_windows(const Trace& trace, double window_len_s) {
    if (trace.rows() < 2) return {};
    const double period = trace.time_s[1] - trace.time_s[0];
    if (!(window_len_s > 0)) throw ConfigError("window length must be > 0");
    const double ratio = window_len_s / period;
    const auto steps = std::int64_t(std::llround(ratio));
    if (steps < 1 || std::abs(ratio - double(steps)) > 1e-9)
        throw ConfigError("window length must be a multiple of the sample period");

    const auto n_windows = std::int64_t(trace.rows() - 1) / steps;
    std::vector<WindowRange> out;
    out.reserve(std::size_t(std::max<std::int64_t>(n_windows, 0)));
    for (std::int64_t w = 0; w < n_windows; ++w)
        out.push_back({std::size_t(w * steps), std::size_t((w + 1) * steps)});
    return out;
}

namespace {

struct Stats {
    double mean, var, min, max;
};

// single pass in row order, then finalize; population variance
Stats column_stats(const std::vector<double>& col, std::size_t first, std::size_t last) {
    double sum = 0.0, sum_sq = 0.0;
    double mn = col[first], mx = col[first];
    for (std::size_t i = first; i <= last; ++i) {
        const double x = col[i];
        sum += x;
        sum_sq += x * x;
        mn = std::min(mn, x);
        mx = std::max(mx, x);
    }
    const double n = double(last - first + 1);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return {mean, var, mn, mx};
}

}  // namespace

std::vector<double> extract_features(const Trace& trace, const WindowRange& range,
                                     const FeatureMask& mask, bool use_ambient) {
    if (range.last < range.first || range.last >= trace.rows())
        throw DataError("extract_features: window range outside trace");

    const auto& temp_col = use_ambient ? trace.t_amb_c : trace.t_cell_c;
    const Stats s[3] = {
        column_stats(trace.current_a, range.first, range.last),
        column_stats(trace.voltage_v, range.first, range.last),
        column_stats(temp_col, range.first, range.last),
    };

    std::array<double, kNumFeatures> full;
    for (int q = 0; q < 3; ++q) {
        full[std::size_t(4 * q + 0)] = s[q].mean;
        full[std::size_t(4 * q + 1)] = s[q].var;
        full[std::size_t(4 * q + 2)] = s[q].min;
        full[std::size_t(4 * q + 3)] = s[q].max;
    }

    std::vector<double> out;
    out.reserve(mask.size());
    for (int idx : mask.kept) out.push_back(full[std::size_t(idx)]);
    return out;
}

double label_window(const Trace& trace, const WindowRange& range) {
    if (range.last < range.first || range.last >= trace.rows())
        throw DataError("label_window: window range outside trace");
    return trace.soh[range.first] - trace.soh[range.last];
}

NormScale fit_norm(std::span<const double> train_labels) {
    if (train_labels.empty()) throw DataError("fit_norm: empty training labels");
    double mx = 0.0;
    for (double v : train_labels) mx = std::max(mx, v);
    if (!(mx > 0.0)) throw DataError("fit_norm: degenerate labels (all zero)");
    return NormScale{mx, 0};
}

double apply_norm(NormScale& scale, double raw) {
    if (!(scale.max_delta > 0)) throw DataError("apply_norm: scale not fitted");
    const double v = raw / scale.max_delta;
    if (v < 0.0 || v > 1.0) {
        scale.clamp_count += 1;
        return std::clamp(v, 0.0, 1.0);
    }
    return v;
}

double denorm(const NormScale& scale, double normalized) {
    return normalized * scale.max_delta;
}

SplitAssignment split_by_simulation(const std::vector<std::string>& sim_ids,
                                    const std::array<double, 3>& proportions,
                                    std::uint64_t seed) {
    if (sim_ids.size() < 3)
        throw ConfigError("split_by_simulation: need at least 3 simulations");
    double psum = 0.0;
    for (double p : proportions) {
        if (!(p >= 0)) throw ConfigError("split proportions must be >= 0");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-9)
        throw ConfigError("split proportions must sum to 1");

    std::vector<std::string> ids = sim_ids;
    {
        std::vector<std::string> sorted_ids = ids;
        std::sort(sorted_ids.begin(), sorted_ids.end());
        if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end())
            throw DataError("split_by_simulation: duplicate sim_id");
    }

    // hand-rolled Fisher-Yates so the order is identical on every platform
    std::mt19937_64 gen(seed);
    for (std::size_t i = ids.size() - 1; i > 0; --i) {
        const std::size_t j = std::size_t(gen() % (i + 1));
        std::swap(ids[i], ids[j]);
    }

    // largest-remainder apportionment of the three bucket sizes
    const auto n = std::int64_t(ids.size());
    std::array<std::int64_t, 3> counts;
    std::array<double, 3> fracs;
    std::int64_t assigned = 0;
    for (int b = 0; b < 3; ++b) {
        const double exact = double(n) * proportions[std::size_t(b)];
        counts[std::size_t(b)] = std::int64_t(std::floor(exact));
        fracs[std::size_t(b)] = exact - std::floor(exact);
        assigned += counts[std::size_t(b)];
    }
    while (assigned < n) {
        int best = 0;
        for (int b = 1; b < 3; ++b)
            if (fracs[std::size_t(b)] > fracs[std::size_t(best)]) best = b;
        counts[std::size_t(best)] += 1;
        fracs[std::size_t(best)] = -1.0;
        ++assigned;
    }

    SplitAssignment out;
    std::size_t pos = 0;
    const Split order[3] = {Split::Train, Split::Val, Split::Test};
    for (int b = 0; b < 3; ++b)
        for (std::int64_t k = 0; k < counts[std::size_t(b)]; ++k)
            out.by_sim[ids[pos++]] = order[b];
    return out;
}

std::vector<WindowSample> window_trace(const Trace& trace, double window_len_s,
                                       bool use_ambient) {
    const auto ranges = segment_windows(trace, window_len_s);
    const FeatureMask all = FeatureMask::all();
    std::vector<WindowSample> out;
    out.reserve(ranges.size());
    for (std::size_t w = 0; w < ranges.size(); ++w) {
        WindowSample s;
        s.sim_id = trace.sim_id;
        s.window_index = std::int64_t(w);
        const auto feats = extract_features(trace, ranges[w], all, use_ambient);
        std::copy(feats.begin(), feats.end(), s.features.begin());
        s.delta_soh_raw = label_window(trace, ranges[w]);
        out.push_back(std::move(s));
    }
    return out;
}

std::string meta_path_for(const std::string& csv_path) { return csv_path + ".meta"; }

void write_dataset(const Dataset& ds, const std::string& csv_path,
                   const std::string& meta_path) {
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw DataError("cannot open dataset for writing: " + csv_path);
        out << "sim_id,window_index";
        for (const char* name : kFeatureNames) out << ',' << name;
        out << ",delta_soh_raw,delta_soh_norm\n";
        for (const auto& s : ds.samples) {
            out << s.sim_id << ',' << s.window_index;
            for (double f : s.features) out << ',' << format_value(f);
            out << ',' << format_value(s.delta_soh_raw) << ','
                << format_value(s.delta_soh_norm) << '\n';
        }
        if (!out) throw DataError("write failed: " + csv_path);
    }
    {
        std::ofstream out(meta_path, std::ios::binary);
        if (!out) throw DataError("cannot open dataset meta for writing: " + meta_path);
        out << "max_delta = " << format_value(ds.meta.scale.max_delta) << '\n'
            << "clamp_count = " << ds.meta.scale.clamp_count << '\n'
            << "split_seed = " << ds.meta.split_seed << '\n'
            << "proportions = " << format_value(ds.meta.proportions[0]) << ','
            << format_value(ds.meta.proportions[1]) << ','
            << format_value(ds.meta.proportions[2]) << '\n'
            << "window_len_s = " << format_value(ds.meta.window_len_s) << '\n'
            << "sample_period_s = " << format_value(ds.meta.sample_period_s) << '\n';
        for (const auto& [sim_id, split] : ds.meta.assignment.by_sim)
            out << "split." << sim_id << " = " << to_string(split) << '\n';
        if (!out) throw DataError("write failed: " + meta_path);
    }
}

Dataset read_dataset(const std::string& csv_path, const std::string& meta_path) {
    Dataset ds;

    const KeyValueFile meta = KeyValueFile::load(meta_path);
    ds.meta.scale.max_delta = meta.get_double("max_delta");
    ds.meta.scale.clamp_count = meta.get_int("clamp_count", 0);
    ds.meta.split_seed = std::uint64_t(meta.get_int("split_seed"));
    const auto props = meta.get_doubles("proportions");
    if (props.size() != 3) throw ConfigError(meta_path + ": proportions must have 3 entries");
    std::copy(props.begin(), props.end(), ds.meta.proportions.begin());
    ds.meta.window_len_s = meta.get_double("window_len_s");
    ds.meta.sample_period_s = meta.get_double("sample_period_s", 1.0);
    for (const auto& [key, value] : meta.entries()) {
        if (key.rfind("split.", 0) == 0)
            ds.meta.assignment.by_sim[key.substr(6)] = split_from_string(value);
    }

    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(csv_path + ":1: missing header");

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
        if (f.size() != std::size_t(2 + kNumFeatures + 2))
            throw DataError(csv_path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(2 + kNumFeatures + 2) + " fields");
        WindowSample s;
        s.sim_id = f[0];
        s.window_index = parse_int(f[1], "window_index");
        for (int i = 0; i < kNumFeatures; ++i)
            s.features[std::size_t(i)] =
                parse_double(f[std::size_t(2 + i)], kFeatureNames[std::size_t(i)]);
        s.delta_soh_raw = parse_double(f[std::size_t(2 + kNumFeatures)], "delta_soh_raw");
        s.delta_soh_norm = parse_double(f[std::size_t(3 + kNumFeatures)], "delta_soh_norm");
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace sohkit
