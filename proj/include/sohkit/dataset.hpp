#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sohkit/trace.hpp"

namespace sohkit {

/// Canonical feature order: mean, variance, min, max of current, voltage and
/// cell temperature, in that quantity order.
inline constexpr std::array<const char*, 12> kFeatureNames = {
    "i_mean", "i_var", "i_min", "i_max", "v_mean", "v_var",
    "v_min",  "v_max", "t_mean", "t_var", "t_min", "t_max"};

inline constexpr int kNumFeatures = 12;

/// Kept subset of the canonical features, ascending canonical indices.
struct FeatureMask {
    std::vector<int> kept;

    static FeatureMask all();
    void validate() const;
    std::size_t size() const { return kept.size(); }
    std::string describe() const;  // comma-joined feature names
};

/// Row range of one analysis window; endpoints inclusive. Consecutive windows
/// share their boundary row so the per-window soh drops telescope to the
/// whole-trace drop.
struct WindowRange {
    std::size_t first = 0;
    std::size_t last = 0;
};

struct WindowSample {
    std::string sim_id;
    std::int64_t window_index = 0;
    std::array<double, kNumFeatures> features{};
    double delta_soh_raw = 0.0;
    double delta_soh_norm = 0.0;
};

/// Label scale fitted on the training split; apply clamps out-of-range values
/// and counts the clamping events.
struct NormScale {
    double max_delta = 0.0;
    std::int64_t clamp_count = 0;
};

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

const char* to_string(Split split);
Split split_from_string(const std::string& name);

struct SplitAssignment {
    std::map<std::string, Split> by_sim;

    Split of(const std::string& sim_id) const;
};

/// Maximal list of full-length windows; a trailing partial window is dropped.
/// window_len must be a positive multiple of the trace sample period.
std::vector<WindowRange> segment_windows(const Trace& trace, double window_len_s);

/// Population statistics over the window rows, single pass then finalize,
/// projected through the mask in canonical order. With use_ambient the
/// temperature features come from t_amb_c instead of t_cell_c.
std::vector<double> extract_features(const Trace& trace, const WindowRange& range,
                                     const FeatureMask& mask, bool use_ambient = false);

/// soh at the window's first row minus soh at its last row.
double label_window(const Trace& trace, const WindowRange& range);

NormScale fit_norm(std::span<const double> train_labels);
double apply_norm(NormScale& scale, double raw);
double denorm(const NormScale& scale, double normalized);

/// Deterministic simulation-level split by largest-remainder apportionment of
/// the shuffled id list. Requires at least 3 simulations.
SplitAssignment split_by_simulation(const std::vector<std::string>& sim_ids,
                                    const std::array<double, 3>& proportions,
                                    std::uint64_t seed);

/// Windows a trace into samples with raw labels (normalization applied later).
std::vector<WindowSample> window_trace(const Trace& trace, double window_len_s,
                                       bool use_ambient = false);

// --- dataset file + sidecar ---

struct DatasetMeta {
    NormScale scale;
    std::uint64_t split_seed = 0;
    std::array<double, 3> proportions{0.5, 0.2, 0.3};
    double window_len_s = 7200.0;
    double sample_period_s = 1.0;
    SplitAssignment assignment;
};

struct Dataset {
    std::vector<WindowSample> samples;
    DatasetMeta meta;
};

void write_dataset(const Dataset& ds, const std::string& csv_path,
                   const std::string& meta_path);
Dataset read_dataset(const std::string& csv_path, const std::string& meta_path);

/// Sidecar path convention: "<dataset>.meta" next to the csv.
std::string meta_path_for(const std::string& csv_path);

}  // namespace sohkit
