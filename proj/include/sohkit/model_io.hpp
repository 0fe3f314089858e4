#pragma once

#include <string>

#include "sohkit/dataset.hpp"
#include "sohkit/gbt.hpp"
#include "sohkit/mlp.hpp"

namespace sohkit {

/// Deployment metadata saved next to the parameters: the frozen label scale,
/// the window length and the kept features, everything inference needs.
struct ModelMeta {
    FeatureMask mask = FeatureMask::all();
    double norm_max_delta = 0.0;
    double window_len_s = 7200.0;
    bool use_ambient_temp = false;
};

enum class ModelKind : std::uint8_t { Gbt = 1, Mlp = 2 };

/// Peeks at the file header. Throws DataError for foreign files.
ModelKind model_kind_of(const std::string& path);

void save_gbt(const GbtEnsemble& ensemble, const ModelMeta& meta, const std::string& path);
GbtEnsemble load_gbt(const std::string& path, ModelMeta* meta = nullptr);

void save_mlp(const MlpNetwork& net, const ModelMeta& meta, const std::string& path);
MlpNetwork load_mlp(const std::string& path, ModelMeta* meta = nullptr);

}  // namespace sohkit
