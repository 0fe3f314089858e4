#include "sohkit/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "sohkit/errors.hpp"

// Binary layout (little-endian, 32-bit floats for parameters):
//   char[8]  magic "SOHKITM1"
//   u32      model kind (1 = gbt, 2 = mlp)
//   u32      mask size, then i32 canonical feature indices
//   f64      norm_max_delta
//   f64      window_len_s
//   u8       use_ambient_temp
// gbt payload:
//   u32 n_trees_cfg, u32 max_depth, u32 min_samples_leaf, f32 learning_rate,
//   f32 base_prediction, u32 n_trees;
//   per tree: u32 n_nodes; per node: i32 feature, f32 value, f32 gain,
//   i32 left, i32 right
// mlp payload:
//   u32 input_dim, u32 n_layers; per layer: u32 in, u32 out,
//   f32 weights (out x in, row-major), f32 biases

namespace sohkit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; this build targets LE hosts");

constexpr char kMagic[8] = {'S', 'O', 'H', 'K', 'I', 'T', 'M', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw DataError("truncated model file: " + path);
    return v;
}

void write_header(std::ofstream& out, ModelKind kind, const ModelMeta& meta) {
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, std::uint32_t(kind));
    put<std::uint32_t>(out, std::uint32_t(meta.mask.size()));
    for (int idx : meta.mask.kept) put<std::int32_t>(out, idx);
    put<double>(out, meta.norm_max_delta);
    put<double>(out, meta.window_len_s);
    put<std::uint8_t>(out, meta.use_ambient_temp ? 1 : 0);
}

ModelKind read_header(std::ifstream& in, const std::string& path, ModelMeta& meta) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a sohkit model file: " + path);
    const auto kind = take<std::uint32_t>(in, path);
    if (kind != 1 && kind != 2) throw DataError("unknown model kind in " + path);
    const auto mask_size = take<std::uint32_t>(in, path);
    if (mask_size > kNumFeatures) throw DataError("corrupt mask in " + path);
    meta.mask.kept.clear();
    for (std::uint32_t i = 0; i < mask_size; ++i)
        meta.mask.kept.push_back(take<std::int32_t>(in, path));
    meta.norm_max_delta = take<double>(in, path);
    meta.window_len_s = take<double>(in, path);
    meta.use_ambient_temp = take<std::uint8_t>(in, path) != 0;
    return ModelKind(kind);
}

}  // namespace

ModelKind model_kind_of(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + path);
    ModelMeta meta;
    return read_header(in, path, meta);
}

void save_gbt(const GbtEnsemble& ensemble, const ModelMeta& meta, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open model for writing: " + path);
    write_header(out, ModelKind::Gbt, meta);
    put<std::uint32_t>(out, std::uint32_t(ensemble.config.n_trees));
    put<std::uint32_t>(out, std::uint32_t(ensemble.config.max_depth));
    put<std::uint32_t>(out, std::uint32_t(ensemble.config.min_samples_leaf));
    put<float>(out, float(ensemble.config.learning_rate));
    put<float>(out, float(ensemble.base_prediction));
    put<std::uint32_t>(out, std::uint32_t(ensemble.trees.size()));
    for (const auto& tree : ensemble.trees) {
        put<std::uint32_t>(out, std::uint32_t(tree.nodes.size()));
        for (const auto& node : tree.nodes) {
            put<std::int32_t>(out, node.feature);
            put<float>(out, float(node.value));
            put<float>(out, float(node.gain));
            put<std::int32_t>(out, node.left);
            put<std::int32_t>(out, node.right);
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

GbtEnsemble load_gbt(const std::string& path, ModelMeta* meta_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + path);
    ModelMeta meta;
    if (read_header(in, path, meta) != ModelKind::Gbt)
        throw DataError("not a gbt model: " + path);

    GbtEnsemble ens;
    ens.mask = meta.mask;
    ens.config.n_trees = int(take<std::uint32_t>(in, path));
    ens.config.max_depth = int(take<std::uint32_t>(in, path));
    ens.config.min_samples_leaf = int(take<std::uint32_t>(in, path));
    ens.config.learning_rate = double(take<float>(in, path));
    ens.base_prediction = double(take<float>(in, path));
    const auto n_trees = take<std::uint32_t>(in, path);
    ens.trees.resize(n_trees);
    for (auto& tree : ens.trees) {
        const auto n_nodes = take<std::uint32_t>(in, path);
        tree.nodes.resize(n_nodes);
        for (auto& node : tree.nodes) {
            node.feature = take<std::int32_t>(in, path);
            node.value = double(take<float>(in, path));
            node.gain = double(take<float>(in, path));
            node.left = take<std::int32_t>(in, path);
            node.right = take<std::int32_t>(in, path);
            if (!node.is_leaf() &&
                (node.left < 0 || node.right < 0 || std::uint32_t(node.left) >= n_nodes ||
                 std::uint32_t(node.right) >= n_nodes))
                throw DataError("corrupt tree structure in " + path);
        }
    }
    if (meta_out) *meta_out = meta;
    return ens;
}

void save_mlp(const MlpNetwork& net, const ModelMeta& meta, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open model for writing: " + path);
    write_header(out, ModelKind::Mlp, meta);
    put<std::uint32_t>(out, std::uint32_t(net.input_dim));
    put<std::uint32_t>(out, std::uint32_t(net.layers.size()));
    for (const auto& layer : net.layers) {
        put<std::uint32_t>(out, std::uint32_t(layer.in));
        put<std::uint32_t>(out, std::uint32_t(layer.out));
        for (double w : layer.w) put<float>(out, float(w));
        for (double b : layer.b) put<float>(out, float(b));
    }
    if (!out) throw DataError("write failed: " + path);
}

MlpNetwork load_mlp(const std::string& path, ModelMeta* meta_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + path);
    ModelMeta meta;
    if (read_header(in, path, meta) != ModelKind::Mlp)
        throw DataError("not an mlp model: " + path);

    MlpNetwork net;
    net.input_dim = int(take<std::uint32_t>(in, path));
    const auto n_layers = take<std::uint32_t>(in, path);
    net.layers.resize(n_layers);
    for (auto& layer : net.layers) {
        layer.in = int(take<std::uint32_t>(in, path));
        layer.out = int(take<std::uint32_t>(in, path));
        if (layer.in < 1 || layer.out < 1) throw DataError("corrupt layer dims in " + path);
        layer.w.resize(std::size_t(layer.in) * std::size_t(layer.out));
        layer.b.resize(std::size_t(layer.out));
        for (double& w : layer.w) w = double(take<float>(in, path));
        for (double& b : layer.b) b = double(take<float>(in, path));
    }
    if (meta_out) *meta_out = meta;
    return net;
}

}  // namespace sohkit
