#include "pomo/model/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "pomo/core/io.hpp"

namespace pomo {

namespace {

constexpr char kMagic[] = "POMOCK1";
constexpr std::size_t kMagicLen = 7;

nlohmann::ordered_json header_json(const ModelConfig& cfg, const ParamSet<float>& params,
                                   int epoch, std::uint64_t seed) {
    nlohmann::ordered_json h;
    h["format_version"] = 1;
    h["problem"] = to_string(cfg.problem);
    h["variant"] = to_string(cfg.variant);
    h["epoch"] = epoch;
    h["seed"] = seed;
    h["dtype"] = "f32";
    h["config"] = {{"d_h", cfg.d_h},
                   {"n_layers", cfg.n_layers},
                   {"n_heads", cfg.n_heads},
                   {"d_ff", cfg.d_ff},
                   {"logit_clip", cfg.logit_clip}};
    auto& tensors = h["tensors"];
    tensors = nlohmann::ordered_json::array();
    for (const auto& t : params.tensors())
        tensors.push_back({{"name", t.name}, {"rows", t.value.rows}, {"cols", t.value.cols}});
    return h;
}

struct ParsedHeader {
    CheckpointMeta meta;
    std::vector<std::array<int, 2>> shapes;
    std::vector<std::string> names;
    std::size_t blob_offset = 0;
};

ParsedHeader parse_header(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    ByteReader r(bytes.data(), bytes.size());
    char magic[kMagicLen];
    r.read_raw(magic, kMagicLen, "magic");
    if (std::string_view(magic, kMagicLen) != kMagic)
        throw FormatError("checkpoint " + path + ": bad magic (expected POMOCK1)", 0);
    const std::uint32_t header_len = r.u32("header length");
    const std::string header_text = r.str(header_len, "header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("checkpoint " + path + ": bad header JSON: " + e.what());
    }
    ParsedHeader out;
    try {
        if (h.at("format_version").get<int>() != 1)
            throw SchemaError("checkpoint " + path + ": unsupported format version");
        if (h.at("dtype").get<std::string>() != "f32")
            throw SchemaError("checkpoint " + path + ": unsupported dtype");
        out.meta.config.problem = problem_kind_from_string(h.at("problem").get<std::string>());
        out.meta.config.variant = variant_from_string(h.at("variant").get<std::string>());
        out.meta.epoch = h.at("epoch").get<int>();
        out.meta.seed = h.at("seed").get<std::uint64_t>();
        const auto& cfg = h.at("config");
        out.meta.config.d_h = cfg.at("d_h").get<int>();
        out.meta.config.n_layers = cfg.at("n_layers").get<int>();
        out.meta.config.n_heads = cfg.at("n_heads").get<int>();
        out.meta.config.d_ff = cfg.at("d_ff").get<int>();
        out.meta.config.logit_clip = cfg.at("logit_clip").get<double>();
        for (const auto& t : h.at("tensors")) {
            out.names.push_back(t.at("name").get<std::string>());
            out.shapes.push_back({t.at("rows").get<int>(), t.at("cols").get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("checkpoint " + path + ": header field error: " + e.what());
    }
    out.blob_offset = kMagicLen + 4 + header_len;
    return out;
}

void fill_params(const std::vector<std::uint8_t>& bytes, const ParsedHeader& h,
                 ParamSet<float>& params, const std::string& path) {
    if (static_cast<int>(h.names.size()) != params.count())
        throw ConfigError("checkpoint " + path + ": tensor count mismatch");
    ByteReader r(bytes.data(), bytes.size());
    r.str(h.blob_offset, "header skip");
    for (int i = 0; i < params.count(); ++i) {
        auto& t = params.tensor(i);
        if (h.names[i] != t.name)
            throw ConfigError("checkpoint " + path + ": tensor " + std::to_string(i) + " is '" +
                              h.names[i] + "', expected '" + t.name + "'");
        if (h.shapes[i][0] != t.value.rows || h.shapes[i][1] != t.value.cols)
            throw ConfigError("checkpoint " + path + ": shape mismatch for tensor " + t.name);
        for (float& v : t.value.data) v = r.f32(t.name.c_str());
    }
    if (r.remaining() != 0)
        throw FormatError("checkpoint " + path + ": trailing bytes", r.offset());
}

}  // namespace

void save_checkpoint(const std::string& path, const Network<float>& net, int epoch,
                     std::uint64_t seed) {
    const std::string header = header_json(net.config(), net.params(), epoch, seed).dump();
    ByteWriter w;
    w.raw(kMagic, kMagicLen);
    w.u32(static_cast<std::uint32_t>(header.size()));
    w.str(header);
    for (const auto& t : net.params().tensors())
        for (float v : t.value.data) w.f32(v);
    write_file_bytes(path, w.bytes());
}

CheckpointMeta peek_checkpoint(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    return parse_header(bytes, path).meta;
}

Network<float> load_checkpoint(const std::string& path, CheckpointMeta* meta) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    const ParsedHeader h = parse_header(bytes, path);
    Network<float> net(h.meta.config, h.meta.seed);
    fill_params(bytes, h, net.params(), path);
    if (meta) *meta = h.meta;
    return net;
}

void load_checkpoint_into(const std::string& path, Network<float>& net, CheckpointMeta* meta) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    const ParsedHeader h = parse_header(bytes, path);
    if (!(h.meta.config == net.config()))
        throw ConfigError("checkpoint " + path + ": model config does not match");
    fill_params(bytes, h, net.params(), path);
    if (meta) *meta = h.meta;
}

}  // namespace pomo
