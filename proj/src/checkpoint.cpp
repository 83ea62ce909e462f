// SPDX-License-Identifier: Apache-2.0
#include "amd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "amd/config_io.hpp"

namespace amd {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'M', 'D', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

json meta_to_json(const CheckpointMeta& m) {
    return json{{"epoch", m.epoch},
                {"best_val_mse", m.best_val_mse},
                {"rng_state", m.rng_state},
                {"norm_mean", m.norm_stats.mean},
                {"norm_std", m.norm_stats.stddev},
                {"channel_names", m.channel_names},
                {"split", split_to_json(m.split)},
                {"has_header", m.has_header},
                {"date_column", m.date_column},
                {"stride", m.stride}};
}

CheckpointMeta meta_from_json(const json& j) {
    CheckpointMeta m;
    m.epoch = j.value("epoch", std::size_t{0});
    m.best_val_mse = j.value("best_val_mse", 0.0);
    m.rng_state = j.value("rng_state", std::string{});
    if (j.contains("norm_mean")) m.norm_stats.mean = j.at("norm_mean").get<std::vector<double>>();
    if (j.contains("norm_std")) m.norm_stats.stddev = j.at("norm_std").get<std::vector<double>>();
    if (j.contains("channel_names"))
        m.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    if (j.contains("split")) m.split = split_from_json(j.at("split"));
    m.has_header = j.value("has_header", true);
    m.date_column = j.value("date_column", -1);
    m.stride = j.value("stride", std::size_t{1});
    return m;
}

}  // namespace

void save_checkpoint(const AmdModel& model, const CheckpointMeta& meta, const std::string& path) {
    json manifest = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : model.params().items()) {
        manifest.push_back(json{{"name", name},
                                {"shape", t.shape()},
                                {"dtype", "f64"},
                                {"offset", offset},
                                {"count", t.size()}});
        offset += t.size() * sizeof(double);
    }
    json header{{"format_version", kFormatVersion},
                {"config", model_config_to_json(model.config())},
                {"params", manifest},
                {"meta", meta_to_json(meta)}};
    std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("checkpoint: cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, header_str.size());
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& [name, t] : model.params().items()) {
        const auto& v = t.values();
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    out.flush();
    if (!out) throw DataError("checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("checkpoint: bad magic in " + path);
    std::uint64_t header_len = read_u64(in);
    if (!in) throw DataError("checkpoint: truncated header length");
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw DataError("checkpoint: truncated header");

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: corrupt header: ") + e.what());
    }
    if (header.value("format_version", 0u) != kFormatVersion)
        throw DataError("checkpoint: unsupported format version " +
                        std::to_string(header.value("format_version", 0u)));

    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    // Validate the manifest tiles the payload exactly before building
    // anything.
    std::uint64_t expect_offset = 0;
    for (const auto& entry : header.at("params")) {
        std::uint64_t off = entry.at("offset").get<std::uint64_t>();
        std::uint64_t count = entry.at("count").get<std::uint64_t>();
        Shape shape = entry.at("shape").get<Shape>();
        if (entry.at("dtype").get<std::string>() != "f64")
            throw DataError("checkpoint: unsupported dtype for " +
                            entry.at("name").get<std::string>());
        if (off != expect_offset || shape_numel(shape) != count)
            throw DataError("checkpoint: manifest inconsistency at " +
                            entry.at("name").get<std::string>());
        expect_offset = off + count * sizeof(double);
    }
    if (expect_offset != payload.size())
        throw DataError("checkpoint: payload size " + std::to_string(payload.size()) +
                        " does not match manifest total " + std::to_string(expect_offset));

    ModelConfig cfg = model_config_from_json(header.at("config"));
    LoadedCheckpoint loaded{AmdModel(cfg), meta_from_json(header.at("meta"))};
    if (header.at("params").size() != loaded.model.params().items().size())
        throw DataError("checkpoint: manifest lists " +
                        std::to_string(header.at("params").size()) + " parameters, model has " +
                        std::to_string(loaded.model.params().items().size()));

    for (const auto& entry : header.at("params")) {
        std::string name = entry.at("name").get<std::string>();
        Tensor* t = loaded.model.params().find(name);
        if (!t)
            throw DataError("checkpoint: parameter " + name + " not present in rebuilt model");
        Shape shape = entry.at("shape").get<Shape>();
        if (t->shape() != shape)
            throw DataError("checkpoint: shape mismatch for " + name);
        std::uint64_t off = entry.at("offset").get<std::uint64_t>();
        std::memcpy(t->raw_data().data(), payload.data() + off, t->size() * sizeof(double));
    }
    return loaded;
}

}  // namespace amd
