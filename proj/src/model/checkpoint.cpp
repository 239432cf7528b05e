// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "amgs/error.hpp"

namespace amgs {
namespace {

constexpr const char* kFormat = "amgs-params";
constexpr int kVersion = 1;

void write_doubles(std::ostream& out, std::span<const double> values) {
    for (double x : values) {
        auto bits = std::bit_cast<std::uint64_t>(x);
        if constexpr (std::endian::native == std::endian::big) {
            bits = __builtin_bswap64(bits);
        }
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.write(bytes, 8);
    }
}

std::vector<double> read_doubles(std::istream& in, std::size_t count) {
    std::vector<double> values(count);
    for (auto& x : values) {
        char bytes[8];
        if (!in.read(bytes, 8)) {
            throw ValidationError("checkpoint payload shorter than its header declares");
        }
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        if constexpr (std::endian::native == std::endian::big) {
            bits = __builtin_bswap64(bits);
        }
        x = std::bit_cast<double>(bits);
    }
    return values;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const OptimizerMoments* moments) {
    const auto& dims = params.dims();
    nlohmann::json header;
    header["format"] = kFormat;
    header["version"] = kVersion;
    header["vocab_size"] = dims.vocab_size;
    header["d_emb"] = dims.d_emb;
    header["d_h"] = dims.d_h;
    header["N"] = dims.n_way;
    header["total_length"] = params.size();
    nlohmann::json layout = nlohmann::json::array();
    for (std::size_t i = 0; i < kNumBlocks; ++i) {
        const auto b = static_cast<Block>(i);
        const auto& r = params.layout().range(b);
        layout.push_back({{"name", block_name(b)}, {"offset", r.offset}, {"length", r.length}});
    }
    header["layout"] = layout;
    header["sections"] = moments != nullptr ? nlohmann::json{"params", "adam_m", "adam_v"} : nlohmann::json{"params"};
    if (moments != nullptr) {
        if (moments->m.size() != params.size() || moments->v.size() != params.size()) {
            throw ValidationError("optimizer moments do not match the parameter layout");
        }
        header["step_count"] = moments->step_count;
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write checkpoint " + path.string());
    }
    out << header.dump() << '\n';
    write_doubles(out, params.values());
    if (moments != nullptr) {
        write_doubles(out, moments->m);
        write_doubles(out, moments->v);
    }
    if (!out) {
        throw IoError("write failure on checkpoint " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read checkpoint " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(1, "checkpoint has no header");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("invalid checkpoint header: ") + e.what());
    }
    if (header.value("format", "") != kFormat) {
        throw ValidationError("not an amgs parameter checkpoint");
    }
    ModelDims dims;
    std::size_t total = 0;
    std::vector<std::string> sections;
    try {
        dims.vocab_size = header.at("vocab_size").get<std::size_t>();
        dims.d_emb = header.at("d_emb").get<std::size_t>();
        dims.d_h = header.at("d_h").get<std::size_t>();
        dims.n_way = header.at("N").get<std::size_t>();
        total = header.at("total_length").get<std::size_t>();
        sections = header.at("sections").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, std::string("checkpoint header missing fields: ") + e.what());
    }
    const Layout layout(dims);
    if (layout.total() != total) {
        throw ValidationError("checkpoint total_length disagrees with its dimensions");
    }
    const auto& blocks = header.at("layout");
    if (!blocks.is_array() || blocks.size() != kNumBlocks) {
        throw ValidationError("checkpoint layout must list " + std::to_string(kNumBlocks) + " blocks");
    }
    for (std::size_t i = 0; i < kNumBlocks; ++i) {
        const auto b = static_cast<Block>(i);
        const auto& r = layout.range(b);
        if (blocks[i].value("name", "") != block_name(b) || blocks[i].value("offset", std::size_t{0}) != r.offset ||
            blocks[i].value("length", std::size_t{0}) != r.length) {
            throw ValidationError("checkpoint block layout mismatch at block " + std::string(block_name(b)));
        }
    }
    const bool has_moments = sections.size() == 3;
    if (sections.empty() || sections.front() != "params" || !(sections.size() == 1 || has_moments)) {
        throw ValidationError("unsupported checkpoint sections");
    }

    Checkpoint ck{ModelParams(layout, read_doubles(in, total)), std::nullopt};
    if (has_moments) {
        OptimizerMoments mom;
        mom.m = read_doubles(in, total);
        mom.v = read_doubles(in, total);
        mom.step_count = header.value("step_count", std::uint64_t{0});
        ck.moments = std::move(mom);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw ValidationError("checkpoint payload longer than its header declares");
    }
    return ck;
}

}  // namespace amgs
