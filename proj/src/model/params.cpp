// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "amgs/error.hpp"
#include "amgs/kernels.hpp"
#include "amgs/model.hpp"

namespace amgs {

std::string_view block_name(Block block) noexcept {
    switch (block) {
        case Block::E: return "E";
        case Block::W1: return "W1";
        case Block::b1: return "b1";
        case Block::C: return "C";
        case Block::c0: return "c0";
        case Block::P: return "P";
        case Block::p0: return "p0";
    }
    return "?";
}

Layout::Layout(const ModelDims& dims) : dims_(dims) {
    if (dims.vocab_size <= static_cast<std::size_t>(kFirstRegularToken) - 1 || dims.d_emb == 0 || dims.d_h == 0 ||
        dims.n_way == 0) {
        throw ValidationError("model dimensions must be positive and vocab must hold the reserved tokens");
    }
    const std::array<std::size_t, kNumBlocks> lengths = {
        dims.vocab_size * dims.d_emb,  // E
        dims.d_h * 2 * dims.d_emb,     // W1
        dims.d_h,                      // b1
        dims.n_way * dims.d_h,         // C
        dims.n_way,                    // c0
        dims.vocab_size * dims.d_h,    // P
        dims.vocab_size,               // p0
    };
    std::size_t offset = 0;
    for (std::size_t i = 0; i < kNumBlocks; ++i) {
        ranges_[i] = {offset, lengths[i]};
        offset += lengths[i];
    }
    total_ = offset;
}

FlatVector::FlatVector(Layout layout, std::vector<double> values) : layout_(layout), values_(std::move(values)) {
    if (values_.size() != layout_.total()) {
        throw ValidationError("flat vector length " + std::to_string(values_.size()) + " does not match layout total " +
                              std::to_string(layout_.total()));
    }
}

std::span<double> FlatVector::block(Block b) noexcept {
    const auto& r = layout_.range(b);
    return std::span<double>(values_).subspan(r.offset, r.length);
}

std::span<const double> FlatVector::block(Block b) const noexcept {
    const auto& r = layout_.range(b);
    return std::span<const double>(values_).subspan(r.offset, r.length);
}

std::vector<double> FlatVector::extract(std::initializer_list<Block> blocks) const {
    std::vector<double> out;
    for (Block b : blocks) {
        auto span = block(b);
        out.insert(out.end(), span.begin(), span.end());
    }
    return out;
}

void FlatVector::require_finite(std::string_view what) const {
    for (std::size_t i = 0; i < kNumBlocks; ++i) {
        const auto b = static_cast<Block>(i);
        for (double x : block(b)) {
            if (!std::isfinite(x)) {
                throw NumericalError(std::string(block_name(b)),
                                     "non-finite entry in block " + std::string(block_name(b)) + " of " +
                                         std::string(what));
            }
        }
    }
}

ModelParams ModelParams::random(const ModelDims& dims, Rng& rng, double emb_scale) {
    ModelParams p = zeros(dims);
    auto fill = [&](Block b, double scale) {
        for (double& x : p.block(b)) {
            x = scale * rng.normal();
        }
    };
    fill(Block::E, emb_scale);
    fill(Block::W1, 1.0 / std::sqrt(static_cast<double>(2 * dims.d_emb)));
    fill(Block::C, 1.0 / std::sqrt(static_cast<double>(dims.d_h)));
    fill(Block::P, 1.0 / std::sqrt(static_cast<double>(dims.d_h)));
    return p;
}

std::span<const double> ModelParams::embedding(TokenId token) const {
    const auto d = dims().d_emb;
    return block(Block::E).subspan(static_cast<std::size_t>(token) * d, d);
}

std::span<const double> ModelParams::hidden_row(std::size_t r) const {
    const auto w = 2 * dims().d_emb;
    return block(Block::W1).subspan(r * w, w);
}

std::span<const double> ModelParams::classifier_row(std::size_t k) const {
    const auto d = dims().d_h;
    return block(Block::C).subspan(k * d, d);
}

std::span<const double> ModelParams::predictor_row(std::size_t v) const {
    const auto d = dims().d_h;
    return block(Block::P).subspan(v * d, d);
}

bool FlatGradient::is_zero(Block b) const {
    for (double x : block(b)) {
        if (x != 0.0) {
            return false;
        }
    }
    return true;
}

void FlatGradient::add_scaled(double a, const FlatGradient& other) {
    if (!(layout_ == other.layout_)) {
        throw ValidationError("gradient layouts differ");
    }
    simd::axpy(a, other.values(), values());
}

}  // namespace amgs
