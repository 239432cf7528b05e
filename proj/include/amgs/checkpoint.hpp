// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

// Parameter checkpoint format: one line of JSON header terminated by '\n',
// followed by the flat parameter vector as little-endian IEEE-754 float64.
// When optimizer moments are present, the first and second moment vectors
// follow in the same layout. The header records the dimensions, the block
// layout, and the number of stored sections.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "amgs/model.hpp"

namespace amgs {

struct OptimizerMoments {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step_count = 0;
};

struct Checkpoint {
    ModelParams params;
    std::optional<OptimizerMoments> moments;
};

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const OptimizerMoments* moments = nullptr);

/// Validates header layout against the stored dimensions and the payload
/// length against the header. Throws IoError / ParseError / ValidationError.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace amgs
