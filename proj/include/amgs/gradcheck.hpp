// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "amgs/model.hpp"

namespace amgs {

/// A small random labeled batch with a masked copy, for gradient checks.
struct GradCheckInstance {
    ModelParams params;
    std::vector<Example> batch;
    MaskedBatch masked;
};

GradCheckInstance make_gradcheck_instance(const ModelDims& dims, std::size_t batch_size, std::size_t seq_len,
                                          Rng& rng);

struct GradCheckResult {
    double max_rel_error = 0.0;
    Block worst_block = Block::E;
    std::size_t worst_index = 0;
};

/// Compares grad_total against central differences of total_loss, entrywise,
/// with relative error |a - n| / max(|a|, |n|, floor).
GradCheckResult check_total_gradient(const GradCheckInstance& inst, double rho, double step = 1e-6,
                                     double floor = 1e-3);

}  // namespace amgs
