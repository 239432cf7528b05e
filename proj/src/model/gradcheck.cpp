// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace amgs {

GradCheckInstance make_gradcheck_instance(const ModelDims& dims, std::size_t batch_size, std::size_t seq_len,
                                          Rng& rng) {
    GradCheckInstance inst{ModelParams::random(dims, rng, 0.5), {}, {}};
    for (double& x : inst.params.values()) {
        x += 0.1 * rng.normal();  // non-zero biases too
    }
    const std::size_t regular = dims.vocab_size - static_cast<std::size_t>(kFirstRegularToken);
    for (std::size_t b = 0; b < batch_size; ++b) {
        Example ex;
        ex.label = static_cast<int>(b % dims.n_way);
        for (std::size_t i = 0; i < seq_len; ++i) {
            ex.tokens.push_back(static_cast<TokenId>(kFirstRegularToken + static_cast<TokenId>(rng.below(regular))));
        }
        inst.batch.push_back(std::move(ex));
    }
    MaskingConfig masking;
    masking.p_mask = 0.4;
    inst.masked = mask_batch(inst.batch, rng, masking, dims.vocab_size);
    return inst;
}

GradCheckResult check_total_gradient(const GradCheckInstance& inst, double rho, double step, double floor) {
    const auto analytic = grad_total(inst.params, inst.batch, inst.masked, rho).grad;
    ModelParams probe = inst.params;
    GradCheckResult result;
    auto values = probe.values();
    for (std::size_t b = 0; b < kNumBlocks; ++b) {
        const auto& range = probe.layout().range(static_cast<Block>(b));
        for (std::size_t i = range.offset; i < range.offset + range.length; ++i) {
            const double saved = values[i];
            values[i] = saved + step;
            const double up = total_loss(probe, inst.batch, inst.masked, rho).total;
            values[i] = saved - step;
            const double down = total_loss(probe, inst.batch, inst.masked, rho).total;
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic.values()[i];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            if (err > result.max_rel_error) {
                result = {err, static_cast<Block>(b), i - range.offset};
            }
        }
    }
    return result;
}

}  // namespace amgs
