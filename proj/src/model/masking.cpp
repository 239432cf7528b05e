// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "amgs/error.hpp"
#include "amgs/model.hpp"

namespace amgs {

void MaskingConfig::validate() const {
    if (!(p_mask > 0.0 && p_mask <= 1.0)) {
        throw ValidationError("p_mask must lie in (0, 1]");
    }
    if (mask_fraction < 0.0 || same_fraction < 0.0 || random_fraction < 0.0) {
        throw ValidationError("masking strategy fractions must be non-negative");
    }
    if (std::abs(mask_fraction + same_fraction + random_fraction - 1.0) > 1e-9) {
        throw ValidationError("masking strategy fractions must sum to 1");
    }
}

MaskedSequence mask_tokens(std::span<const TokenId> sequence, Rng& rng, const MaskingConfig& cfg,
                           std::size_t vocab_size) {
    cfg.validate();
    MaskedSequence out;
    out.tokens.assign(sequence.begin(), sequence.end());

    std::vector<std::size_t> maskable;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (sequence[i] != kPadToken && sequence[i] != kMaskToken) {
            maskable.push_back(i);
        }
    }
    if (maskable.empty()) {
        out.skipped = true;
        return out;
    }

    std::vector<std::size_t> selected;
    for (std::size_t pos : maskable) {
        if (rng.bernoulli(cfg.p_mask)) {
            selected.push_back(pos);
        }
    }
    if (selected.empty()) {
        selected.push_back(maskable[rng.below(maskable.size())]);
        out.forced = true;
    }

    const std::size_t regular = vocab_size > static_cast<std::size_t>(kFirstRegularToken)
                                    ? vocab_size - static_cast<std::size_t>(kFirstRegularToken)
                                    : 0;
    for (std::size_t pos : selected) {
        const TokenId original = sequence[pos];
        out.targets.push_back({0, pos, original});
        const double u = rng.uniform();
        if (u < cfg.mask_fraction) {
            out.tokens[pos] = kMaskToken;
        } else if (u < cfg.mask_fraction + cfg.same_fraction) {
            // unchanged
        } else {
            // Uniform over regular tokens other than the original.
            const bool original_regular = original >= kFirstRegularToken;
            const std::size_t choices = regular - (original_regular ? 1 : 0);
            if (choices == 0) {
                continue;
            }
            auto pick = static_cast<TokenId>(rng.below(choices)) + kFirstRegularToken;
            if (original_regular && pick >= original) {
                ++pick;
            }
            out.tokens[pos] = pick;
        }
    }
    return out;
}

MaskedBatch mask_batch(std::span<const Example> batch, Rng& rng, const MaskingConfig& cfg,
                       std::size_t vocab_size) {
    MaskedBatch out;
    out.sequences.reserve(batch.size());
    for (std::size_t s = 0; s < batch.size(); ++s) {
        auto masked = mask_tokens(batch[s].tokens, rng, cfg, vocab_size);
        if (masked.skipped) {
            out.skipped.push_back(s);
        }
        if (masked.forced) {
            ++out.forced;
        }
        for (auto target : masked.targets) {
            target.sequence = s;
            out.targets.push_back(target);
        }
        out.sequences.push_back(std::move(masked.tokens));
    }
    return out;
}

}  // namespace amgs
