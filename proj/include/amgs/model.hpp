// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

// Two-headed text encoder over a single flat parameter vector.
//
//   c   = mean_i E[t_i]                      (context, d_emb)
//   h_i = tanh(W1 [E[t_i]; c] + b1)          (token hidden, d_h)
//   r   = mean_i h_i                         (sentence representation)
//   classifier logits = C r + c0             (N classes)
//   predictor logits  = P h_i + p0           (vocab, at masked positions)
//
// Flat block order is fixed: E, W1, b1, C, c0, P, p0. The encoder plus
// classifier blocks (E..c0) form a contiguous prefix; the predictor blocks
// (P, p0) are only touched by the auxiliary objective.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "amgs/corpus.hpp"
#include "amgs/episode.hpp"
#include "amgs/rng.hpp"

namespace amgs {

struct ModelDims {
    std::size_t vocab_size = 0;
    std::size_t d_emb = 0;
    std::size_t d_h = 0;
    std::size_t n_way = 0;

    bool operator==(const ModelDims&) const = default;
};

enum class Block : std::size_t { E, W1, b1, C, c0, P, p0 };
inline constexpr std::size_t kNumBlocks = 7;

std::string_view block_name(Block block) noexcept;

struct BlockRange {
    std::size_t offset = 0;
    std::size_t length = 0;

    bool operator==(const BlockRange&) const = default;
};

/// Block offsets inside the flat parameter vector.
class Layout {
public:
    Layout() = default;
    explicit Layout(const ModelDims& dims);

    const ModelDims& dims() const noexcept { return dims_; }
    const BlockRange& range(Block block) const noexcept { return ranges_[static_cast<std::size_t>(block)]; }
    std::size_t total() const noexcept { return total_; }
    /// Length of the E..c0 prefix (encoder + classifier).
    std::size_t primary_length() const noexcept { return range(Block::P).offset; }

    bool operator==(const Layout& other) const { return dims_ == other.dims_; }

private:
    ModelDims dims_;
    std::array<BlockRange, kNumBlocks> ranges_{};
    std::size_t total_ = 0;
};

/// A flat vector paired with its layout. Base of ModelParams and FlatGradient.
class FlatVector {
public:
    FlatVector() = default;
    explicit FlatVector(Layout layout) : layout_(layout), values_(layout.total(), 0.0) {}
    FlatVector(Layout layout, std::vector<double> values);

    const Layout& layout() const noexcept { return layout_; }
    const ModelDims& dims() const noexcept { return layout_.dims(); }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> block(Block b) noexcept;
    std::span<const double> block(Block b) const noexcept;
    /// Concatenation of the named blocks, in the order given.
    std::vector<double> extract(std::initializer_list<Block> blocks) const;
    std::span<const double> primary_prefix() const noexcept {
        return std::span<const double>(values_).first(layout_.primary_length());
    }

    /// Throws NumericalError naming the first block holding a non-finite entry.
    void require_finite(std::string_view what) const;

    bool operator==(const FlatVector&) const = default;

protected:
    Layout layout_;
    std::vector<double> values_;
};

class ModelParams : public FlatVector {
public:
    using FlatVector::FlatVector;

    static ModelParams zeros(const ModelDims& dims) { return ModelParams(Layout(dims)); }
    /// Gaussian initialization: E ~ N(0, emb_scale^2); W1, C, P scaled by
    /// 1/sqrt(fan_in); biases zero.
    static ModelParams random(const ModelDims& dims, Rng& rng, double emb_scale = 0.1);

    std::span<const double> embedding(TokenId token) const;
    std::span<const double> hidden_row(std::size_t r) const;      // W1 row, length 2*d_emb
    std::span<const double> classifier_row(std::size_t k) const;  // C row, length d_h
    std::span<const double> predictor_row(std::size_t v) const;   // P row, length d_h
};

class FlatGradient : public FlatVector {
public:
    using FlatVector::FlatVector;

    static FlatGradient zeros(const Layout& layout) { return FlatGradient(layout); }

    bool is_zero(Block b) const;
    /// this += a * other
    void add_scaled(double a, const FlatGradient& other);
};

struct Encoding {
    std::size_t length = 0;                // sequence length including PAD
    std::vector<double> token_hiddens;     // length x d_h, PAD rows are zero
    std::vector<double> sentence_rep;      // d_h
    std::vector<double> context;           // d_emb
    std::size_t real_tokens = 0;           // non-PAD count

    std::span<const double> hidden(std::size_t pos, std::size_t d_h) const {
        return std::span<const double>(token_hiddens).subspan(pos * d_h, d_h);
    }
};

/// Throws EncodingError when the sequence has no non-PAD token.
Encoding encode(const ModelParams& params, std::span<const TokenId> sequence);

struct MaskTarget {
    std::size_t sequence = 0;
    std::size_t position = 0;
    TokenId original = 0;
};

/// Masked copies of a batch of sequences plus prediction targets.
struct MaskedBatch {
    std::vector<std::vector<TokenId>> sequences;
    std::vector<MaskTarget> targets;
    std::size_t forced = 0;                 // sequences where force-one fired
    std::vector<std::size_t> skipped;       // sequences with nothing to mask
};

struct MaskingConfig {
    double p_mask = 0.30;
    double mask_fraction = 1.0;     // replace with MASK
    double same_fraction = 0.0;     // keep the token
    double random_fraction = 0.0;   // replace with another regular token

    void validate() const;
};

struct MaskedSequence {
    std::vector<TokenId> tokens;
    std::vector<MaskTarget> targets;  // `sequence` field left as 0
    bool forced = false;
    bool skipped = false;
};

/// Selects each non-PAD token with probability p_mask; when nothing is
/// selected, one uniformly random non-PAD position is forced. Selected
/// tokens are replaced according to the strategy fractions.
MaskedSequence mask_tokens(std::span<const TokenId> sequence, Rng& rng, const MaskingConfig& cfg,
                           std::size_t vocab_size);

MaskedBatch mask_batch(std::span<const Example> batch, Rng& rng, const MaskingConfig& cfg,
                       std::size_t vocab_size);

struct PrimaryResult {
    double loss = 0.0;
    std::vector<double> logits;  // batch x N, row-major
};

/// Mean softmax cross-entropy of the classifier head. Throws ValidationError
/// on an out-of-range label or an empty batch.
PrimaryResult primary_loss(const ModelParams& params, std::span<const Example> batch);

/// Mean cross-entropy of the predictor head over all targets. Throws
/// ValidationError when there are no targets.
double aux_loss(const ModelParams& params, const MaskedBatch& masked);

struct TotalLoss {
    double total = 0.0;
    double primary = 0.0;
    double aux = 0.0;
    bool aux_skipped = false;
};

/// (1 - rho) * primary + rho * aux. The auxiliary term is not evaluated when
/// rho == 0 or the masked batch has no targets (reported as aux_skipped).
TotalLoss total_loss(const ModelParams& params, std::span<const Example> support, const MaskedBatch& masked,
                     double rho);

struct LossAndGradient {
    TotalLoss loss;
    FlatGradient grad;
};

/// Analytic gradient of total_loss with respect to every block.
LossAndGradient grad_total(const ModelParams& params, std::span<const Example> support, const MaskedBatch& masked,
                           double rho);

/// Analytic gradient of primary_loss; the P and p0 blocks are exactly zero.
LossAndGradient grad_primary(const ModelParams& params, std::span<const Example> batch);

/// Index of the largest logit, ties broken toward the lowest index.
int argmax(std::span<const double> logits);

}  // namespace amgs
