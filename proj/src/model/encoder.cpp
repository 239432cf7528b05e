// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>

#include "amgs/error.hpp"
#include "amgs/kernels.hpp"
#include "amgs/model.hpp"

namespace amgs {
namespace {

/// Returns log-sum-exp and overwrites `logits` with softmax probabilities.
double softmax_in_place(std::span<double> logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& x : logits) {
        x = std::exp(x - peak);
        sum += x;
    }
    for (double& x : logits) {
        x /= sum;
    }
    return peak + std::log(sum);
}

void check_tokens(const ModelParams& params, std::span<const TokenId> sequence) {
    const auto vocab = static_cast<TokenId>(params.dims().vocab_size);
    for (TokenId t : sequence) {
        if (t < 0 || t >= vocab) {
            throw EncodingError("token id " + std::to_string(t) + " outside vocabulary of size " +
                                std::to_string(vocab));
        }
    }
}

void check_labels(const ModelParams& params, std::span<const Example> batch) {
    if (batch.empty()) {
        throw ValidationError("labeled batch is empty");
    }
    const auto n = static_cast<int>(params.dims().n_way);
    for (const auto& ex : batch) {
        if (ex.label < 0 || ex.label >= n) {
            throw ValidationError("label " + std::to_string(ex.label) + " outside 0.." + std::to_string(n - 1));
        }
    }
}

void classifier_logits(const ModelParams& params, std::span<const double> rep, std::span<double> out) {
    const auto c0 = params.block(Block::c0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = simd::dot(params.classifier_row(k), rep) + c0[k];
    }
}

void predictor_logits(const ModelParams& params, std::span<const double> hidden, std::span<double> out) {
    const auto p0 = params.block(Block::p0);
    for (std::size_t v = 0; v < out.size(); ++v) {
        out[v] = simd::dot(params.predictor_row(v), hidden) + p0[v];
    }
}

/// Pushes dL/d(sentence_rep) and per-position dL/d(h_i) back through the
/// encoder into the E, W1 and b1 blocks of `grad`. Either input may be empty.
void backprop_encoder(const ModelParams& params, std::span<const TokenId> sequence, const Encoding& enc,
                      std::span<const double> d_rep, std::span<const double> d_hidden, FlatGradient& grad) {
    const auto& dims = params.dims();
    const std::size_t de = dims.d_emb;
    const std::size_t dh = dims.d_h;
    const double inv_len = 1.0 / static_cast<double>(enc.real_tokens);

    auto g_e = grad.block(Block::E);
    auto g_w1 = grad.block(Block::W1);
    auto g_b1 = grad.block(Block::b1);

    std::vector<double> dz(dh);
    std::vector<double> dz_sum(dh, 0.0);
    std::vector<double> d_emb(de);
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (sequence[i] == kPadToken) {
            continue;
        }
        const auto h = enc.hidden(i, dh);
        for (std::size_t r = 0; r < dh; ++r) {
            double upstream = d_rep.empty() ? 0.0 : d_rep[r] * inv_len;
            if (!d_hidden.empty()) {
                upstream += d_hidden[i * dh + r];
            }
            dz[r] = upstream * (1.0 - h[r] * h[r]);
            dz_sum[r] += dz[r];
            g_b1[r] += dz[r];
        }
        const auto e_i = params.embedding(sequence[i]);
        std::fill(d_emb.begin(), d_emb.end(), 0.0);
        for (std::size_t r = 0; r < dh; ++r) {
            if (dz[r] == 0.0) {
                continue;
            }
            simd::axpy(dz[r], e_i, g_w1.subspan(r * 2 * de, de));
            simd::axpy(dz[r], params.hidden_row(r).first(de), d_emb);
        }
        simd::axpy(1.0, d_emb, g_e.subspan(static_cast<std::size_t>(sequence[i]) * de, de));
    }

    // The context c = mean(E[t_i]) feeds every position through the right
    // half of W1.
    std::vector<double> d_ctx(de, 0.0);
    for (std::size_t r = 0; r < dh; ++r) {
        if (dz_sum[r] == 0.0) {
            continue;
        }
        simd::axpy(dz_sum[r], enc.context, g_w1.subspan(r * 2 * de + de, de));
        simd::axpy(dz_sum[r], params.hidden_row(r).last(de), d_ctx);
    }
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (sequence[i] == kPadToken) {
            continue;
        }
        simd::axpy(inv_len, d_ctx, g_e.subspan(static_cast<std::size_t>(sequence[i]) * de, de));
    }
}

std::vector<std::vector<std::size_t>> targets_by_sequence(const MaskedBatch& masked) {
    std::vector<std::vector<std::size_t>> groups(masked.sequences.size());
    for (std::size_t t = 0; t < masked.targets.size(); ++t) {
        const auto& target = masked.targets[t];
        if (target.sequence >= masked.sequences.size() ||
            target.position >= masked.sequences[target.sequence].size()) {
            throw ValidationError("mask target refers to a position outside its sequence");
        }
        groups[target.sequence].push_back(t);
    }
    return groups;
}

double primary_part(const ModelParams& params, std::span<const Example> batch, double weight, FlatGradient* grad,
                    std::vector<double>* logits_out) {
    const std::size_t n = params.dims().n_way;
    const double scale = weight / static_cast<double>(batch.size());
    std::vector<double> logits(n);
    std::vector<double> d_rep(params.dims().d_h);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& ex = batch[b];
        const Encoding enc = encode(params, ex.tokens);
        classifier_logits(params, enc.sentence_rep, logits);
        if (logits_out != nullptr) {
            logits_out->insert(logits_out->end(), logits.begin(), logits.end());
        }
        const auto y = static_cast<std::size_t>(ex.label);
        const double true_logit = logits[y];
        // -log p_y from the log-sum-exp keeps precision when p_y underflows.
        loss_sum += softmax_in_place(logits) - true_logit;
        if (grad == nullptr || scale == 0.0) {
            continue;
        }
        logits[y] -= 1.0;
        auto g_c = grad->block(Block::C);
        auto g_c0 = grad->block(Block::c0);
        std::fill(d_rep.begin(), d_rep.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double dl = scale * logits[k];
            g_c0[k] += dl;
            simd::axpy(dl, enc.sentence_rep, g_c.subspan(k * params.dims().d_h, params.dims().d_h));
            simd::axpy(dl, params.classifier_row(k), d_rep);
        }
        backprop_encoder(params, ex.tokens, enc, d_rep, {}, *grad);
    }
    return loss_sum / static_cast<double>(batch.size());
}

double aux_part(const ModelParams& params, const MaskedBatch& masked, double weight, FlatGradient* grad) {
    const std::size_t vocab = params.dims().vocab_size;
    const std::size_t dh = params.dims().d_h;
    const double scale = weight / static_cast<double>(masked.targets.size());
    const auto groups = targets_by_sequence(masked);
    std::vector<double> logits(vocab);
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < masked.sequences.size(); ++s) {
        if (groups[s].empty()) {
            continue;
        }
        const auto& seq = masked.sequences[s];
        const Encoding enc = encode(params, seq);
        std::vector<double> d_hidden;
        if (grad != nullptr) {
            d_hidden.assign(seq.size() * dh, 0.0);
        }
        for (std::size_t t : groups[s]) {
            const auto& target = masked.targets[t];
            if (target.original == kPadToken || target.original == kMaskToken || target.original < 0 ||
                static_cast<std::size_t>(target.original) >= vocab) {
                throw ValidationError("mask target holds an invalid original token");
            }
            const auto h = enc.hidden(target.position, dh);
            predictor_logits(params, h, logits);
            const auto y = static_cast<std::size_t>(target.original);
            const double true_logit = logits[y];
            loss_sum += softmax_in_place(logits) - true_logit;
            if (grad == nullptr) {
                continue;
            }
            logits[y] -= 1.0;
            auto g_p = grad->block(Block::P);
            auto g_p0 = grad->block(Block::p0);
            auto d_h = std::span<double>(d_hidden).subspan(target.position * dh, dh);
            for (std::size_t v = 0; v < vocab; ++v) {
                const double dl = scale * logits[v];
                g_p0[v] += dl;
                simd::axpy(dl, h, g_p.subspan(v * dh, dh));
                simd::axpy(dl, params.predictor_row(v), d_h);
            }
        }
        if (grad != nullptr) {
            backprop_encoder(params, seq, enc, {}, d_hidden, *grad);
        }
    }
    return loss_sum / static_cast<double>(masked.targets.size());
}

}  // namespace

Encoding encode(const ModelParams& params, std::span<const TokenId> sequence) {
    check_tokens(params, sequence);
    const auto& dims = params.dims();
    const std::size_t de = dims.d_emb;
    const std::size_t dh = dims.d_h;

    Encoding enc;
    enc.length = sequence.size();
    enc.context.assign(de, 0.0);
    for (TokenId t : sequence) {
        if (t != kPadToken) {
            simd::axpy(1.0, params.embedding(t), enc.context);
            ++enc.real_tokens;
        }
    }
    if (enc.real_tokens == 0) {
        throw EncodingError("cannot encode a sequence with no non-PAD tokens");
    }
    const double inv_len = 1.0 / static_cast<double>(enc.real_tokens);
    for (double& x : enc.context) {
        x *= inv_len;
    }

    // The context half of W1 contributes the same pre-activation offset at
    // every position.
    std::vector<double> offset(dh);
    const auto b1 = params.block(Block::b1);
    for (std::size_t r = 0; r < dh; ++r) {
        offset[r] = simd::dot(params.hidden_row(r).last(de), enc.context) + b1[r];
    }

    enc.token_hiddens.assign(sequence.size() * dh, 0.0);
    enc.sentence_rep.assign(dh, 0.0);
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (sequence[i] == kPadToken) {
            continue;
        }
        const auto e_i = params.embedding(sequence[i]);
        double* h = enc.token_hiddens.data() + i * dh;
        for (std::size_t r = 0; r < dh; ++r) {
            h[r] = std::tanh(simd::dot(params.hidden_row(r).first(de), e_i) + offset[r]);
        }
        simd::axpy(1.0, std::span<const double>(h, dh), enc.sentence_rep);
    }
    for (double& x : enc.sentence_rep) {
        x *= inv_len;
    }
    return enc;
}

PrimaryResult primary_loss(const ModelParams& params, std::span<const Example> batch) {
    check_labels(params, batch);
    PrimaryResult out;
    out.logits.reserve(batch.size() * params.dims().n_way);
    out.loss = primary_part(params, batch, 1.0, nullptr, &out.logits);
    return out;
}

double aux_loss(const ModelParams& params, const MaskedBatch& masked) {
    if (masked.targets.empty()) {
        throw ValidationError("auxiliary loss needs at least one mask target");
    }
    return aux_part(params, masked, 1.0, nullptr);
}

namespace {

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw ValidationError("rho must lie in [0, 1]");
    }
}

}  // namespace

TotalLoss total_loss(const ModelParams& params, std::span<const Example> support, const MaskedBatch& masked,
                     double rho) {
    check_rho(rho);
    check_labels(params, support);
    TotalLoss out;
    out.primary = primary_part(params, support, 1.0, nullptr, nullptr);
    out.aux_skipped = rho == 0.0 || masked.targets.empty();
    if (!out.aux_skipped) {
        out.aux = aux_part(params, masked, 1.0, nullptr);
    }
    out.total = (1.0 - rho) * out.primary + (out.aux_skipped ? 0.0 : rho * out.aux);
    return out;
}

LossAndGradient grad_total(const ModelParams& params, std::span<const Example> support, const MaskedBatch& masked,
                           double rho) {
    check_rho(rho);
    check_labels(params, support);
    LossAndGradient out{TotalLoss{}, FlatGradient::zeros(params.layout())};
    out.loss.primary = primary_part(params, support, 1.0 - rho, &out.grad, nullptr);
    out.loss.aux_skipped = rho == 0.0 || masked.targets.empty();
    if (!out.loss.aux_skipped) {
        out.loss.aux = aux_part(params, masked, rho, &out.grad);
    }
    out.loss.total = (1.0 - rho) * out.loss.primary + (out.loss.aux_skipped ? 0.0 : rho * out.loss.aux);
    out.grad.require_finite("gradient");
    return out;
}

LossAndGradient grad_primary(const ModelParams& params, std::span<const Example> batch) {
    return grad_total(params, batch, MaskedBatch{}, 0.0);
}

int argmax(std::span<const double> logits) {
    int best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[static_cast<std::size_t>(best)]) {
            best = static_cast<int>(k);
        }
    }
    return best;
}

}  // namespace amgs
