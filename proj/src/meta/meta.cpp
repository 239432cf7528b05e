// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/meta.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amgs/error.hpp"
#include "amgs/kernels.hpp"

namespace amgs {
namespace {

double norm(std::span<const double> x) { return std::sqrt(simd::squared_norm(x)); }

/// (psi - adapted) / alpha, or steps * first_grad when alpha == 0.
FlatGradient accumulated_direction(const ModelParams& psi, const ModelParams& adapted, double alpha, int steps,
                                   const FlatGradient& first_grad) {
    FlatGradient dir = FlatGradient::zeros(psi.layout());
    if (alpha == 0.0) {
        simd::axpy(static_cast<double>(steps), first_grad.values(), dir.values());
        return dir;
    }
    auto out = dir.values();
    const auto a = psi.values();
    const auto b = adapted.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (a[i] - b[i]) / alpha;
    }
    return dir;
}

void finish_step(MetaState& state, StepReport& report, const FlatGradient& meta_grad) {
    meta_grad.require_finite("meta-gradient");
    report.meta_grad_norm = norm(meta_grad.values());
    apply_meta_update(state, meta_grad);
    report.step = state.step_count;
}

void require_batch(std::span<const Episode> batch) {
    if (batch.empty()) {
        throw ValidationError("meta step needs at least one episode");
    }
}

}  // namespace

std::string_view to_string(MetaMethod method) noexcept {
    switch (method) {
        case MetaMethod::amgs: return "amgs";
        case MetaMethod::fomaml: return "fomaml";
        case MetaMethod::reptile: return "reptile";
        case MetaMethod::amgs_que: return "amgs_que";
        case MetaMethod::amgs_sup: return "amgs_sup";
        case MetaMethod::amgs_que_sup: return "amgs_que_sup";
    }
    return "amgs";
}

MetaMethod parse_meta_method(std::string_view name) {
    for (auto m : {MetaMethod::amgs, MetaMethod::fomaml, MetaMethod::reptile, MetaMethod::amgs_que,
                   MetaMethod::amgs_sup, MetaMethod::amgs_que_sup}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ValidationError("unknown method: " + std::string(name));
}

std::string_view to_string(SupportDirection d) noexcept {
    return d == SupportDirection::accumulated ? "accumulated" : "first_step";
}

std::string_view to_string(SupportTerm t) noexcept {
    return t == SupportTerm::accumulated ? "accumulated" : "first_step";
}

std::string_view to_string(OptimizerKind k) noexcept { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

SupportDirection parse_support_direction(std::string_view name) {
    if (name == "accumulated") return SupportDirection::accumulated;
    if (name == "first_step") return SupportDirection::first_step;
    throw ValidationError("unknown support_direction: " + std::string(name));
}

SupportTerm parse_support_term(std::string_view name) {
    if (name == "accumulated") return SupportTerm::accumulated;
    if (name == "first_step") return SupportTerm::first_step;
    throw ValidationError("unknown support_term: " + std::string(name));
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "adam") return OptimizerKind::adam;
    if (name == "sgd") return OptimizerKind::sgd;
    throw ValidationError("unknown optimizer: " + std::string(name));
}

void MetaHyper::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw ValidationError("learning rates alpha and beta must be positive");
    }
    if (inner_steps < 1) {
        throw ValidationError("inner_steps must be at least 1");
    }
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw ValidationError("rho must lie in [0, 1]");
    }
    if (std::isnan(gate_threshold)) {
        throw ValidationError("gate_threshold must not be NaN");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0)) {
        throw ValidationError("Adam coefficients out of range");
    }
    masking.validate();
}

MetaState::MetaState(ModelParams init, MetaHyper h)
    : psi(std::move(init)), m(psi.size(), 0.0), v(psi.size(), 0.0), hyper(h) {}

void apply_meta_update(MetaState& state, const FlatGradient& meta_grad) {
    if (!(meta_grad.layout() == state.psi.layout())) {
        throw ValidationError("meta-gradient layout differs from psi");
    }
    ++state.step_count;
    const auto& h = state.hyper;
    if (h.optimizer == OptimizerKind::sgd) {
        simd::axpy(-h.beta, meta_grad.values(), state.psi.values());
        return;
    }
    const double t = static_cast<double>(state.step_count);
    const simd::AdamCoefficients c{h.beta,
                                   h.adam_beta1,
                                   h.adam_beta2,
                                   h.adam_eps,
                                   1.0 - std::pow(h.adam_beta1, t),
                                   1.0 - std::pow(h.adam_beta2, t)};
    simd::adam_update(state.psi.values(), state.m, state.v, meta_grad.values(), c);
}

InnerLoopResult inner_adapt(const ModelParams& psi, std::span<const Example> support, const MaskedBatch& masked,
                            double alpha, int steps, double rho, SupportDirection direction) {
    if (steps < 0 || !(alpha >= 0.0)) {
        throw ValidationError("inner loop needs steps >= 0 and alpha >= 0");
    }
    InnerLoopResult out{psi, FlatGradient::zeros(psi.layout()), FlatGradient::zeros(psi.layout()), {}, {}};
    out.loss_trace.reserve(static_cast<std::size_t>(steps));
    for (int s = 1; s <= steps; ++s) {
        LossAndGradient lg;
        try {
            lg = grad_total(out.adapted, support, masked, rho);
        } catch (const NumericalError& e) {
            throw InnerLoopError(s, e.what());
        }
        if (!std::isfinite(lg.loss.total)) {
            throw InnerLoopError(s, "non-finite support loss");
        }
        out.loss_trace.push_back(lg.loss.total);
        if (s == 1) {
            out.first_loss = lg.loss;
            out.first_grad = lg.grad;
        }
        simd::axpy(-alpha, lg.grad.values(), out.adapted.values());
    }
    if (steps == 0) {
        out.first_loss = total_loss(psi, support, masked, rho);
        return out;
    }
    out.support_direction = direction == SupportDirection::first_step
                                ? out.first_grad
                                : accumulated_direction(psi, out.adapted, alpha, steps, out.first_grad);
    return out;
}

InnerLoopResult inner_adapt(const ModelParams& psi, const Episode& episode, const MetaHyper& hyper, Rng& rng) {
    const auto masked = mask_batch(episode.support, rng, hyper.masking, psi.dims().vocab_size);
    return inner_adapt(psi, episode.support, masked, hyper.alpha, hyper.inner_steps, hyper.rho,
                       hyper.support_direction);
}

GateDecision gate(const FlatGradient& g_support, const FlatGradient& g_query, double threshold, double eps) {
    if (!(g_support.layout() == g_query.layout())) {
        throw ValidationError("gate operands have different layouts");
    }
    const auto a = g_support.primary_prefix();
    const auto b = g_query.primary_prefix();
    const double na = norm(a);
    const double nb = norm(b);
    GateDecision out;
    if (na < eps || nb < eps) {
        out.cos_value = 0.0;
    } else {
        out.cos_value = std::clamp(simd::dot(a, b) / (na * nb), -1.0, 1.0);
    }
    out.open = out.cos_value >= threshold;
    return out;
}

StepReport meta_step(MetaState& state, std::span<const Episode> batch, Rng& rng, AmgsOptions options) {
    require_batch(batch);
    const auto& h = state.hyper;
    h.validate();
    StepReport report;
    FlatGradient meta_grad = FlatGradient::zeros(state.psi.layout());
    for (const auto& ep : batch) {
        // The mask is drawn even when rho == 0 so the random stream does not
        // depend on rho.
        const auto masked = mask_batch(ep.support, rng, h.masking, state.psi.dims().vocab_size);
        const auto inner = inner_adapt(state.psi, ep.support, masked, h.alpha, h.inner_steps, h.rho,
                                       h.support_direction);
        EpisodeReport er;
        er.support_loss = inner.first_loss.total;
        er.aux_skipped = inner.first_loss.aux_skipped;
        er.mask_targets = masked.targets.size();
        er.support_grad_norm = norm(inner.support_direction.primary_prefix());

        if (options.include_support) {
            if (h.support_term == SupportTerm::first_step) {
                meta_grad.add_scaled(1.0, inner.first_grad);
            } else {
                meta_grad.add_scaled(1.0, accumulated_direction(state.psi, inner.adapted, h.alpha, h.inner_steps,
                                                                inner.first_grad));
            }
        }

        er.has_query = !ep.query.empty();
        if (er.has_query && options.query != QueryMode::never) {
            const auto query = grad_primary(inner.adapted, ep.query);
            er.query_loss = query.loss.primary;
            er.query_grad_norm = norm(query.grad.primary_prefix());
            const auto decision = gate(inner.support_direction, query.grad, h.gate_threshold, h.gate_eps);
            er.cos_value = decision.cos_value;
            er.gate_open = decision.open;
            er.query_included = options.query == QueryMode::always || decision.open;
            if (er.query_included) {
                meta_grad.add_scaled(1.0, query.grad);
            }
        }
        report.episodes.push_back(er);
    }
    finish_step(state, report, meta_grad);
    return report;
}

StepReport fomaml_step(MetaState& state, std::span<const Episode> batch, Rng& /*rng*/) {
    require_batch(batch);
    const auto& h = state.hyper;
    h.validate();
    StepReport report;
    report.method = MetaMethod::fomaml;
    FlatGradient meta_grad = FlatGradient::zeros(state.psi.layout());
    for (const auto& ep : batch) {
        if (ep.query.empty()) {
            throw ValidationError("first-order MAML needs a query set");
        }
        const auto inner = inner_adapt(state.psi, ep.support, MaskedBatch{}, h.alpha, h.inner_steps, 0.0,
                                       h.support_direction);
        const auto query = grad_primary(inner.adapted, ep.query);
        EpisodeReport er;
        er.has_query = true;
        er.query_included = true;
        er.aux_skipped = true;
        er.support_loss = inner.first_loss.total;
        er.query_loss = query.loss.primary;
        er.support_grad_norm = norm(inner.support_direction.primary_prefix());
        er.query_grad_norm = norm(query.grad.primary_prefix());
        er.cos_value = gate(inner.support_direction, query.grad, h.gate_threshold, h.gate_eps).cos_value;
        er.gate_open = true;
        meta_grad.add_scaled(1.0, query.grad);
        report.episodes.push_back(er);
    }
    finish_step(state, report, meta_grad);
    return report;
}

StepReport reptile_step(MetaState& state, std::span<const Episode> batch, Rng& /*rng*/) {
    require_batch(batch);
    const auto& h = state.hyper;
    h.validate();
    StepReport report;
    report.method = MetaMethod::reptile;
    FlatGradient meta_grad = FlatGradient::zeros(state.psi.layout());
    for (const auto& ep : batch) {
        std::vector<Example> data(ep.support.begin(), ep.support.end());
        if (h.reptile_use_query) {
            data.insert(data.end(), ep.query.begin(), ep.query.end());
        }
        const auto inner = inner_adapt(state.psi, data, MaskedBatch{}, h.alpha, h.inner_steps, 0.0,
                                       SupportDirection::accumulated);
        EpisodeReport er;
        er.has_query = !ep.query.empty();
        er.query_included = h.reptile_use_query && er.has_query;
        er.aux_skipped = true;
        er.support_loss = inner.first_loss.total;
        er.support_grad_norm = norm(inner.support_direction.primary_prefix());
        meta_grad.add_scaled(1.0, inner.support_direction);
        report.episodes.push_back(er);
    }
    finish_step(state, report, meta_grad);
    return report;
}

StepReport train_step(MetaMethod method, MetaState& state, std::span<const Episode> batch, Rng& rng) {
    StepReport report;
    switch (method) {
        case MetaMethod::amgs: report = meta_step(state, batch, rng, {true, QueryMode::gated}); break;
        case MetaMethod::amgs_que: report = meta_step(state, batch, rng, {false, QueryMode::always}); break;
        case MetaMethod::amgs_sup: report = meta_step(state, batch, rng, {true, QueryMode::never}); break;
        case MetaMethod::amgs_que_sup: report = meta_step(state, batch, rng, {true, QueryMode::always}); break;
        case MetaMethod::fomaml: return fomaml_step(state, batch, rng);
        case MetaMethod::reptile: return reptile_step(state, batch, rng);
    }
    report.method = method;
    return report;
}

std::vector<int> predict(const ModelParams& params, std::span<const Example> batch) {
    std::vector<int> out;
    out.reserve(batch.size());
    std::vector<double> logits(params.dims().n_way);
    const auto c0 = params.block(Block::c0);
    for (const auto& ex : batch) {
        const auto enc = encode(params, ex.tokens);
        for (std::size_t k = 0; k < logits.size(); ++k) {
            logits[k] = simd::dot(params.classifier_row(k), enc.sentence_rep) + c0[k];
        }
        out.push_back(argmax(logits));
    }
    return out;
}

MetaTestResult meta_test(const ModelParams& psi, const Episode& episode, int fine_tune_steps, bool use_mtp,
                         double alpha, double rho, const MaskingConfig& masking, Rng& rng) {
    if (episode.query.empty()) {
        throw ValidationError("meta-test episode has no query set");
    }
    const auto masked = mask_batch(episode.support, rng, masking, psi.dims().vocab_size);
    auto inner = inner_adapt(psi, episode.support, masked, alpha, fine_tune_steps, use_mtp ? rho : 0.0,
                             SupportDirection::first_step);
    MetaTestResult out;
    out.predictions = predict(inner.adapted, episode.query);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < episode.query.size(); ++i) {
        if (out.predictions[i] == episode.query[i].label) {
            ++correct;
        }
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(episode.query.size());
    out.adapted = std::move(inner.adapted);
    return out;
}

}  // namespace amgs
