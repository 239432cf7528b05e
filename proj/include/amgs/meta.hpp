// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

// Meta-learning steps over a shared initialization psi.
//
// Adaptive step (meta_step): for each episode the initialization is adapted
// on the support set with plain gradient descent on the mixed
// classification + masked-token loss. The classification gradient of the
// query set is then taken at the adapted parameters and compared with the
// support direction by cosine similarity over the encoder and classifier
// blocks. The episode contributes
//
//     G_i = g_support + [cos >= threshold] * g_query
//
// and psi takes one optimizer step along sum_i G_i. The query gradient is
// first-order: the adapted parameters are treated as constants of psi.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "amgs/episode.hpp"
#include "amgs/model.hpp"
#include "amgs/rng.hpp"

namespace amgs {

enum class MetaMethod { amgs, fomaml, reptile, amgs_que, amgs_sup, amgs_que_sup };

std::string_view to_string(MetaMethod method) noexcept;
MetaMethod parse_meta_method(std::string_view name);

/// Which vector stands for the support side in the cosine test.
enum class SupportDirection {
    accumulated,  // (psi - adapted) / alpha, the sum of all inner steps
    first_step,   // grad of the total loss at psi
};

/// Which support gradient enters the meta-gradient.
enum class SupportTerm {
    first_step,   // grad of the total loss at psi
    accumulated,  // (psi - adapted) / alpha
};

enum class OptimizerKind { adam, sgd };

std::string_view to_string(SupportDirection d) noexcept;
std::string_view to_string(SupportTerm t) noexcept;
std::string_view to_string(OptimizerKind k) noexcept;
SupportDirection parse_support_direction(std::string_view name);
SupportTerm parse_support_term(std::string_view name);
OptimizerKind parse_optimizer(std::string_view name);

struct MetaHyper {
    double alpha = 5e-5;            // inner learning rate
    double beta = 2e-5;             // meta learning rate
    int inner_steps = 5;
    double rho = 1e-3;              // auxiliary weight
    double gate_threshold = 0.0;
    double gate_eps = 1e-12;
    SupportDirection support_direction = SupportDirection::accumulated;
    SupportTerm support_term = SupportTerm::first_step;
    MaskingConfig masking;
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool reptile_use_query = false;

    void validate() const;
};

struct MetaState {
    ModelParams psi;
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step_count = 0;
    MetaHyper hyper;

    MetaState(ModelParams init, MetaHyper h);
};

/// One optimizer step of psi along `meta_grad` (Adam or plain SGD).
void apply_meta_update(MetaState& state, const FlatGradient& meta_grad);

struct InnerLoopResult {
    ModelParams adapted;
    FlatGradient first_grad;        // grad of the total loss at psi
    FlatGradient support_direction; // per SupportDirection
    TotalLoss first_loss;
    std::vector<double> loss_trace; // total loss before each step, length t
};

/// `steps` plain gradient-descent steps on the total loss over the support
/// set, starting from psi. With alpha == 0 the accumulated direction is
/// defined by its limit, steps * first_grad. Throws InnerLoopError carrying
/// the 1-based step on a non-finite loss or gradient.
InnerLoopResult inner_adapt(const ModelParams& psi, std::span<const Example> support, const MaskedBatch& masked,
                            double alpha, int steps, double rho,
                            SupportDirection direction = SupportDirection::accumulated);

/// Draws the episode's support mask from `rng`, then adapts.
InnerLoopResult inner_adapt(const ModelParams& psi, const Episode& episode, const MetaHyper& hyper, Rng& rng);

struct GateDecision {
    double cos_value = 0.0;
    bool open = false;
};

/// Cosine over the encoder + classifier blocks. A subset norm below `eps`
/// yields cos = 0. Open iff cos >= threshold.
GateDecision gate(const FlatGradient& g_support, const FlatGradient& g_query, double threshold, double eps = 1e-12);

enum class QueryMode { gated, always, never };

/// Strategy knobs of the adaptive step; the defaults are the full method.
struct AmgsOptions {
    bool include_support = true;
    QueryMode query = QueryMode::gated;
};

struct EpisodeReport {
    double cos_value = 0.0;
    bool gate_open = false;
    bool has_query = false;
    bool query_included = false;
    bool aux_skipped = false;
    double support_loss = 0.0;   // total loss at psi
    double query_loss = 0.0;     // classification loss at the adapted params
    double support_grad_norm = 0.0;
    double query_grad_norm = 0.0;
    std::size_t mask_targets = 0;
};

struct StepReport {
    std::uint64_t step = 0;
    MetaMethod method = MetaMethod::amgs;
    std::vector<EpisodeReport> episodes;
    double meta_grad_norm = 0.0;
};

/// Adaptive gated meta-update over a batch of episodes. An episode with an
/// empty query set contributes its support term only.
StepReport meta_step(MetaState& state, std::span<const Episode> batch, Rng& rng, AmgsOptions options = {});

/// First-order MAML: inner loop on the classification loss only; the
/// meta-gradient is the query gradient at the adapted parameters.
StepReport fomaml_step(MetaState& state, std::span<const Episode> batch, Rng& rng);

/// Reptile: the meta-direction is (psi - adapted) / alpha. The inner loop
/// uses the support set, or support and query when hyper.reptile_use_query.
StepReport reptile_step(MetaState& state, std::span<const Episode> batch, Rng& rng);

/// Dispatches one training step of the named method.
StepReport train_step(MetaMethod method, MetaState& state, std::span<const Episode> batch, Rng& rng);

struct MetaTestResult {
    double accuracy = 0.0;
    std::vector<int> predictions;
    ModelParams adapted;
};

/// Fine-tunes a copy of psi on the support set (total loss when use_mtp,
/// classification loss otherwise) and classifies the query set. psi is not
/// modified.
MetaTestResult meta_test(const ModelParams& psi, const Episode& episode, int fine_tune_steps, bool use_mtp,
                         double alpha, double rho, const MaskingConfig& masking, Rng& rng);

/// Arg-max class per example, ties to the lowest label.
std::vector<int> predict(const ModelParams& params, std::span<const Example> batch);

}  // namespace amgs
