// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "amgs/meta.hpp"

namespace amgs {

struct ExperimentConfig {
    MetaMethod method = MetaMethod::amgs;
    int n_way = 5;
    int k_shot = 1;
    int q_query = 25;                 // per class
    int inner_steps = 5;
    double alpha = 5e-5;
    double beta = 2e-5;
    double rho = 1e-3;
    double p_mask = 0.30;
    std::vector<double> strategy = {1.0, 0.0, 0.0};  // mask / same / random
    int d_emb = 32;
    int d_h = 32;
    int max_len = 32;
    int min_freq = 1;
    int episodes_per_epoch_train = 50;
    int episodes_per_epoch_val = 50;
    int test_episodes = 200;
    int patience = 20;
    int max_epochs = 100;
    int meta_batch = 1;
    int fine_tune_steps = -1;         // -1: same as inner_steps
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    SupportDirection support_direction = SupportDirection::accumulated;
    SupportTerm support_term = SupportTerm::first_step;
    double gate_threshold = 0.0;
    bool use_mtp_train = true;
    bool use_mtp_test = true;
    bool reptile_use_query = false;
    OptimizerKind optimizer = OptimizerKind::adam;
    double init_scale = 0.1;
    std::string corpus_path;
    std::string split_path;

    /// Throws ValidationError on any out-of-range field.
    void validate() const;

    int effective_fine_tune_steps() const { return fine_tune_steps < 0 ? inner_steps : fine_tune_steps; }
    MaskingConfig masking() const;
    /// Inner-loop hyperparameters; rho is zeroed when MTP is disabled for training.
    MetaHyper meta_hyper() const;
    double test_rho() const { return use_mtp_test ? rho : 0.0; }
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Unknown keys are rejected; missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets one field from a JSON value and re-validates. Throws ValidationError
/// for unknown keys or ill-typed values.
void set_config_field(ExperimentConfig& cfg, std::string_view key, const nlohmann::json& value);

/// Parses a `key=value` override; the value is read as JSON when it parses,
/// otherwise as a bare string.
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

bool is_config_key(std::string_view key);

}  // namespace amgs
