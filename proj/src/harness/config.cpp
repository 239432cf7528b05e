// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/config.hpp"

#include <cmath>
#include <fstream>

#include "amgs/error.hpp"

namespace amgs {

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw ValidationError(std::string("invalid config: ") + what);
        }
    };
    require(n_way >= 1 && k_shot >= 1 && q_query >= 1, "N, K and q must be positive");
    require(inner_steps >= 1, "t (inner_steps) must be at least 1");
    require(alpha > 0.0 && beta > 0.0, "alpha and beta must be positive");
    require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
    require(p_mask > 0.0 && p_mask <= 1.0, "p_mask must lie in (0, 1]");
    require(strategy.size() == 3, "strategy must list three fractions (mask, same, random)");
    require(d_emb >= 1 && d_h >= 1 && max_len >= 1 && min_freq >= 0, "model sizes must be positive");
    require(episodes_per_epoch_train >= 1 && episodes_per_epoch_val >= 1 && test_episodes >= 1,
            "episode counts must be positive");
    require(patience >= 1, "patience must be at least 1");
    require(max_epochs >= 1, "max_epochs must be at least 1");
    require(meta_batch >= 1, "meta_batch must be at least 1");
    require(fine_tune_steps >= -1, "fine_tune_steps must be >= 0 (or -1 for t)");
    require(!seeds.empty(), "seeds must be non-empty");
    require(!std::isnan(gate_threshold), "gate_threshold must not be NaN");
    require(init_scale > 0.0, "init_scale must be positive");
    masking().validate();
}

MaskingConfig ExperimentConfig::masking() const {
    MaskingConfig m;
    m.p_mask = p_mask;
    if (strategy.size() == 3) {
        m.mask_fraction = strategy[0];
        m.same_fraction = strategy[1];
        m.random_fraction = strategy[2];
    }
    return m;
}

MetaHyper ExperimentConfig::meta_hyper() const {
    MetaHyper h;
    h.alpha = alpha;
    h.beta = beta;
    h.inner_steps = inner_steps;
    h.rho = use_mtp_train ? rho : 0.0;
    h.gate_threshold = gate_threshold;
    h.support_direction = support_direction;
    h.support_term = support_term;
    h.masking = masking();
    h.optimizer = optimizer;
    h.reptile_use_query = reptile_use_query;
    return h;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return {
        {"method", std::string(to_string(c.method))},
        {"N", c.n_way},
        {"K", c.k_shot},
        {"q", c.q_query},
        {"t", c.inner_steps},
        {"alpha", c.alpha},
        {"beta", c.beta},
        {"rho", c.rho},
        {"p_mask", c.p_mask},
        {"strategy", c.strategy},
        {"d_emb", c.d_emb},
        {"d_h", c.d_h},
        {"max_len", c.max_len},
        {"min_freq", c.min_freq},
        {"episodes_per_epoch_train", c.episodes_per_epoch_train},
        {"episodes_per_epoch_val", c.episodes_per_epoch_val},
        {"test_episodes", c.test_episodes},
        {"patience", c.patience},
        {"max_epochs", c.max_epochs},
        {"meta_batch", c.meta_batch},
        {"fine_tune_steps", c.fine_tune_steps},
        {"seeds", c.seeds},
        {"support_direction", std::string(to_string(c.support_direction))},
        {"support_term", std::string(to_string(c.support_term))},
        {"gate_threshold", c.gate_threshold},
        {"use_mtp_train", c.use_mtp_train},
        {"use_mtp_test", c.use_mtp_test},
        {"reptile_use_query", c.reptile_use_query},
        {"optimizer", std::string(to_string(c.optimizer))},
        {"init_scale", c.init_scale},
        {"corpus_path", c.corpus_path},
        {"split_path", c.split_path},
    };
}

bool is_config_key(std::string_view key) {
    static const nlohmann::json keys = to_json(ExperimentConfig{});
    return keys.contains(std::string(key));
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    ExperimentConfig c;
    for (const auto& [key, value] : j.items()) {
        if (!is_config_key(key)) {
            throw ValidationError("unknown config key: " + key);
        }
    }
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) {
                j.at(key).get_to(field);
            }
        };
        if (j.contains("method")) c.method = parse_meta_method(j.at("method").get<std::string>());
        get("N", c.n_way);
        get("K", c.k_shot);
        get("q", c.q_query);
        get("t", c.inner_steps);
        get("alpha", c.alpha);
        get("beta", c.beta);
        get("rho", c.rho);
        get("p_mask", c.p_mask);
        get("strategy", c.strategy);
        get("d_emb", c.d_emb);
        get("d_h", c.d_h);
        get("max_len", c.max_len);
        get("min_freq", c.min_freq);
        get("episodes_per_epoch_train", c.episodes_per_epoch_train);
        get("episodes_per_epoch_val", c.episodes_per_epoch_val);
        get("test_episodes", c.test_episodes);
        get("patience", c.patience);
        get("max_epochs", c.max_epochs);
        get("meta_batch", c.meta_batch);
        get("fine_tune_steps", c.fine_tune_steps);
        get("seeds", c.seeds);
        if (j.contains("support_direction")) {
            c.support_direction = parse_support_direction(j.at("support_direction").get<std::string>());
        }
        if (j.contains("support_term")) {
            c.support_term = parse_support_term(j.at("support_term").get<std::string>());
        }
        get("gate_threshold", c.gate_threshold);
        get("use_mtp_train", c.use_mtp_train);
        get("use_mtp_test", c.use_mtp_test);
        get("reptile_use_query", c.reptile_use_query);
        if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
        get("init_scale", c.init_scale);
        get("corpus_path", c.corpus_path);
        get("split_path", c.split_path);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("ill-typed config value: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("invalid config JSON: ") + e.what());
    }
    auto cfg = config_from_json(j);
    // Relative data paths resolve against the config file's directory.
    const auto base = path.parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) {
            p = (base / p).lexically_normal().string();
        }
    };
    resolve(cfg.corpus_path);
    resolve(cfg.split_path);
    return cfg;
}

void set_config_field(ExperimentConfig& cfg, std::string_view key, const nlohmann::json& value) {
    if (!is_config_key(key)) {
        throw ValidationError("unknown config key: " + std::string(key));
    }
    auto j = to_json(cfg);
    j[std::string(key)] = value;
    cfg = config_from_json(j);
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ValidationError("override must look like key=value: " + std::string(assignment));
    }
    const auto key = assignment.substr(0, eq);
    const std::string raw(assignment.substr(eq + 1));
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    set_config_field(cfg, key, value);
}

}  // namespace amgs
