// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/error.hpp"
#include "amgs/harness.hpp"

namespace amgs {

Grid parse_grid(const std::string& json_text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("invalid grid JSON: ") + e.what());
    }
    if (!j.is_object() || j.empty()) {
        throw ValidationError("grid must be a non-empty JSON object of value lists");
    }
    Grid grid;
    for (const auto& [key, values] : j.items()) {
        if (!values.is_array() || values.empty()) {
            throw ValidationError("grid entry '" + key + "' must be a non-empty list");
        }
        std::vector<nlohmann::json> vs;
        for (const auto& v : values) {
            vs.push_back(nlohmann::json::parse(v.dump()));
        }
        grid.emplace_back(key, std::move(vs));
    }
    return grid;
}

Grid grid_preset(const std::string& name) {
    using nlohmann::json;
    if (name == "table2") {
        return {{"method", {"amgs_que", "amgs_sup", "amgs_que_sup", "amgs"}}};
    }
    if (name == "table3") {
        return {{"use_mtp_train", {false, true}}, {"use_mtp_test", {false, true}}};
    }
    if (name == "table4") {
        return {{"p_mask", {0.15, 0.30, 0.45}},
                {"strategy", {json::array({1.0, 0.0, 0.0}), json::array({0.8, 0.1, 0.1})}}};
    }
    if (name == "table5") {
        return {{"rho", {0.9, 0.5, 1e-1, 1e-3, 1e-5, 0.0}}};
    }
    throw ValidationError("unknown grid preset: " + name);
}

std::vector<std::pair<std::vector<nlohmann::json>, ExperimentConfig>> expand_grid(const ExperimentConfig& base,
                                                                                   const Grid& grid) {
    for (const auto& [key, values] : grid) {
        if (!is_config_key(key)) {
            throw ValidationError("unknown grid key: " + key);
        }
        if (values.empty()) {
            throw ValidationError("grid entry '" + key + "' has no values");
        }
    }
    std::vector<std::pair<std::vector<nlohmann::json>, ExperimentConfig>> points;
    std::vector<std::size_t> index(grid.size(), 0);
    while (true) {
        ExperimentConfig cfg = base;
        std::vector<nlohmann::json> point;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto& value = grid[k].second[index[k]];
            set_config_field(cfg, grid[k].first, value);
            point.push_back(value);
        }
        points.emplace_back(std::move(point), std::move(cfg));
        // Odometer increment, last key fastest.
        std::size_t k = grid.size();
        while (k > 0) {
            --k;
            if (++index[k] < grid[k].second.size()) {
                break;
            }
            index[k] = 0;
            if (k == 0) {
                return points;
            }
        }
        if (grid.empty()) {
            return points;
        }
    }
}

AblationResult run_ablation(const ExperimentConfig& base, const Grid& grid, const Corpus& corpus,
                            const ClassSplit& split, const StepObserver& observer) {
    auto points = expand_grid(base, grid);
    AblationResult out;
    for (const auto& [key, values] : grid) {
        out.keys.push_back(key);
    }
    for (auto& [point, cfg] : points) {
        out.rows.push_back({point, run_training(cfg, corpus, split, observer)});
    }
    return out;
}

}  // namespace amgs
