// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <ostream>

#include "amgs/harness.hpp"

namespace amgs {
namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string grid_value(const nlohmann::json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_float()) {
        return format_double(v.get<double>());
    }
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out += (i ? ";" : "") + grid_value(v[i]);
        }
        return out;
    }
    return v.dump();
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_step_jsonl(std::ostream& out, std::uint64_t seed, int epoch, const StepReport& report) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["epoch"] = epoch;
    j["step"] = report.step;
    j["method"] = std::string(to_string(report.method));
    auto column = [&](auto getter) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : report.episodes) {
            arr.push_back(getter(e));
        }
        return arr;
    };
    j["cos"] = column([](const EpisodeReport& e) { return e.cos_value; });
    j["gate_open"] = column([](const EpisodeReport& e) { return e.gate_open; });
    j["query_included"] = column([](const EpisodeReport& e) { return e.query_included; });
    j["support_loss"] = column([](const EpisodeReport& e) { return e.support_loss; });
    j["query_loss"] = column([](const EpisodeReport& e) { return e.query_loss; });
    j["support_grad_norm"] = column([](const EpisodeReport& e) { return e.support_grad_norm; });
    j["query_grad_norm"] = column([](const EpisodeReport& e) { return e.query_grad_norm; });
    j["aux_skipped"] = column([](const EpisodeReport& e) { return e.aux_skipped; });
    j["meta_grad_norm"] = report.meta_grad_norm;
    out << j.dump() << '\n';
}

void write_epochs_csv(std::ostream& out, const RunResult& run) {
    out << "seed,epoch,train_acc,val_acc\n";
    for (const auto& s : run.seeds) {
        for (const auto& e : s.epochs) {
            out << s.seed << ',' << e.epoch << ',' << format_double(e.train_acc) << ',' << format_double(e.val_acc)
                << '\n';
        }
    }
}

void write_summary_header(std::ostream& out, const std::vector<std::string>& grid_keys) {
    for (const auto& k : grid_keys) {
        out << csv_field(k) << ',';
    }
    out << "method,N,K,mean_acc,std,seeds\n";
}

void write_summary_row(std::ostream& out, const RunResult& run, const std::vector<nlohmann::json>& point) {
    for (const auto& v : point) {
        out << csv_field(grid_value(v)) << ',';
    }
    std::string seeds;
    for (std::size_t i = 0; i < run.config.seeds.size(); ++i) {
        seeds += (i ? ";" : "") + std::to_string(run.config.seeds[i]);
    }
    out << to_string(run.config.method) << ',' << run.config.n_way << ',' << run.config.k_shot << ','
        << format_double(run.mean_acc) << ',' << format_double(run.std_acc) << ',' << seeds << '\n';
}

void write_ablation_csv(std::ostream& out, const AblationResult& ablation) {
    write_summary_header(out, ablation.keys);
    for (const auto& row : ablation.rows) {
        write_summary_row(out, row.result, row.point);
    }
}

}  // namespace amgs
