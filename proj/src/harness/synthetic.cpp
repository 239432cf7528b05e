// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>

#include "amgs/error.hpp"
#include "amgs/harness.hpp"

namespace amgs {

void SyntheticSpec::validate() const {
    if (num_classes < 1 || docs_per_class < 1 || tokens_per_class < 1) {
        throw ValidationError("synthetic corpus needs positive class, document and token counts");
    }
    if (!(overlap >= 0.0 && overlap <= 1.0)) {
        throw ValidationError("overlap must lie in [0, 1]");
    }
    if (min_len < 1 || max_len < min_len) {
        throw ValidationError("document length range must satisfy 1 <= min_len <= max_len");
    }
}

std::string synthetic_class_name(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "class_%03d", k);
    return buf;
}

void gen_synthetic(const SyntheticSpec& spec, std::ostream& out) {
    spec.validate();
    Rng rng(spec.seed);
    const auto pool = static_cast<std::size_t>(spec.tokens_per_class);
    const auto span = static_cast<std::size_t>(spec.max_len - spec.min_len + 1);
    for (int k = 0; k < spec.num_classes; ++k) {
        for (int d = 0; d < spec.docs_per_class; ++d) {
            const auto len = static_cast<std::size_t>(spec.min_len) + rng.below(span);
            std::string text;
            for (std::size_t i = 0; i < len; ++i) {
                // Draw the pool first so overlap = 1 never touches the private pools.
                const bool shared = rng.uniform() < spec.overlap;
                const auto j = rng.below(pool);
                if (!text.empty()) {
                    text += ' ';
                }
                text += shared ? "s" + std::to_string(j) : "c" + std::to_string(k) + "w" + std::to_string(j);
            }
            nlohmann::ordered_json row;
            row["text"] = text;
            row["label"] = synthetic_class_name(k);
            out << row.dump() << '\n';
        }
    }
}

void gen_synthetic(const SyntheticSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write corpus file " + path.string());
    }
    gen_synthetic(spec, out);
    if (!out) {
        throw IoError("write failure on corpus file " + path.string());
    }
}

void write_split_file(const std::filesystem::path& path, const std::vector<std::string>& train,
                      const std::vector<std::string>& val, const std::vector<std::string>& test) {
    nlohmann::ordered_json j;
    j["train"] = train;
    j["val"] = val;
    j["test"] = test;
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write split file " + path.string());
    }
    out << j.dump(2) << '\n';
}

void export_embeddings(const ModelParams& psi, const Episode& episode, const Corpus& corpus, int fine_tune_steps,
                       bool use_mtp, double alpha, double rho, const MaskingConfig& masking, Rng& rng,
                       std::ostream& out) {
    const auto tuned = meta_test(psi, episode, fine_tune_steps, use_mtp, alpha, rho, masking, rng);
    const std::size_t dh = psi.dims().d_h;
    for (std::size_t r = 0; r < dh; ++r) {
        out << "rep_" << r << ',';
    }
    out << "local_label,class_name\n";
    for (const auto& ex : episode.query) {
        const auto enc = encode(tuned.adapted, ex.tokens);
        for (double x : enc.sentence_rep) {
            out << format_double(x) << ',';
        }
        const auto cls = episode.label_map.at(static_cast<std::size_t>(ex.label));
        std::string name = corpus.class_names().at(static_cast<std::size_t>(cls));
        if (name.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : name) {
                quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
            }
            name = quoted + "\"";
        }
        out << ex.label << ',' << name << '\n';
    }
}

}  // namespace amgs
