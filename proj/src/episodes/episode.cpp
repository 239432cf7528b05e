// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/episode.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "amgs/error.hpp"

namespace amgs {
namespace {

std::vector<ClassId> resolve(const Corpus& corpus, const std::vector<std::string>& names, std::string_view which) {
    std::vector<ClassId> ids;
    ids.reserve(names.size());
    for (const auto& name : names) {
        auto id = corpus.class_id(name);
        if (!id) {
            throw ValidationError("unknown class name in " + std::string(which) + " split: " + name);
        }
        ids.push_back(*id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw ValidationError("duplicate class name in " + std::string(which) + " split");
    }
    return ids;
}

void require_disjoint(const Corpus& corpus, const std::vector<ClassId>& a, const std::vector<ClassId>& b,
                      std::string_view an, std::string_view bn) {
    std::vector<ClassId> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    if (!common.empty()) {
        throw ValidationError("class '" + corpus.class_names()[static_cast<std::size_t>(common.front())] +
                              "' appears in both " + std::string(an) + " and " + std::string(bn) + " splits");
    }
}

/// First `count` entries of a partial Fisher-Yates shuffle of `pool`.
template <typename T>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::size_t count, Rng& rng) {
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
}

}  // namespace

std::string_view to_string(SplitPart part) noexcept {
    switch (part) {
        case SplitPart::train: return "train";
        case SplitPart::val: return "val";
        case SplitPart::test: return "test";
    }
    return "train";
}

SplitPart parse_split_part(std::string_view name) {
    if (name == "train") return SplitPart::train;
    if (name == "val") return SplitPart::val;
    if (name == "test") return SplitPart::test;
    throw ValidationError("unknown split part: " + std::string(name));
}

const std::vector<ClassId>& ClassSplit::part(SplitPart p) const {
    switch (p) {
        case SplitPart::train: return train;
        case SplitPart::val: return val;
        case SplitPart::test: return test;
    }
    return train;
}

ClassSplit make_splits(const Corpus& corpus, const std::vector<std::string>& train,
                       const std::vector<std::string>& val, const std::vector<std::string>& test) {
    ClassSplit split{resolve(corpus, train, "train"), resolve(corpus, val, "val"), resolve(corpus, test, "test")};
    require_disjoint(corpus, split.train, split.val, "train", "val");
    require_disjoint(corpus, split.train, split.test, "train", "test");
    require_disjoint(corpus, split.val, split.test, "val", "test");
    return split;
}

ClassSplit load_split_file(const Corpus& corpus, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read split file " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("invalid split JSON: ") + e.what());
    }
    auto names = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) {
            throw ValidationError(std::string("split file lacks list field \"") + key + "\"");
        }
        try {
            return j[key].get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError(std::string("split field \"") + key + "\" must list strings");
        }
    };
    return make_splits(corpus, names("train"), names("val"), names("test"));
}

Episode sample_episode(const Corpus& corpus, const ClassSplit& split, SplitPart part, int n_way, int k_shot,
                       int q_query, Rng& rng) {
    if (n_way < 1 || k_shot < 1 || q_query < 0) {
        throw ValidationError("episode shape requires N >= 1, K >= 1, q >= 0");
    }
    const auto& classes = split.part(part);
    if (classes.size() < static_cast<std::size_t>(n_way)) {
        throw SamplingError(std::string(to_string(part)) + " split has " + std::to_string(classes.size()) +
                            " classes, need " + std::to_string(n_way));
    }
    const auto per_class = static_cast<std::size_t>(k_shot + q_query);
    // Check every candidate up front so the error names a deficient class
    // independently of the draw.
    for (ClassId cls : classes) {
        if (corpus.eligible_documents(cls).size() < per_class) {
            throw SamplingError("class '" + corpus.class_names()[static_cast<std::size_t>(cls)] + "' has " +
                                std::to_string(corpus.eligible_documents(cls).size()) +
                                " non-empty documents, need K+q = " + std::to_string(per_class));
        }
    }

    Episode ep;
    ep.part = part;
    ep.label_map = draw_without_replacement(classes, static_cast<std::size_t>(n_way), rng);
    ep.support.reserve(static_cast<std::size_t>(n_way * k_shot));
    ep.query.reserve(static_cast<std::size_t>(n_way * q_query));
    std::vector<std::vector<std::size_t>> picks;
    picks.reserve(ep.label_map.size());
    for (ClassId cls : ep.label_map) {
        picks.push_back(draw_without_replacement(corpus.eligible_documents(cls), per_class, rng));
    }
    for (int label = 0; label < n_way; ++label) {
        const auto& docs = picks[static_cast<std::size_t>(label)];
        for (int j = 0; j < k_shot; ++j) {
            const auto idx = docs[static_cast<std::size_t>(j)];
            ep.support.push_back({corpus.documents()[idx].tokens, label, idx});
        }
    }
    for (int label = 0; label < n_way; ++label) {
        const auto& docs = picks[static_cast<std::size_t>(label)];
        for (int j = k_shot; j < k_shot + q_query; ++j) {
            const auto idx = docs[static_cast<std::size_t>(j)];
            ep.query.push_back({corpus.documents()[idx].tokens, label, idx});
        }
    }
    return ep;
}

}  // namespace amgs
