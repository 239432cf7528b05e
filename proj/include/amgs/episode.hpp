// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "amgs/corpus.hpp"
#include "amgs/rng.hpp"

namespace amgs {

enum class SplitPart { train, val, test };

std::string_view to_string(SplitPart part) noexcept;
SplitPart parse_split_part(std::string_view name);

/// Pairwise-disjoint class sets for meta-training, validation and testing.
struct ClassSplit {
    std::vector<ClassId> train;
    std::vector<ClassId> val;
    std::vector<ClassId> test;

    const std::vector<ClassId>& part(SplitPart p) const;
};

ClassSplit make_splits(const Corpus& corpus, const std::vector<std::string>& train,
                       const std::vector<std::string>& val, const std::vector<std::string>& test);

/// Reads a JSON object {"train": [...], "val": [...], "test": [...]} of label names.
ClassSplit load_split_file(const Corpus& corpus, const std::filesystem::path& path);

struct Example {
    std::vector<TokenId> tokens;
    int label = 0;               // episode-local, 0..N-1
    std::size_t document = 0;    // index into Corpus::documents()
};

struct Episode {
    std::vector<Example> support;     // N*K, grouped by local label
    std::vector<Example> query;       // N*q, grouped by local label
    std::vector<ClassId> label_map;   // local label -> global class id
    SplitPart part = SplitPart::train;

    int num_classes() const noexcept { return static_cast<int>(label_map.size()); }
};

/// Draws N classes of `part` without replacement, then K + q documents per
/// class without replacement; the first K go to support and the rest to
/// query. Local labels follow the sampled class order.
Episode sample_episode(const Corpus& corpus, const ClassSplit& split, SplitPart part, int n_way, int k_shot,
                       int q_query, Rng& rng);

}  // namespace amgs
