// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "amgs/corpus.hpp"
#include "amgs/episode.hpp"
#include "amgs/harness.hpp"
#include "amgs/model.hpp"
#include "amgs/rng.hpp"

namespace amgs::testing_support {

inline Corpus corpus_from_text(const std::string& jsonl, std::size_t max_len = 32, std::size_t min_freq = 1) {
    std::istringstream in(jsonl);
    return load_corpus(in, max_len, min_freq);
}

struct SyntheticData {
    Corpus corpus;
    ClassSplit split;
};

inline SyntheticData synthetic_data(const SyntheticSpec& spec, int n_train, int n_val, int n_test) {
    std::stringstream ss;
    gen_synthetic(spec, ss);
    Corpus corpus = load_corpus(ss, 32, 1);
    std::vector<std::string> tr, va, te;
    for (int k = 0; k < n_train + n_val + n_test; ++k) {
        (k < n_train ? tr : k < n_train + n_val ? va : te).push_back(synthetic_class_name(k));
    }
    ClassSplit split = make_splits(corpus, tr, va, te);
    return {std::move(corpus), std::move(split)};
}

/// Random labeled examples over regular tokens, with occasional PAD.
inline std::vector<Example> random_examples(Rng& rng, const ModelDims& dims, std::size_t count, std::size_t len,
                                            bool with_pad = true) {
    std::vector<Example> out;
    const std::size_t regular = dims.vocab_size - static_cast<std::size_t>(kFirstRegularToken);
    for (std::size_t b = 0; b < count; ++b) {
        Example ex;
        ex.label = static_cast<int>(rng.below(dims.n_way));
        for (std::size_t i = 0; i < len; ++i) {
            ex.tokens.push_back(kFirstRegularToken + static_cast<TokenId>(rng.below(regular)));
        }
        if (with_pad && len > 1 && rng.bernoulli(0.5)) ex.tokens.back() = kPadToken;
        out.push_back(std::move(ex));
    }
    return out;
}

inline ModelParams noisy_params(const ModelDims& dims, Rng& rng, double scale = 0.5) {
    auto p = ModelParams::random(dims, rng, scale);
    for (double& x : p.values()) x += 0.1 * rng.normal();
    return p;
}

/// An episode with N classes, K support and q query examples per class.
inline Episode random_episode(Rng& rng, const ModelDims& dims, int k_shot, int q_query, std::size_t len = 5) {
    Episode ep;
    for (std::size_t c = 0; c < dims.n_way; ++c) {
        ep.label_map.push_back(static_cast<ClassId>(c));
        auto s = random_examples(rng, dims, static_cast<std::size_t>(k_shot), len, false);
        auto q = random_examples(rng, dims, static_cast<std::size_t>(q_query), len, false);
        for (auto& e : s) e.label = static_cast<int>(c);
        for (auto& e : q) e.label = static_cast<int>(c);
        ep.support.insert(ep.support.end(), s.begin(), s.end());
        ep.query.insert(ep.query.end(), q.begin(), q.end());
    }
    return ep;
}

}  // namespace amgs::testing_support
