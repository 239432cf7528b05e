// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace amgs {

using TokenId = std::int32_t;
using ClassId = std::int32_t;

inline constexpr TokenId kPadToken = 0;
inline constexpr TokenId kUnkToken = 1;
inline constexpr TokenId kMaskToken = 2;
inline constexpr TokenId kFirstRegularToken = 3;

/// Token string <-> id table. Ids 0..2 are reserved for PAD, UNK and MASK.
class Vocab {
public:
    Vocab();

    TokenId add(const std::string& token);
    std::optional<TokenId> find(std::string_view token) const;
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const noexcept { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
};

struct Document {
    std::vector<TokenId> tokens;
    ClassId label = 0;
};

struct LoadReport {
    std::size_t documents = 0;
    std::size_t truncated = 0;
    /// 1-based line numbers of documents whose token sequence is empty.
    std::vector<std::size_t> empty_lines;
};

/// Immutable tokenized corpus. Global class ids index `class_names`, which is
/// sorted lexicographically.
class Corpus {
public:
    Corpus(Vocab vocab, std::vector<Document> documents, std::vector<std::string> class_names,
           LoadReport report);

    const Vocab& vocab() const noexcept { return vocab_; }
    const std::vector<Document>& documents() const noexcept { return documents_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    const LoadReport& report() const noexcept { return report_; }
    std::size_t num_classes() const noexcept { return class_names_.size(); }

    std::optional<ClassId> class_id(std::string_view name) const;
    /// Indices of the non-empty documents of a class; only these are eligible
    /// for episodes.
    const std::vector<std::size_t>& eligible_documents(ClassId cls) const {
        return by_class_.at(static_cast<std::size_t>(cls));
    }

private:
    Vocab vocab_;
    std::vector<Document> documents_;
    std::vector<std::string> class_names_;
    LoadReport report_;
    std::vector<std::vector<std::size_t>> by_class_;
};

/// Lowercases ASCII and splits on whitespace; every ASCII punctuation
/// character becomes a token of its own.
std::vector<std::string> tokenize(std::string_view text);

/// Reads a JSONL corpus with "text" and "label" string fields per line.
/// Tokens with corpus frequency below `min_freq` map to UNK; sequences are
/// truncated to `max_len`; vocabulary ids follow frequency descending, then
/// lexicographic order.
Corpus load_corpus(const std::filesystem::path& path, std::size_t max_len, std::size_t min_freq);
Corpus load_corpus(std::istream& in, std::size_t max_len, std::size_t min_freq);

}  // namespace amgs
