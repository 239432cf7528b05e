// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "amgs/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "amgs/error.hpp"

namespace amgs {

Vocab::Vocab() {
    add("[PAD]");
    add("[UNK]");
    add("[MASK]");
}

TokenId Vocab::add(const std::string& token) {
    if (auto existing = find(token)) {
        return *existing;
    }
    const auto id = static_cast<TokenId>(tokens_.size());
    tokens_.push_back(token);
    index_.emplace(token, id);
    return id;
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Corpus::Corpus(Vocab vocab, std::vector<Document> documents, std::vector<std::string> class_names,
               LoadReport report)
    : vocab_(std::move(vocab)),
      documents_(std::move(documents)),
      class_names_(std::move(class_names)),
      report_(std::move(report)),
      by_class_(class_names_.size()) {
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& doc = documents_[i];
        if (doc.label < 0 || static_cast<std::size_t>(doc.label) >= class_names_.size()) {
            throw ValidationError("document " + std::to_string(i) + " has unknown class id");
        }
        for (TokenId tok : doc.tokens) {
            if (tok < 0 || static_cast<std::size_t>(tok) >= vocab_.size() || tok == kPadToken ||
                tok == kMaskToken) {
                throw ValidationError("document " + std::to_string(i) + " holds invalid token id " +
                                      std::to_string(tok));
            }
        }
        if (!doc.tokens.empty()) {
            by_class_[static_cast<std::size_t>(doc.label)].push_back(i);
        }
    }
}

std::optional<ClassId> Corpus::class_id(std::string_view name) const {
    auto it = std::lower_bound(class_names_.begin(), class_names_.end(), name);
    if (it == class_names_.end() || *it != name) {
        return std::nullopt;
    }
    return static_cast<ClassId>(it - class_names_.begin());
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    };
    for (char raw : text) {
        const auto ch = static_cast<unsigned char>(raw);
        if (std::isspace(ch)) {
            flush();
        } else if (ch < 0x80 && std::ispunct(ch)) {
            flush();
            out.emplace_back(1, raw);
        } else {
            current.push_back(static_cast<char>(ch < 0x80 ? std::tolower(ch) : ch));
        }
    }
    flush();
    return out;
}

Corpus load_corpus(const std::filesystem::path& path, std::size_t max_len, std::size_t min_freq) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read corpus file " + path.string());
    }
    return load_corpus(in, max_len, min_freq);
}

Corpus load_corpus(std::istream& in, std::size_t max_len, std::size_t min_freq) {
    if (max_len == 0) {
        throw ValidationError("max_len must be positive");
    }
    struct RawDoc {
        std::vector<std::string> tokens;
        std::string label;
        std::size_t line;
    };
    std::vector<RawDoc> raw;
    LoadReport report;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
            continue;
        }
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!row.is_object() || !row.contains("text") || !row.contains("label") || !row["text"].is_string() ||
            !row["label"].is_string()) {
            throw ParseError(line_no, "expected an object with string fields \"text\" and \"label\"");
        }
        auto tokens = tokenize(row["text"].get_ref<const std::string&>());
        if (tokens.size() > max_len) {
            tokens.resize(max_len);
            ++report.truncated;
        }
        if (tokens.empty()) {
            report.empty_lines.push_back(line_no);
        }
        raw.push_back({std::move(tokens), row["label"].get<std::string>(), line_no});
    }
    if (in.bad()) {
        throw IoError("read failure while loading corpus");
    }
    if (raw.empty()) {
        throw ValidationError("corpus is empty");
    }

    std::map<std::string, std::size_t> freq;
    for (const auto& doc : raw) {
        for (const auto& tok : doc.tokens) {
            ++freq[tok];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocab vocab;
    for (const auto& [tok, count] : ranked) {
        if (count >= min_freq) {
            vocab.add(tok);
        }
    }

    std::vector<std::string> class_names;
    for (const auto& doc : raw) {
        class_names.push_back(doc.label);
    }
    std::sort(class_names.begin(), class_names.end());
    class_names.erase(std::unique(class_names.begin(), class_names.end()), class_names.end());

    std::vector<Document> docs;
    docs.reserve(raw.size());
    for (const auto& doc : raw) {
        Document out;
        out.label = static_cast<ClassId>(
            std::lower_bound(class_names.begin(), class_names.end(), doc.label) - class_names.begin());
        out.tokens.reserve(doc.tokens.size());
        for (const auto& tok : doc.tokens) {
            out.tokens.push_back(vocab.find(tok).value_or(kUnkToken));
        }
        docs.push_back(std::move(out));
    }
    report.documents = docs.size();
    return Corpus(std::move(vocab), std::move(docs), std::move(class_names), std::move(report));
}

}  // namespace amgs
