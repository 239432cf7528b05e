// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "amgs/corpus.hpp"
#include "amgs/episode.hpp"
#include "amgs/error.hpp"
#include "helpers.hpp"

namespace amgs {
namespace {

using testing_support::corpus_from_text;

const char* kTwoDocs = R"({"text":"a b a","label":"X"}
{"text":"b c","label":"Y"}
)";

TEST(Corpus, FrequencyThenLexicographicIds) {
    const auto corpus = corpus_from_text(kTwoDocs);
    EXPECT_EQ(corpus.vocab().find("a"), TokenId{3});
    EXPECT_EQ(corpus.vocab().find("b"), TokenId{4});
    EXPECT_EQ(corpus.vocab().find("c"), TokenId{5});
    ASSERT_EQ(corpus.documents().size(), 2u);
    EXPECT_EQ(corpus.documents()[0].tokens, (std::vector<TokenId>{3, 4, 3}));
    EXPECT_EQ(corpus.documents()[1].tokens, (std::vector<TokenId>{4, 5}));
    EXPECT_EQ(corpus.class_names()[static_cast<std::size_t>(corpus.documents()[0].label)], "X");
    EXPECT_EQ(corpus.class_names()[static_cast<std::size_t>(corpus.documents()[1].label)], "Y");
}

TEST(Corpus, ReservedIds) {
    const auto corpus = corpus_from_text(kTwoDocs);
    EXPECT_EQ(corpus.vocab().token(kPadToken), "[PAD]");
    EXPECT_EQ(corpus.vocab().token(kUnkToken), "[UNK]");
    EXPECT_EQ(corpus.vocab().token(kMaskToken), "[MASK]");
    EXPECT_EQ(corpus.vocab().size(), 6u);
}

TEST(Corpus, EmptyTextIsKeptAndFlagged) {
    const auto corpus = corpus_from_text("{\"text\":\"a b\",\"label\":\"X\"}\n{\"text\":\"\",\"label\":\"X\"}\n");
    ASSERT_EQ(corpus.documents().size(), 2u);
    EXPECT_TRUE(corpus.documents()[1].tokens.empty());
    EXPECT_EQ(corpus.report().empty_lines, (std::vector<std::size_t>{2}));
    EXPECT_EQ(corpus.eligible_documents(0), (std::vector<std::size_t>{0}));
}

TEST(Corpus, Truncation) {
    const auto one = corpus_from_text("{\"text\":\"a b a\",\"label\":\"X\"}\n", 2);
    EXPECT_EQ(one.documents()[0].tokens, (std::vector<TokenId>{3, 4}));
    EXPECT_EQ(one.report().truncated, 1u);
    // Frequencies are counted after truncation: b occurs twice, a once.
    const auto two = corpus_from_text(kTwoDocs, 2);
    EXPECT_EQ(two.documents()[0].tokens, (std::vector<TokenId>{4, 3}));
}

TEST(Corpus, MinFreqMapsToUnk) {
    const auto corpus = corpus_from_text(kTwoDocs, 32, 2);
    EXPECT_FALSE(corpus.vocab().find("c").has_value());
    EXPECT_EQ(corpus.documents()[1].tokens, (std::vector<TokenId>{4, kUnkToken}));
}

TEST(Corpus, Tokenizer) {
    EXPECT_EQ(tokenize("Hello, World!  ok"), (std::vector<std::string>{"hello", ",", "world", "!", "ok"}));
    EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Corpus, MalformedLineNamesLine) {
    try {
        corpus_from_text("{\"text\":\"a\",\"label\":\"X\"}\n{\"text\":1}\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(corpus_from_text("not json\n"), ParseError);
}

TEST(Corpus, EmptyCorpusRejected) {
    EXPECT_THROW(corpus_from_text(""), ValidationError);
    EXPECT_THROW(corpus_from_text("\n\n"), ValidationError);
}

TEST(Corpus, MissingFileIsIoError) {
    EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl", 8, 1), IoError);
}

std::string many_classes(int n) {
    std::string out;
    for (int k = 0; k < n; ++k) {
        out += "{\"text\":\"w" + std::to_string(k) + "\",\"label\":\"L" + std::to_string(k) + "\"}\n";
    }
    return out;
}

std::vector<std::string> names(int from, int to) {
    std::vector<std::string> v;
    for (int k = from; k < to; ++k) v.push_back("L" + std::to_string(k));
    return v;
}

TEST(Splits, TwentyFiveSixteen) {
    const auto corpus = corpus_from_text(many_classes(41));
    const auto split = make_splits(corpus, names(0, 20), names(20, 25), names(25, 41));
    EXPECT_EQ(split.train.size(), 20u);
    EXPECT_EQ(split.val.size(), 5u);
    EXPECT_EQ(split.test.size(), 16u);
}

TEST(Splits, OverlapRejected) {
    const auto corpus = corpus_from_text(many_classes(3));
    EXPECT_THROW(make_splits(corpus, {"L0"}, {}, {"L0"}), ValidationError);
    EXPECT_THROW(make_splits(corpus, {"L0", "L0"}, {}, {}), ValidationError);
}

TEST(Splits, UnknownNameRejected) {
    const auto corpus = corpus_from_text(many_classes(3));
    EXPECT_THROW(make_splits(corpus, {"nope"}, {}, {}), ValidationError);
}

TEST(Splits, Singletons) {
    const auto corpus = corpus_from_text(many_classes(3));
    const auto split = make_splits(corpus, {"L0"}, {"L1"}, {"L2"});
    EXPECT_EQ(split.train, (std::vector<ClassId>{*corpus.class_id("L0")}));
    EXPECT_EQ(split.val, (std::vector<ClassId>{*corpus.class_id("L1")}));
    EXPECT_EQ(split.test, (std::vector<ClassId>{*corpus.class_id("L2")}));
}

TEST(Splits, SplitFile) {
    const auto corpus = corpus_from_text(many_classes(3));
    const auto path = std::filesystem::temp_directory_path() / "amgs_test_split.json";
    write_split_file(path, {"L2"}, {"L0"}, {"L1"});
    const auto split = load_split_file(corpus, path);
    EXPECT_EQ(split.train, (std::vector<ClassId>{*corpus.class_id("L2")}));
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace amgs
