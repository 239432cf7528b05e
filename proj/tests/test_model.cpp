// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "amgs/error.hpp"
#include "amgs/model.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

namespace amgs {
namespace {

using testing_support::noisy_params;
using testing_support::random_examples;

const ModelDims kSmall{10, 4, 3, 3};

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

TEST(Layout, BlockOrderAndSizes) {
    const Layout l(kSmall);
    const auto s = oracle::shapes(kSmall);
    EXPECT_EQ(l.range(Block::E).offset, s.oE);
    EXPECT_EQ(l.range(Block::W1).offset, s.oW1);
    EXPECT_EQ(l.range(Block::b1).offset, s.ob1);
    EXPECT_EQ(l.range(Block::C).offset, s.oC);
    EXPECT_EQ(l.range(Block::c0).offset, s.oc0);
    EXPECT_EQ(l.range(Block::P).offset, s.oP);
    EXPECT_EQ(l.range(Block::p0).offset, s.op0);
    EXPECT_EQ(l.total(), s.total);
    EXPECT_EQ(l.primary_length(), s.oP);
}

TEST(Layout, ExtractPreservesOrderAndRoundTrips) {
    Rng rng(1);
    const auto p = noisy_params(kSmall, rng);
    const auto sub = p.extract({Block::C, Block::b1});
    const auto c = p.block(Block::C);
    const auto b1 = p.block(Block::b1);
    ASSERT_EQ(sub.size(), c.size() + b1.size());
    EXPECT_TRUE(std::equal(c.begin(), c.end(), sub.begin()));
    EXPECT_TRUE(std::equal(b1.begin(), b1.end(), sub.begin() + static_cast<std::ptrdiff_t>(c.size())));
    const ModelParams back(p.layout(), to_vec(p.values()));
    EXPECT_EQ(back, p);
}

TEST(Layout, ZeroGradientIsExactlyZero) {
    const auto g = FlatGradient::zeros(Layout(kSmall));
    for (double x : g.values()) {
        EXPECT_EQ(x, 0.0);
        EXPECT_FALSE(std::signbit(x));
    }
    for (std::size_t b = 0; b < kNumBlocks; ++b) EXPECT_TRUE(g.is_zero(static_cast<Block>(b)));
}

TEST(Encode, ZeroParamsGiveZeroRep) {
    const auto p = ModelParams::zeros(kSmall);
    const auto enc = encode(p, std::vector<TokenId>{3, 4, 5});
    for (double x : enc.sentence_rep) EXPECT_EQ(x, 0.0);
}

TEST(Encode, SingleTokenContextIsItsEmbedding) {
    Rng rng(2);
    const auto p = noisy_params(kSmall, rng);
    const std::vector<TokenId> seq{7};
    const auto enc = encode(p, seq);
    const auto e = p.embedding(7);
    for (std::size_t j = 0; j < kSmall.d_emb; ++j) EXPECT_EQ(enc.context[j], e[j]);
    for (std::size_t a = 0; a < kSmall.d_h; ++a) {
        const auto w = p.hidden_row(a);
        double z = p.block(Block::b1)[a];
        for (std::size_t j = 0; j < kSmall.d_emb; ++j) z += w[j] * e[j] + w[kSmall.d_emb + j] * e[j];
        EXPECT_NEAR(enc.sentence_rep[a], std::tanh(z), 1e-15);
    }
}

TEST(Encode, MatchesOracle) {
    const auto s = oracle::shapes(kSmall);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto p = noisy_params(kSmall, rng);
        const auto ex = random_examples(rng, kSmall, 1, 5)[0];
        const auto enc = encode(p, ex.tokens);
        const auto ref = oracle::forward(to_vec(p.values()), s, ex.tokens);
        for (std::size_t a = 0; a < kSmall.d_h; ++a) {
            EXPECT_NEAR(enc.sentence_rep[a], static_cast<double>(ref.r[a]), 1e-12);
        }
        for (std::size_t i = 0; i < ex.tokens.size(); ++i) {
            for (std::size_t a = 0; a < kSmall.d_h; ++a) {
                const double want = ex.tokens[i] == kPadToken ? 0.0 : static_cast<double>(ref.h[i][a]);
                EXPECT_NEAR(enc.hidden(i, kSmall.d_h)[a], want, 1e-12);
            }
        }
    }
}

TEST(Encode, EmptySequenceRejected) {
    const auto p = ModelParams::zeros(kSmall);
    EXPECT_THROW(encode(p, std::vector<TokenId>{}), EncodingError);
    EXPECT_THROW(encode(p, std::vector<TokenId>{kPadToken, kPadToken}), EncodingError);
}

TEST(Loss, ZeroParamsGiveLogN) {
    const ModelDims dims{10, 4, 3, 5};
    Rng rng(3);
    const auto batch = random_examples(rng, dims, 6, 4);
    EXPECT_NEAR(primary_loss(ModelParams::zeros(dims), batch).loss, std::log(5.0), 1e-15);
    EXPECT_NEAR(std::log(5.0), 1.60944, 1e-5);
}

TEST(Loss, ZeroParamsGiveLogV) {
    Rng rng(4);
    const auto batch = random_examples(rng, kSmall, 4, 6);
    const auto mb = mask_batch(batch, rng, {}, kSmall.vocab_size);
    ASSERT_FALSE(mb.targets.empty());
    EXPECT_NEAR(aux_loss(ModelParams::zeros(kSmall), mb), std::log(10.0), 1e-15);
}

TEST(Loss, LargeMarginDrivesLossToZero) {
    auto p = ModelParams::zeros(kSmall);
    p.block(Block::c0)[1] = 800.0;
    const std::vector<Example> batch{{{3, 4}, 1, 0}};
    EXPECT_EQ(primary_loss(p, batch).loss, 0.0);
    p.block(Block::c0)[1] = 40.0;
    EXPECT_LT(primary_loss(p, batch).loss, 1e-15);
}

TEST(Loss, PrimaryMatchesOracle) {
    const auto s = oracle::shapes(kSmall);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(100 + seed);
        const auto p = noisy_params(kSmall, rng, 1.0);
        const auto batch = random_examples(rng, kSmall, 5, 6);
        EXPECT_NEAR(primary_loss(p, batch).loss,
                    static_cast<double>(oracle::primary(to_vec(p.values()), s, batch)), 1e-12);
    }
}

TEST(Loss, AuxMatchesOracle) {
    const auto s = oracle::shapes(kSmall);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(200 + seed);
        const auto p = noisy_params(kSmall, rng, 1.0);
        const auto batch = random_examples(rng, kSmall, 5, 6);
        const auto mb = mask_batch(batch, rng, {}, kSmall.vocab_size);
        EXPECT_NEAR(aux_loss(p, mb), static_cast<double>(oracle::aux(to_vec(p.values()), s, mb)), 1e-12);
    }
}

TEST(Loss, AuxHandTraceFourTokenVocab) {
    // One real token (id 3). The masked sequence is [MASK]; c = E[MASK],
    // h = tanh(W1 [e; e] + b1), logits = P h + p0, target 3.
    const ModelDims dims{4, 1, 1, 2};
    auto p = ModelParams::zeros(dims);
    p.block(Block::E)[kMaskToken] = 0.5;
    p.block(Block::W1)[0] = 1.0;
    p.block(Block::W1)[1] = 1.0;
    p.block(Block::P)[3] = 2.0;
    p.block(Block::p0)[0] = 0.25;
    MaskedBatch mb;
    mb.sequences = {{kMaskToken}};
    mb.targets = {{0, 0, 3}};
    const double h = std::tanh(1.0);
    const double l3 = 2.0 * h;
    const double z = std::exp(0.25) + 2.0 + std::exp(l3);
    EXPECT_NEAR(aux_loss(p, mb), std::log(z) - l3, 1e-15);
}

TEST(Loss, AuxWithoutTargetsRejected) {
    EXPECT_THROW(aux_loss(ModelParams::zeros(kSmall), MaskedBatch{}), ValidationError);
}

TEST(Loss, LabelOutOfRangeRejected) {
    const std::vector<Example> batch{{{3}, 3, 0}};
    EXPECT_THROW(primary_loss(ModelParams::zeros(kSmall), batch), ValidationError);
}

TEST(Loss, MixingArithmetic) {
    // 0.999 * 2.0 + 0.001 * 5.0
    EXPECT_NEAR((1.0 - 1e-3) * 2.0 + 1e-3 * 5.0, 2.003, 1e-15);
    Rng rng(5);
    const auto p = noisy_params(kSmall, rng);
    const auto batch = random_examples(rng, kSmall, 4, 5);
    const auto mb = mask_batch(batch, rng, {}, kSmall.vocab_size);
    const double pri = primary_loss(p, batch).loss;
    const double aux = aux_loss(p, mb);
    EXPECT_NEAR(total_loss(p, batch, mb, 1e-3).total, 0.999 * pri + 0.001 * aux, 1e-14);
    EXPECT_EQ(total_loss(p, batch, mb, 0.0).total, pri);
    EXPECT_EQ(total_loss(p, batch, mb, 1.0).total, aux);
    EXPECT_TRUE(total_loss(p, batch, mb, 0.0).aux_skipped);
    EXPECT_TRUE(total_loss(p, batch, MaskedBatch{}, 0.5).aux_skipped);
}

// Central differences of the long double oracle against the analytic
// gradient, over every parameter.
double max_rel_error(const ModelParams& p, const std::vector<Example>& batch, const MaskedBatch& mb, double rho) {
    const auto s = oracle::shapes(p.dims());
    const auto analytic = grad_total(p, batch, mb, rho).grad;
    auto th = to_vec(p.values());
    double worst = 0.0;
    const double h = 1e-6;
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double saved = th[i];
        th[i] = saved + h;
        const auto up = oracle::total(th, s, batch, mb, rho);
        th[i] = saved - h;
        const auto down = oracle::total(th, s, batch, mb, rho);
        th[i] = saved;
        const double numeric = static_cast<double>((up - down) / (2.0L * h));
        const double a = analytic.values()[i];
        worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8}));
    }
    return worst;
}

class GradientFiniteDifference : public ::testing::TestWithParam<double> {};

TEST_P(GradientFiniteDifference, TwentySeeds) {
    const double rho = GetParam();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        const auto p = noisy_params(kSmall, rng);
        const auto batch = random_examples(rng, kSmall, 4, 5);
        MaskingConfig mc;
        mc.p_mask = 0.4;
        const auto mb = mask_batch(batch, rng, mc, kSmall.vocab_size);
        EXPECT_LT(max_rel_error(p, batch, mb, rho), 1e-5) << "seed " << seed;
    }
}

INSTANTIATE_TEST_SUITE_P(Rho, GradientFiniteDifference, ::testing::Values(0.0, 1e-3, 0.3, 1.0));

TEST(Gradient, RhoZeroLeavesPredictorUntouched) {
    Rng rng(6);
    const auto p = noisy_params(kSmall, rng);
    const auto batch = random_examples(rng, kSmall, 4, 5);
    const auto mb = mask_batch(batch, rng, {}, kSmall.vocab_size);
    const auto g = grad_total(p, batch, mb, 0.0).grad;
    EXPECT_TRUE(g.is_zero(Block::P));
    EXPECT_TRUE(g.is_zero(Block::p0));
    EXPECT_FALSE(grad_total(p, batch, mb, 0.5).grad.is_zero(Block::P));
}

TEST(Gradient, PrimaryEqualsTotalAtRhoZero) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(300 + seed);
        const auto p = noisy_params(kSmall, rng);
        const auto batch = random_examples(rng, kSmall, 4, 5);
        const auto mb = mask_batch(batch, rng, {}, kSmall.vocab_size);
        const auto gp = grad_primary(p, batch).grad;
        const auto gt = grad_total(p, batch, mb, 0.0).grad;
        EXPECT_TRUE(gp.is_zero(Block::P));
        EXPECT_TRUE(gp.is_zero(Block::p0));
        for (std::size_t i = 0; i < gp.size(); ++i) EXPECT_NEAR(gp.values()[i], gt.values()[i], 1e-12);
    }
}

TEST(Gradient, DuplicatedBatchGivesSameGradient) {
    Rng rng(7);
    const auto p = noisy_params(kSmall, rng);
    const auto batch = random_examples(rng, kSmall, 3, 5);
    auto twice = batch;
    twice.insert(twice.end(), batch.begin(), batch.end());
    const auto g1 = grad_primary(p, batch).grad;
    const auto g2 = grad_primary(p, twice).grad;
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1.values()[i], g2.values()[i], 1e-14);
}

TEST(Gradient, IsPure) {
    Rng rng(8);
    const auto p = noisy_params(kSmall, rng);
    const auto batch = random_examples(rng, kSmall, 3, 5);
    const auto mb = mask_batch(batch, rng, {}, kSmall.vocab_size);
    const auto a = grad_total(p, batch, mb, 0.3).grad;
    const auto b = grad_total(p, batch, mb, 0.3).grad;
    EXPECT_EQ(std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)), 0);
}

TEST(Gradient, NonFiniteReportsBlock) {
    auto p = ModelParams::zeros(kSmall);
    p.block(Block::C)[0] = std::numeric_limits<double>::quiet_NaN();
    const std::vector<Example> batch{{{3, 4}, 0, 0}};
    try {
        grad_primary(p, batch);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_FALSE(e.block().empty());
        EXPECT_NE(std::string(e.what()).find("block " + e.block()), std::string::npos) << e.what();
    }
}

TEST(Argmax, TiesGoLow) {
    EXPECT_EQ(argmax(std::vector<double>{0.0, 0.0, 0.0}), 0);
    EXPECT_EQ(argmax(std::vector<double>{1.0, 2.0, 2.0}), 1);
}

}  // namespace
}  // namespace amgs
