// Copyright 2026 The amgs Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "amgs/checkpoint.hpp"
#include "amgs/error.hpp"
#include "helpers.hpp"

namespace amgs {
namespace {

class Checkpoints : public ::testing::Test {
protected:
    std::filesystem::path path = std::filesystem::temp_directory_path() /
                                 ("amgs_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                  "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name() + ".bin");
    void TearDown() override { std::filesystem::remove(path); }
};

TEST_F(Checkpoints, ParamsRoundTripBitwise) {
    Rng rng(1);
    const ModelDims dims{12, 4, 3, 5};
    const auto p = testing_support::noisy_params(dims, rng);
    save_checkpoint(path, p);
    const auto ck = load_checkpoint(path);
    EXPECT_EQ(ck.params, p);
    EXPECT_FALSE(ck.moments.has_value());
}

TEST_F(Checkpoints, MomentsRoundTrip) {
    Rng rng(2);
    const ModelDims dims{8, 2, 2, 2};
    const auto p = testing_support::noisy_params(dims, rng);
    OptimizerMoments mo;
    for (std::size_t i = 0; i < p.size(); ++i) {
        mo.m.push_back(rng.normal());
        mo.v.push_back(std::abs(rng.normal()));
    }
    mo.step_count = 17;
    save_checkpoint(path, p, &mo);
    const auto ck = load_checkpoint(path);
    ASSERT_TRUE(ck.moments.has_value());
    EXPECT_EQ(ck.moments->m, mo.m);
    EXPECT_EQ(ck.moments->v, mo.v);
    EXPECT_EQ(ck.moments->step_count, 17u);
}

TEST_F(Checkpoints, TruncatedPayloadRejected) {
    const ModelDims dims{8, 2, 2, 2};
    save_checkpoint(path, ModelParams::zeros(dims));
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
    EXPECT_THROW(load_checkpoint(path), ValidationError);
}

TEST_F(Checkpoints, TrailingBytesRejected) {
    const ModelDims dims{8, 2, 2, 2};
    save_checkpoint(path, ModelParams::zeros(dims));
    std::ofstream(path, std::ios::app | std::ios::binary) << "xx";
    EXPECT_THROW(load_checkpoint(path), ValidationError);
}

TEST_F(Checkpoints, BadHeaderRejected) {
    std::ofstream(path) << "{not json\n";
    EXPECT_THROW(load_checkpoint(path), ParseError);
    EXPECT_THROW(load_checkpoint(path.string() + ".missing"), IoError);
}

}  // namespace
}  // namespace amgs
