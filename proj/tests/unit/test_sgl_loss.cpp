// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace sparsetrim;

namespace {

Matrix<float> random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, float sd = 0.3f)
{
    std::normal_distribution<float> n(0.0f, sd);
    Matrix<float> m(r, c);
    for (auto& x : m.data()) x = n(rng);
    return m;
}

ModelCheckpoint single(Matrix<float> m, Side side = Side::Encoder)
{
    ModelCheckpoint c;
    c.entries.push_back({WeightMatrix{"w", std::move(m)}, {side, LayerKind::FC, 0, false}, std::nullopt});
    return c;
}

} // namespace

TEST(SGLLoss, L1Examples)
{
    EXPECT_EQ(l1_penalty(single(Matrix<float>(3, 3, 0.0f)), Side::Encoder), 0.0);
    EXPECT_EQ(l1_penalty(single(Matrix<float>(2, 2, std::vector<float>{1, -2, 3, -4})), Side::Encoder), 10.0);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const auto m = random_matrix(rng, 8, 8);
        EXPECT_NEAR(l1_penalty(single(m), Side::Encoder), oracle::l1(m), 1e-12);
    }
}

TEST(SGLLoss, GroupExamples)
{
    EXPECT_EQ(group_l2_penalty(single(Matrix<float>(2, 1, std::vector<float>{3, 4})), Side::Encoder), 5.0);
    EXPECT_EQ(group_l2_penalty(single(Matrix<float>(4, 4, 0.0f)), Side::Encoder), 0.0);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
        const auto m = random_matrix(rng, 6, 4);
        EXPECT_NEAR(group_l2_penalty(single(m), Side::Encoder), oracle::group_l2(m), 1e-12);
    }
}

TEST(SGLLoss, TotalIsWeightedSumOfComponentOracles)
{
    const auto fixture = synth_checkpoint(profile_fixture_recipe(Profile::Net2, 20), 3);
    SGLConfig cfg{1e-5, 1e-5, 1e-4, 1e-4, {}};
    double expect = 0.0;
    for (const auto& e : fixture.entries) {
        if (e.meta.kind == LayerKind::LayerNorm) continue; // out of scope
        expect += 1e-5 * oracle::l1(e.matrix.values) + 1e-4 * oracle::group_l2(e.matrix.values);
    }
    EXPECT_NEAR(total_penalty(fixture, cfg), expect, 1e-12 * expect);
    EXPECT_EQ(total_penalty(fixture, SGLConfig{}), 0.0);
}

TEST(SGLLoss, SidesAndScope)
{
    std::mt19937_64 rng(4);
    auto c = single(random_matrix(rng, 5, 5));
    const SGLConfig cfg{0.0, 7.0, 0.0, 9.0, {}};
    EXPECT_EQ(total_penalty(c, cfg), 0.0); // encoder-only checkpoint, decoder lambdas
    const auto b = penalty_breakdown(c, SGLConfig{1, 1, 1, 1, {}});
    EXPECT_EQ(b.l1_decoder, 0.0);
    EXPECT_EQ(b.group_decoder, 0.0);

    c.entries.push_back({WeightMatrix{"ln", Matrix<float>(1, 5, 1.0f)}, {Side::Encoder, LayerKind::LayerNorm, 0, false}, {}});
    EXPECT_NEAR(l1_penalty(c, Side::Encoder), oracle::l1(c.entries[0].matrix.values), 1e-12);
    EXPECT_NEAR(l1_penalty(c, Side::Encoder, {true, true}), oracle::l1(c.entries[0].matrix.values) + 5.0, 1e-12);
    EXPECT_NEAR(l1_penalty(c, Side::Encoder, {false, true}), 5.0, 1e-12);
    EXPECT_THROW((void)l1_penalty(c, Side::Encoder, {true}), InvalidArgument);

    c.profile = Profile::Net1;
    c.entries[1].meta.kind = LayerKind::ATT; // FC-only profile leaves attention unregularized
    EXPECT_NEAR(l1_penalty(c, Side::Encoder), oracle::l1(c.entries[0].matrix.values), 1e-12);
    EXPECT_THROW((void)total_penalty(c, SGLConfig{-1, 0, 0, 0, {}}), InvalidArgument);
}

TEST(SGLLoss, NonNegativityHomogeneityAndColumnRemoval)
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        auto m = random_matrix(rng, 6, 5);
        const auto base = single(m);
        const double l1 = l1_penalty(base, Side::Encoder);
        const double g = group_l2_penalty(base, Side::Encoder);
        EXPECT_GT(l1, 0.0);
        EXPECT_GT(g, 0.0);
        for (float s : {0.0f, 0.5f, 2.0f, 8.0f}) {
            auto scaled = m;
            for (auto& x : scaled.data()) x *= s;
            EXPECT_NEAR(l1_penalty(single(scaled), Side::Encoder), s * l1, 1e-12 * (1 + s * l1));
            EXPECT_NEAR(group_l2_penalty(single(scaled), Side::Encoder), s * g, 1e-12 * (1 + s * g));
        }
        const std::size_t c = t % 5;
        const double norm = column_norm(m, c);
        m.set_column(c, 0.0f);
        const double after = group_l2_penalty(single(m), Side::Encoder);
        EXPECT_LT(after, g);
        EXPECT_NEAR(g - after, norm, 1e-12);
    }
}

TEST(SGLLoss, SubgradientExamples)
{
    const auto z = penalty_subgradient(Matrix<float>(3, 2, 0.0f), 1.0, 1.0);
    for (float x : z.data()) EXPECT_EQ(x, 0.0f);

    const auto g = penalty_subgradient(Matrix<double>(2, 1, std::vector<double>{3, 4}), 0.0, 1.0);
    EXPECT_DOUBLE_EQ(g(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(g(1, 0), 0.8);

    // Zero entry in a non-zero column: L1 part picks 0, group part is smooth there.
    const auto h = penalty_subgradient(Matrix<double>(2, 1, std::vector<double>{0, 2}), 0.5, 1.0);
    EXPECT_DOUBLE_EQ(h(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(h(1, 0), 1.5);
}

TEST(SGLLoss, SubgradientMatchesIndependentFiniteDifferences)
{
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
        auto m = random_matrix(rng, 8, 8, 0.5f).cast<double>();
        const double l1 = 1e-4, gl = 1e-5 * (t + 1);
        const auto g = penalty_subgradient(m, l1, gl);
        const auto pen = [&](const Matrix<double>& x) {
            double s = 0;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                double sq = 0;
                for (std::size_t r = 0; r < x.rows(); ++r) {
                    s += l1 * std::fabs(x(r, c));
                    sq += x(r, c) * x(r, c);
                }
                s += gl * std::sqrt(sq);
            }
            return s;
        };
        for (std::size_t r = 0; r < 8; ++r) {
            for (std::size_t c = 0; c < 8; ++c) {
                const double v = m(r, c);
                if (std::fabs(v) < 1e-6) continue;
                const double step = 1e-4 * std::max(1.0, std::fabs(v));
                m(r, c) = v + step;
                const double up = pen(m);
                m(r, c) = v - step;
                const double down = pen(m);
                m(r, c) = v;
                const double fd = (up - down) / (2 * step);
                EXPECT_LT(std::fabs(fd - g(r, c)) / std::max(std::fabs(fd), std::fabs(g(r, c))), 1e-4);
            }
        }
    }
}

TEST(FiniteDiffCheck, Examples)
{
    std::mt19937_64 rng(7);
    const WeightMatrix w{"w", random_matrix(rng, 8, 8)};
    EXPECT_EQ(finite_diff_check(w, SGLConfig{}, 1e-4), 0.0);
    EXPECT_LT(finite_diff_check(w, SGLConfig{1e-5, 0, 1e-4, 0, {}}, 1e-4), 1e-4);

    auto zc = w;
    zc.values.set_column(3, 0.0f);
    const double e = finite_diff_check(zc, SGLConfig{1e-5, 0, 1e-4, 0, {}}, 1e-4);
    EXPECT_TRUE(std::isfinite(e));
    EXPECT_LT(e, 1e-4);
    EXPECT_THROW((void)finite_diff_check(w, SGLConfig{}, 0.0), InvalidArgument);
}
