// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sparsetrim/checkpoint.hpp"
#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"
#include "sparsetrim/weight_stats.hpp"

namespace sparsetrim {

/// How to generate one matrix of a synthetic checkpoint.
struct MatrixRecipe
{
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    DistClass dist = DistClass::C_WideSpread;
    /// Fraction of columns built as approximately sparse ("near-zero").
    double near_zero_fraction = 0.0;
    LayerMeta meta;
    double scale = 0.02; ///< spread of the non-negligible weights
    double mean = 0.0;   ///< offset added to every entry (LayerNorm gains sit near 1)
};

struct SynthRecipe
{
    Profile profile = Profile::Custom;
    std::vector<MatrixRecipe> matrices;
};

struct SynthResult
{
    ModelCheckpoint checkpoint;
    /// Per matrix, the ascending indices of the constructed near-zero columns.
    std::vector<std::vector<std::size_t>> near_zero_columns;
};

namespace detail {

// Magnitude of "almost zero" weights relative to the recipe scale.
inline constexpr double kTinyRatio = 1e-9;
// Share of a near-zero column that carries full-size outliers.
inline constexpr double kOutlierShare = 0.05;
// Share of non-negligible weights a narrow-spread layer is built with.
inline constexpr double kNarrowDenseShare = 0.6;
// Share of negligible weights inside dense columns of a spiked layer.
inline constexpr double kSpikedTinyShare = 0.6;

inline std::vector<std::size_t> pick(std::mt19937_64& rng, std::size_t n, std::size_t k)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline std::vector<float> near_zero_column(std::mt19937_64& rng, const MatrixRecipe& r)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const auto outliers = static_cast<std::size_t>(std::floor(kOutlierShare * static_cast<double>(r.rows)));
    std::vector<float> col(r.rows, static_cast<float>(r.mean));
    if (outliers == 0) {
        return col; // exactly constant: counts as fully sparse via the exact-zero rule
    }
    for (auto& v : col) {
        v = static_cast<float>(r.mean + r.scale * kTinyRatio * normal(rng));
    }
    // Outliers come in +/- pairs of equal magnitude so small matrices keep a
    // mean close to zero.
    double mag = 0.0;
    bool flip = coin(rng);
    std::size_t k = 0;
    for (std::size_t row : pick(rng, r.rows, outliers)) {
        if (k++ % 2 == 0) {
            mag = r.scale * (1.0 + std::abs(normal(rng)));
            flip = !flip;
        }
        col[row] = static_cast<float>(r.mean + (flip ? mag : -mag));
        flip = !flip;
    }
    return col;
}

inline std::vector<float> dense_column(std::mt19937_64& rng, const MatrixRecipe& r, std::size_t tiny)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<float> col(r.rows);
        for (auto& v : col) {
            v = static_cast<float>(r.mean + r.scale * normal(rng));
        }
        std::vector<bool> is_tiny(r.rows, false);
        for (std::size_t row : pick(rng, r.rows, tiny)) {
            col[row] = static_cast<float>(r.mean + r.scale * kTinyRatio * normal(rng));
            is_tiny[row] = true;
        }
        // Mirror every second non-negligible draw about the mean.
        std::optional<std::size_t> prev;
        for (std::size_t row = 0; row < r.rows; ++row) {
            if (is_tiny[row]) continue;
            if (prev) {
                col[row] = static_cast<float>(2.0 * r.mean - static_cast<double>(col[*prev]));
                prev.reset();
            } else {
                prev = row;
            }
        }
        if (r.mean != 0.0) {
            return col;
        }
        const double theta0 = kAlmostZeroFactor * population_sigma(col);
        if (column_sparsity<float>(col, theta0) < kDefaultThetaC) {
            return col;
        }
    }
    throw InvalidArgument("matrix '" + r.name + "': cannot build a dense column that stays below the "
                          "column sparsity cutoff");
}

} // namespace detail

/**
 * Builds a deterministic checkpoint whose matrices have the requested weight
 * distribution class and a known set of approximately sparse columns.
 *
 *  - near-zero columns: all weights ~1e-9 * scale except floor(5%) outliers,
 *    so their approximate sparsity is at least 0.95;
 *  - dense columns: Gaussian(0, scale) with an exact share of negligible
 *    weights (60% for A, chosen so the whole matrix holds ~60% non-negligible
 *    weights for B, none for C), redrawn until their sparsity stays < 0.9.
 *
 * Throws InvalidArgument if a shape is empty, a fraction is outside [0, 1],
 * or the combination cannot produce the requested class.
 */
[[nodiscard]] inline SynthResult synth_checkpoint_detailed(const SynthRecipe& recipe, std::uint64_t seed)
{
    SynthResult out;
    out.checkpoint.profile = recipe.profile;
    for (std::size_t i = 0; i < recipe.matrices.size(); ++i) {
        const auto& r = recipe.matrices[i];
        if (r.rows == 0 || r.cols == 0) {
            throw InvalidArgument("matrix '" + r.name + "': invalid shape " + std::to_string(r.rows) + "x"
                                  + std::to_string(r.cols));
        }
        if (!(r.near_zero_fraction >= 0.0 && r.near_zero_fraction <= 1.0)) {
            throw InvalidArgument("matrix '" + r.name + "': near-zero fraction must lie in [0, 1]");
        }
        if (!(r.scale > 0.0) || !std::isfinite(r.scale) || !std::isfinite(r.mean)) {
            throw InvalidArgument("matrix '" + r.name + "': scale must be positive and finite");
        }

        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i)};
        std::mt19937_64 rng(seq);

        const auto nz_count =
            static_cast<std::size_t>(std::llround(r.near_zero_fraction * static_cast<double>(r.cols)));
        auto nz = detail::pick(rng, r.cols, nz_count);

        const double nz_share = static_cast<double>(nz_count) / static_cast<double>(r.cols);
        const double outlier_share =
            std::floor(detail::kOutlierShare * static_cast<double>(r.rows)) / static_cast<double>(r.rows);
        double tiny_share = 0.0;
        switch (r.dist) {
        case DistClass::A_HighlySpiked: tiny_share = detail::kSpikedTinyShare; break;
        case DistClass::B_NarrowSpread:
            tiny_share = nz_count == r.cols
                             ? -1.0
                             : 1.0 - (detail::kNarrowDenseShare - nz_share * outlier_share) / (1.0 - nz_share);
            break;
        case DistClass::C_WideSpread: tiny_share = 0.0; break;
        }
        if (tiny_share < 0.0 || tiny_share > 1.0) {
            throw InvalidArgument("matrix '" + r.name + "': a type-" + std::string(to_string(r.dist))
                                  + " matrix cannot have " + std::to_string(nz_count) + " of "
                                  + std::to_string(r.cols) + " columns near zero");
        }
        const auto tiny = static_cast<std::size_t>(std::llround(tiny_share * static_cast<double>(r.rows)));

        // Small shapes can land on the wrong side of a class boundary by
        // chance; redraw from the same stream a bounded number of times.
        constexpr int kMaxDraws = 64;
        std::optional<WeightMatrix> w;
        DistClass got = r.dist;
        for (int draw = 0; draw < kMaxDraws && !w; ++draw) {
            Matrix<float> m(r.rows, r.cols);
            std::size_t next_nz = 0;
            for (std::size_t c = 0; c < r.cols; ++c) {
                const bool is_nz = next_nz < nz.size() && nz[next_nz] == c;
                next_nz += is_nz ? 1 : 0;
                const auto col = is_nz ? detail::near_zero_column(rng, r) : detail::dense_column(rng, r, tiny);
                for (std::size_t row = 0; row < r.rows; ++row) {
                    m(row, c) = col[row];
                }
            }
            WeightMatrix cand{r.name, std::move(m)};
            got = classify_distribution(matrix_stats(cand));
            if (got == r.dist) {
                w = std::move(cand);
            }
        }
        if (!w) {
            throw InvalidArgument("matrix '" + r.name + "': generated weights classify as "
                                  + std::string(to_string(got)) + ", not " + std::string(to_string(r.dist))
                                  + " (recipe infeasible for this shape)");
        }
        out.checkpoint.entries.push_back(CheckpointEntry{std::move(*w), r.meta, std::nullopt});
        out.near_zero_columns.push_back(std::move(nz));
    }
    validate(out.checkpoint);
    return out;
}

[[nodiscard]] inline ModelCheckpoint synth_checkpoint(const SynthRecipe& recipe, std::uint64_t seed)
{
    return synth_checkpoint_detailed(recipe, seed).checkpoint;
}

/**
 * Recipe mirroring a built-in profile's layer taxonomy at reduced width.
 *
 * Net1: encoder FC blocks 0-5 spiked with half their columns near zero,
 *       blocks 6-11 narrow, decoder FC wide.
 * Net2: the 27-matrix P1 set (3 FC + 7 ATT + 1 CONV encoder, 14 ATT + 2 FC
 *       decoder) spiked with half their columns near zero, the rest wide.
 * Net3: encoder blocks 0-4 spiked with half their columns near zero, all
 *       remaining matrices narrow.
 * Every block also carries attention and LayerNorm matrices.
 */
[[nodiscard]] inline SynthRecipe profile_fixture_recipe(Profile profile, std::size_t width = 64)
{
    if (profile == Profile::Custom) {
        throw InvalidArgument("no built-in fixture for the Custom profile");
    }
    if (width < 20) {
        throw InvalidArgument("fixture width must be at least 20");
    }
    const auto info = profile_info(profile);
    SynthRecipe rec;
    rec.profile = profile;

    const auto add = [&](std::string name, std::size_t rows, std::size_t cols, DistClass d, double nz,
                         LayerMeta meta) {
        MatrixRecipe m;
        m.name = std::move(name);
        m.rows = rows;
        m.cols = cols;
        m.dist = d;
        m.near_zero_fraction = nz;
        m.meta = meta;
        if (meta.kind == LayerKind::LayerNorm) {
            m.mean = 1.0;
            m.scale = 0.1;
        }
        rec.matrices.push_back(std::move(m));
    };
    const auto spiked = DistClass::A_HighlySpiked;
    const auto narrow = DistClass::B_NarrowSpread;
    const auto wide = DistClass::C_WideSpread;

    // Net2 P1 membership counters.
    std::size_t p1_enc_fc = 3, p1_enc_att = 7, p1_enc_conv = 1, p1_dec_att = 14, p1_dec_fc = 2;
    const auto take = [](std::size_t& budget) {
        if (budget == 0) return false;
        --budget;
        return true;
    };

    for (int s = 0; s < 2; ++s) {
        const Side side = s == 0 ? Side::Encoder : Side::Decoder;
        const std::string prefix = s == 0 ? "encoder." : "decoder.";
        const auto blocks = side == Side::Encoder ? info.encoder_blocks : info.decoder_blocks;

        if (profile == Profile::Net2 && side == Side::Encoder) {
            for (const char* conv : {"encoder.conv1", "encoder.conv2"}) {
                const bool p1 = take(p1_enc_conv);
                add(conv, width, 3 * width, p1 ? spiked : wide, p1 ? 0.5 : 0.0,
                    {side, LayerKind::CONV, 0, p1});
            }
        }

        for (std::size_t b = 0; b < blocks; ++b) {
            const std::string blk = prefix + std::to_string(b) + ".";
            DistClass fc_dist = wide;
            double fc_nz = 0.0;
            DistClass att_dist = wide;
            bool fc1_p1 = false, att_p1 = false, cross_p1 = false;

            switch (profile) {
            case Profile::Net1:
                if (side == Side::Encoder) {
                    fc_dist = b <= 5 ? spiked : narrow;
                    fc_nz = b <= 5 ? 0.5 : 0.0;
                }
                break;
            case Profile::Net3:
                fc_dist = (side == Side::Encoder && b <= 4) ? spiked : narrow;
                fc_nz = (side == Side::Encoder && b <= 4) ? 0.5 : 0.0;
                att_dist = narrow;
                break;
            case Profile::Net2:
                if (side == Side::Encoder) {
                    fc1_p1 = take(p1_enc_fc);
                    att_p1 = take(p1_enc_att);
                } else {
                    fc1_p1 = take(p1_dec_fc);
                    att_p1 = take(p1_dec_att);
                    cross_p1 = take(p1_dec_att);
                }
                break;
            case Profile::Custom: break;
            }

            const auto fc1_dist = fc1_p1 ? spiked : fc_dist;
            const double fc1_nz = fc1_p1 ? 0.5 : fc_nz;
            add(blk + "fc1", 2 * width, width, fc1_dist, fc1_nz, {side, LayerKind::FC, b, fc1_p1});
            add(blk + "fc2", width, 2 * width, fc_dist, fc_nz, {side, LayerKind::FC, b, false});
            add(blk + "attn", width, width, att_p1 ? spiked : att_dist, att_p1 ? 0.5 : 0.0,
                {side, LayerKind::ATT, b, att_p1});
            if (side == Side::Decoder && profile == Profile::Net2) {
                add(blk + "cross_attn", width, width, cross_p1 ? spiked : wide, cross_p1 ? 0.5 : 0.0,
                    {side, LayerKind::ATT, b, cross_p1});
            }
            add(blk + "layer_norm", 1, width, wide, 0.0, {side, LayerKind::LayerNorm, b, false});
        }
    }
    return rec;
}

} // namespace sparsetrim
