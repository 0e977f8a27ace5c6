// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sparsetrim/checkpoint.hpp"
#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"

namespace sparsetrim {

/// Per-entry inclusion flags aligned with ModelCheckpoint::entries. An empty
/// scope means "every matrix the profile does not exclude".
using PenaltyScope = std::vector<bool>;

/// Sparse Group LASSO coefficients. lambda1/lambda2 weight the elementwise L1
/// term on encoder/decoder, lambda3/lambda4 the column-wise group L2 term.
struct SGLConfig
{
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    double lambda4 = 0.0;
    PenaltyScope scope;

    [[nodiscard]] double l1_for(Side s) const noexcept { return s == Side::Encoder ? lambda1 : lambda2; }
    [[nodiscard]] double group_for(Side s) const noexcept { return s == Side::Encoder ? lambda3 : lambda4; }

    void validate() const
    {
        for (double l : {lambda1, lambda2, lambda3, lambda4}) {
            if (!std::isfinite(l) || l < 0.0) {
                throw InvalidArgument("SGL coefficients must be finite and non-negative");
            }
        }
    }
};

[[nodiscard]] inline PenaltyScope default_scope(const ModelCheckpoint& ckpt)
{
    PenaltyScope scope(ckpt.entries.size());
    for (std::size_t i = 0; i < ckpt.entries.size(); ++i) {
        scope[i] = !prune_excluded(ckpt.profile, ckpt.entries[i].meta);
    }
    return scope;
}

namespace detail {

inline PenaltyScope resolve_scope(const ModelCheckpoint& ckpt, const PenaltyScope& scope)
{
    if (scope.empty()) {
        return default_scope(ckpt);
    }
    if (scope.size() != ckpt.entries.size()) {
        throw InvalidArgument("penalty scope has " + std::to_string(scope.size())
                              + " flags for " + std::to_string(ckpt.entries.size()) + " matrices");
    }
    return scope;
}

} // namespace detail

/// Entrywise L1 norm ||W||_1.
template <typename T>
[[nodiscard]] double l1_norm(const Matrix<T>& w) noexcept
{
    double sum = 0.0;
    for (const T v : w.data()) {
        sum += std::abs(static_cast<double>(v));
    }
    return sum;
}

/// Euclidean norm of column `c`.
template <typename T>
[[nodiscard]] double column_norm(const Matrix<T>& w, std::size_t c) noexcept
{
    double ss = 0.0;
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const double v = static_cast<double>(w(r, c));
        ss += v * v;
    }
    return std::sqrt(ss);
}

/// Sum of column Euclidean norms.
template <typename T>
[[nodiscard]] double group_l2_norm(const Matrix<T>& w) noexcept
{
    double sum = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) {
        sum += column_norm(w, c);
    }
    return sum;
}

/// Unweighted L1 term for one side: sum of ||W||_1 over in-scope matrices.
[[nodiscard]] inline double l1_penalty(const ModelCheckpoint& ckpt, Side side, const PenaltyScope& scope = {})
{
    const auto in = detail::resolve_scope(ckpt, scope);
    double sum = 0.0;
    for (std::size_t i = 0; i < ckpt.entries.size(); ++i) {
        if (in[i] && ckpt.entries[i].meta.side == side) {
            sum += l1_norm(ckpt.entries[i].matrix.values);
        }
    }
    return sum;
}

/// Unweighted group term for one side: sum of column norms over in-scope matrices.
[[nodiscard]] inline double group_l2_penalty(const ModelCheckpoint& ckpt, Side side,
                                             const PenaltyScope& scope = {})
{
    const auto in = detail::resolve_scope(ckpt, scope);
    double sum = 0.0;
    for (std::size_t i = 0; i < ckpt.entries.size(); ++i) {
        if (in[i] && ckpt.entries[i].meta.side == side) {
            sum += group_l2_norm(ckpt.entries[i].matrix.values);
        }
    }
    return sum;
}

struct PenaltyBreakdown
{
    double l1_encoder = 0.0;
    double l1_decoder = 0.0;
    double group_encoder = 0.0;
    double group_decoder = 0.0;
    double total = 0.0;
};

/// Components and the weighted total. Each lambda is applied exactly once.
[[nodiscard]] inline PenaltyBreakdown penalty_breakdown(const ModelCheckpoint& ckpt, const SGLConfig& cfg)
{
    cfg.validate();
    PenaltyBreakdown b;
    b.l1_encoder = l1_penalty(ckpt, Side::Encoder, cfg.scope);
    b.l1_decoder = l1_penalty(ckpt, Side::Decoder, cfg.scope);
    b.group_encoder = group_l2_penalty(ckpt, Side::Encoder, cfg.scope);
    b.group_decoder = group_l2_penalty(ckpt, Side::Decoder, cfg.scope);
    b.total = cfg.lambda1 * b.l1_encoder + cfg.lambda2 * b.l1_decoder + cfg.lambda3 * b.group_encoder
              + cfg.lambda4 * b.group_decoder;
    return b;
}

[[nodiscard]] inline double total_penalty(const ModelCheckpoint& ckpt, const SGLConfig& cfg)
{
    return penalty_breakdown(ckpt, cfg).total;
}

/// Penalty of a single matrix, lam_l1 * ||W||_1 + lam_gl2 * sum_i ||W^i||_2.
template <typename T>
[[nodiscard]] double matrix_penalty(const Matrix<T>& w, double lam_l1, double lam_gl2) noexcept
{
    return lam_l1 * l1_norm(w) + lam_gl2 * group_l2_norm(w);
}

/**
 * Subgradient of `lam_l1 * ||W||_1 + lam_gl2 * sum_i ||W^i||_2`.
 *
 * Entry (r, i) is `lam_l1 * sign(w) + lam_gl2 * w / ||W^i||_2`. At the kinks
 * the zero element of the subdifferential is chosen: sign(0) = 0, and a zero
 * column contributes no group term.
 */
template <typename T>
[[nodiscard]] Matrix<T> penalty_subgradient(const Matrix<T>& w, double lam_l1, double lam_gl2)
{
    Matrix<T> g(w.rows(), w.cols());
    for (std::size_t c = 0; c < w.cols(); ++c) {
        const double norm = column_norm(w, c);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double v = static_cast<double>(w(r, c));
            double d = 0.0;
            if (v > 0.0) d += lam_l1;
            if (v < 0.0) d -= lam_l1;
            if (norm > 0.0) d += lam_gl2 * v / norm;
            g(r, c) = static_cast<T>(d);
        }
    }
    return g;
}

[[nodiscard]] inline Matrix<float> penalty_subgradient(const WeightMatrix& w, double lam_l1, double lam_gl2)
{
    return penalty_subgradient(w.values, lam_l1, lam_gl2);
}

} // namespace sparsetrim
