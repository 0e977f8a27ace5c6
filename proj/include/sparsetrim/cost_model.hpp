// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sparsetrim/checkpoint.hpp"
#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"

namespace sparsetrim {

// FLOPs follow the 2-ops-per-MAC convention, per token, over linear weight
// products only. Attention scores and softmax are not counted: pruning does
// not change them.

/// Default token count: 30 s of audio at 50 encoder frames per second.
inline constexpr std::uint64_t kDefaultTokens = 1500;

enum class MemoryRepr { Dense, ColumnCompact, SparseCOO };

[[nodiscard]] inline std::string_view to_string(MemoryRepr r) noexcept
{
    switch (r) {
    case MemoryRepr::Dense: return "dense";
    case MemoryRepr::ColumnCompact: return "column-compact";
    case MemoryRepr::SparseCOO: return "sparse-coo";
    }
    return "dense";
}

[[nodiscard]] inline MemoryRepr parse_memory_repr(std::string_view s)
{
    const auto v = detail::lower(s);
    if (v == "dense") return MemoryRepr::Dense;
    if (v == "column-compact" || v == "columncompact" || v == "compact") return MemoryRepr::ColumnCompact;
    if (v == "sparse-coo" || v == "sparsecoo" || v == "coo") return MemoryRepr::SparseCOO;
    throw InvalidArgument("unknown memory representation '" + std::string(s) + "'");
}

namespace detail {

inline void require_tokens(std::uint64_t tokens)
{
    if (tokens == 0) {
        throw InvalidArgument("tokens must be at least 1");
    }
}

} // namespace detail

[[nodiscard]] inline std::uint64_t dense_flops(const WeightMatrix& w, std::uint64_t tokens)
{
    detail::require_tokens(tokens);
    return 2ULL * w.rows() * w.cols() * tokens;
}

/// FLOPs once all-zero columns are dropped from the product. Zeros inside
/// surviving columns still cost a MAC in a dense kernel.
[[nodiscard]] inline std::uint64_t pruned_flops(const WeightMatrix& w, std::uint64_t tokens)
{
    detail::require_tokens(tokens);
    return 2ULL * w.rows() * (w.cols() - w.values.zero_column_count()) * tokens;
}

[[nodiscard]] inline std::uint64_t memory_bytes(const WeightMatrix& w, MemoryRepr repr)
{
    constexpr std::uint64_t word = 4;
    switch (repr) {
    case MemoryRepr::Dense: return word * w.rows() * w.cols();
    case MemoryRepr::ColumnCompact: {
        const std::uint64_t kept = w.cols() - w.values.zero_column_count();
        return word * w.rows() * kept + word * kept;
    }
    case MemoryRepr::SparseCOO: return 3 * word * w.values.nonzero_count();
    }
    return 0;
}

[[nodiscard]] inline std::uint64_t memory_bytes(const ModelCheckpoint& ckpt, MemoryRepr repr)
{
    std::uint64_t total = 0;
    for (const auto& e : ckpt.entries) {
        total += memory_bytes(e.matrix, repr);
    }
    return total;
}

/// Percentage reduction 100 * (before - after) / before; 0 when before is 0.
[[nodiscard]] inline double reduction_percent(double before, double after) noexcept
{
    return before == 0.0 ? 0.0 : 100.0 * (before - after) / before;
}

struct CostReport
{
    MemoryRepr repr = MemoryRepr::Dense;
    std::uint64_t tokens = kDefaultTokens;
    std::uint64_t memory_bytes_before = 0;
    std::uint64_t memory_bytes_after = 0;
    std::uint64_t flops_before = 0;
    std::uint64_t flops_after = 0;
    std::uint64_t params_before = 0; ///< non-zero weights
    std::uint64_t params_after = 0;
    double memory_reduction_pct = 0.0;
    double flops_reduction_pct = 0.0;
    double params_reduction_pct = 0.0;
};

/// Compares two checkpoints with identical matrix names and shapes, both
/// measured in the same memory representation.
[[nodiscard]] inline CostReport cost_report(const ModelCheckpoint& before, const ModelCheckpoint& after,
                                            std::uint64_t tokens, MemoryRepr repr)
{
    detail::require_tokens(tokens);
    if (before.entries.size() != after.entries.size()) {
        throw InvalidArgument("checkpoints differ in matrix count (" + std::to_string(before.entries.size())
                              + " vs " + std::to_string(after.entries.size()) + ")");
    }
    CostReport r;
    r.repr = repr;
    r.tokens = tokens;
    for (std::size_t i = 0; i < before.entries.size(); ++i) {
        const auto& b = before.entries[i].matrix;
        const auto& a = after.entries[i].matrix;
        if (b.name != a.name) {
            throw InvalidArgument("matrix name mismatch at position " + std::to_string(i) + ": '" + b.name
                                  + "' vs '" + a.name + "'");
        }
        if (b.rows() != a.rows() || b.cols() != a.cols()) {
            throw InvalidArgument("shape mismatch for matrix '" + b.name + "'");
        }
        r.memory_bytes_before += memory_bytes(b, repr);
        r.memory_bytes_after += memory_bytes(a, repr);
        r.flops_before += pruned_flops(b, tokens);
        r.flops_after += pruned_flops(a, tokens);
        r.params_before += b.values.nonzero_count();
        r.params_after += a.values.nonzero_count();
    }
    r.memory_reduction_pct = reduction_percent(static_cast<double>(r.memory_bytes_before),
                                               static_cast<double>(r.memory_bytes_after));
    r.flops_reduction_pct = reduction_percent(static_cast<double>(r.flops_before), static_cast<double>(r.flops_after));
    r.params_reduction_pct =
        reduction_percent(static_cast<double>(r.params_before), static_cast<double>(r.params_after));
    return r;
}

} // namespace sparsetrim
