// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"

namespace sparsetrim {

/// Descriptive statistics of a weight population.
struct WeightStats
{
    double mu = 0.0;
    double sigma = 0.0; ///< population standard deviation
    double q25 = 0.0;
    double q75 = 0.0;
    double w_max = 0.0; ///< max |w|
    std::size_t n = 0;
};

/// Shape of a weight distribution around its mean.
enum class DistClass { A_HighlySpiked, B_NarrowSpread, C_WideSpread };

[[nodiscard]] inline std::string_view to_string(DistClass c) noexcept
{
    switch (c) {
    case DistClass::A_HighlySpiked: return "A";
    case DistClass::B_NarrowSpread: return "B";
    case DistClass::C_WideSpread: return "C";
    }
    return "C";
}

[[nodiscard]] inline DistClass parse_dist_class(std::string_view s)
{
    if (s == "A" || s == "a") return DistClass::A_HighlySpiked;
    if (s == "B" || s == "b") return DistClass::B_NarrowSpread;
    if (s == "C" || s == "c") return DistClass::C_WideSpread;
    throw FormatError("unknown distribution class '" + std::string(s) + "'");
}

struct ColumnStats
{
    double sigma_c = 0.0;
    double approx_sparsity = 0.0;
};

/// Quartile-spread separators: r < kSpikedBound is A, r < kNarrowBound is B,
/// anything wider is C. Ties resolve upward.
inline constexpr double kSpikedBound = 0.05;
inline constexpr double kNarrowBound = 0.5;

/// Almost-zero cutoff as a multiple of the column standard deviation.
inline constexpr double kAlmostZeroFactor = 0.1;

/// Default approximate-sparsity level at which a whole column is pruned.
inline constexpr double kDefaultThetaC = 0.9;

/// Linear-interpolation percentile of an ascending-sorted sample, p in [0, 1].
[[nodiscard]] inline double sorted_percentile(std::span<const double> sorted, double p) noexcept
{
    if (sorted.empty()) {
        return 0.0;
    }
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

template <typename T>
[[nodiscard]] WeightStats compute_stats(std::span<const T> values)
{
    if (values.empty()) {
        throw InvalidArgument("statistics of an empty weight set are undefined");
    }
    WeightStats s;
    s.n = values.size();

    std::vector<double> sorted(values.begin(), values.end());
    double sum = 0.0;
    for (double v : sorted) {
        sum += v;
        s.w_max = std::max(s.w_max, std::abs(v));
    }
    s.mu = sum / static_cast<double>(s.n);

    double ss = 0.0;
    for (double v : sorted) {
        const double d = v - s.mu;
        ss += d * d;
    }
    s.sigma = std::sqrt(ss / static_cast<double>(s.n));
    // Rounding can leave a tiny positive sigma for a constant input.
    if (std::all_of(sorted.begin(), sorted.end(), [&](double v) { return v == sorted.front(); })) {
        s.sigma = 0.0;
    }

    std::sort(sorted.begin(), sorted.end());
    s.q25 = sorted_percentile(sorted, 0.25);
    s.q75 = sorted_percentile(sorted, 0.75);
    return s;
}

[[nodiscard]] inline WeightStats matrix_stats(const WeightMatrix& w)
{
    if (w.values.empty()) {
        throw InvalidArgument("matrix '" + w.name + "' is empty");
    }
    return compute_stats(w.values.data());
}

/// Normalized quartile spread max(|q25 - mu|, |q75 - mu|) / sigma, 0 when sigma = 0.
[[nodiscard]] inline double quartile_spread(const WeightStats& s) noexcept
{
    if (s.sigma == 0.0) {
        return 0.0;
    }
    return std::max(std::abs(s.q25 - s.mu), std::abs(s.q75 - s.mu)) / s.sigma;
}

[[nodiscard]] inline DistClass classify_distribution(const WeightStats& s) noexcept
{
    const double r = quartile_spread(s);
    if (r < kSpikedBound) {
        return DistClass::A_HighlySpiked;
    }
    if (r < kNarrowBound) {
        return DistClass::B_NarrowSpread;
    }
    return DistClass::C_WideSpread;
}

/// T1: cutoff for highly spiked layers.
[[nodiscard]] inline double threshold_T1(const WeightStats& s) noexcept { return 0.1 * s.sigma; }

/// T2: the larger quartile magnitude, for narrowly spread layers.
[[nodiscard]] inline double threshold_T2(const WeightStats& s) noexcept
{
    return std::max(std::abs(s.q25), std::abs(s.q75));
}

/// T3: fraction `eta` of the largest magnitude, for widely spread layers.
[[nodiscard]] inline double threshold_T3(const WeightStats& s, double eta)
{
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw InvalidArgument("eta must be a positive finite number");
    }
    return eta * s.w_max;
}

/// Fraction of entries with |w| < theta0 (strict).
template <typename T>
[[nodiscard]] double approx_sparsity(std::span<const T> column, double theta0)
{
    if (column.empty()) {
        throw InvalidArgument("approximate sparsity of an empty column is undefined");
    }
    if (!(theta0 > 0.0)) {
        throw InvalidArgument("theta0 must be positive");
    }
    std::size_t hits = 0;
    for (const T v : column) {
        hits += std::abs(static_cast<double>(v)) < theta0 ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(column.size());
}

/// Approximate sparsity with the column-relative cutoff `theta0 = 0.1 sigma_c`.
/// A constant column has theta0 = 0, so only exact zeros count there.
template <typename T>
[[nodiscard]] double column_sparsity(std::span<const T> column, double theta0)
{
    if (theta0 > 0.0) {
        return approx_sparsity(column, theta0);
    }
    if (column.empty()) {
        throw InvalidArgument("approximate sparsity of an empty column is undefined");
    }
    const auto zeros = std::count(column.begin(), column.end(), T{});
    return static_cast<double>(zeros) / static_cast<double>(column.size());
}

[[nodiscard]] inline double population_sigma(std::span<const float> values) noexcept
{
    if (values.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (float v : values) sum += v;
    const double mu = sum / static_cast<double>(values.size());
    double ss = 0.0;
    bool constant = true;
    for (float v : values) {
        const double d = v - mu;
        ss += d * d;
        constant = constant && v == values.front();
    }
    return constant ? 0.0 : std::sqrt(ss / static_cast<double>(values.size()));
}

[[nodiscard]] inline ColumnStats column_stats(const Matrix<float>& w, std::size_t c)
{
    const auto col = w.column(c);
    ColumnStats s;
    s.sigma_c = population_sigma(col);
    s.approx_sparsity = column_sparsity<float>(col, kAlmostZeroFactor * s.sigma_c);
    return s;
}

[[nodiscard]] inline std::vector<ColumnStats> all_column_stats(const Matrix<float>& w)
{
    std::vector<ColumnStats> out;
    out.reserve(w.cols());
    for (std::size_t c = 0; c < w.cols(); ++c) {
        out.push_back(column_stats(w, c));
    }
    return out;
}

/// Ten-bin histogram of per-column approximate sparsity over [0, 1]; the last
/// bin is closed so that Sc = 1 lands in it.
[[nodiscard]] inline std::array<std::size_t, 10> sparsity_histogram(const Matrix<float>& w)
{
    std::array<std::size_t, 10> bins{};
    for (const auto& cs : all_column_stats(w)) {
        const auto b = std::min<std::size_t>(9, static_cast<std::size_t>(cs.approx_sparsity * 10.0));
        ++bins[b];
    }
    return bins;
}

} // namespace sparsetrim
