// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sparsetrim/error.hpp"

namespace sparsetrim {

/**
 * Dense row-major matrix.
 *
 * A "column" `i` is the set of entries `(r, i)` for every row `r`. Columns are
 * the structured pruning unit: with the `out x in` layout used throughout,
 * column `i` holds every outgoing connection of input neuron `i`.
 */
template <typename T>
class Matrix
{
public:
    using value_type = T;

    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_) {
            throw InvalidArgument("matrix data has " + std::to_string(data_.size())
                                  + " entries, expected " + std::to_string(rows_ * cols_));
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    [[nodiscard]] const T& operator()(std::size_t r, std::size_t c) const noexcept
    {
        return data_[r * cols_ + c];
    }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }

    /// Copies column `c` out (columns are strided in row-major storage).
    [[nodiscard]] std::vector<T> column(std::size_t c) const
    {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            out[r] = (*this)(r, c);
        }
        return out;
    }

    void set_column(std::size_t c, T value) noexcept
    {
        for (std::size_t r = 0; r < rows_; ++r) {
            (*this)(r, c) = value;
        }
    }

    [[nodiscard]] bool column_is_zero(std::size_t c) const noexcept
    {
        for (std::size_t r = 0; r < rows_; ++r) {
            if ((*this)(r, c) != T{}) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] std::size_t zero_column_count() const noexcept
    {
        std::size_t n = 0;
        for (std::size_t c = 0; c < cols_; ++c) {
            n += column_is_zero(c) ? 1 : 0;
        }
        return n;
    }

    [[nodiscard]] std::size_t nonzero_count() const noexcept
    {
        return static_cast<std::size_t>(
            std::count_if(data_.begin(), data_.end(), [](T v) { return v != T{}; }));
    }

    [[nodiscard]] bool all_finite() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
    }

    template <typename U>
    [[nodiscard]] Matrix<U> cast() const
    {
        std::vector<U> out(data_.size());
        std::transform(data_.begin(), data_.end(), out.begin(), [](T v) { return static_cast<U>(v); });
        return Matrix<U>(rows_, cols_, std::move(out));
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// A named 32-bit weight matrix, the unit the checkpoint store persists.
struct WeightMatrix
{
    std::string name;
    Matrix<float> values;

    [[nodiscard]] std::size_t rows() const noexcept { return values.rows(); }
    [[nodiscard]] std::size_t cols() const noexcept { return values.cols(); }

    friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;
};

} // namespace sparsetrim
