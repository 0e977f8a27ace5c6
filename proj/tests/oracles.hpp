// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used only by the tests. They are
// written without calling into the library so that a shared bug cannot
// make both sides agree.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sparsetrim/sparsetrim.hpp"

namespace oracle {

/// Linear-interpolation percentile found with nth_element on a copy.
inline double percentile(std::vector<double> v, double p)
{
    const long double pos = static_cast<long double>(p) * static_cast<long double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const long double a = v[lo];
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(hi), v.end());
    const long double b = v[hi];
    return static_cast<double>(a + (b - a) * (pos - static_cast<long double>(lo)));
}

struct Moments
{
    double mean = 0, sigma = 0, max_abs = 0;
};

inline Moments moments(const std::vector<float>& v)
{
    long double s = 0;
    double mx = 0;
    for (float x : v) {
        s += x;
        mx = std::max(mx, std::fabs(static_cast<double>(x)));
    }
    const long double mean = s / static_cast<long double>(v.size());
    long double ss = 0;
    for (float x : v) {
        ss += (x - mean) * (x - mean);
    }
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(ss / static_cast<long double>(v.size()))), mx};
}

inline std::vector<float> flat(const sparsetrim::Matrix<float>& m)
{
    return {m.data().begin(), m.data().end()};
}

inline std::vector<float> column(const sparsetrim::Matrix<float>& m, std::size_t c)
{
    std::vector<float> out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out.push_back(m(r, c));
    }
    return out;
}

inline double count_below(const std::vector<float>& col, double theta)
{
    std::size_t k = 0;
    for (float x : col) {
        if (std::fabs(static_cast<double>(x)) < theta) ++k;
    }
    return static_cast<double>(k) / static_cast<double>(col.size());
}

inline double l1(const sparsetrim::Matrix<float>& m)
{
    double s = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) s += std::fabs(static_cast<double>(m(r, c)));
    return s;
}

inline double group_l2(const sparsetrim::Matrix<float>& m)
{
    double s = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double sq = 0;
        for (std::size_t r = 0; r < m.rows(); ++r) sq += static_cast<double>(m(r, c)) * static_cast<double>(m(r, c));
        s += std::sqrt(sq);
    }
    return s;
}

inline std::size_t nnz(const sparsetrim::ModelCheckpoint& c)
{
    std::size_t k = 0;
    for (const auto& e : c.entries)
        for (float x : e.matrix.values.data()) k += x != 0.0f ? 1 : 0;
    return k;
}

inline std::size_t zero_columns(const sparsetrim::Matrix<float>& m)
{
    std::size_t k = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        bool z = true;
        for (std::size_t r = 0; r < m.rows(); ++r) z = z && m(r, c) == 0.0f;
        k += z ? 1 : 0;
    }
    return k;
}

/**
 * Minimal edit cost by enumerating every order-preserving pairing of
 * reference and hypothesis positions. A pairing with k pairs, s of them
 * mismatched, costs s + (n - k) + (m - k); every edit script corresponds to
 * one such pairing.
 */
template <typename T>
std::size_t min_edit_cost(const std::vector<T>& a, const std::vector<T>& b)
{
    const std::size_t n = a.size(), m = b.size();
    std::size_t best = n + m;
    for (std::uint32_t ma = 0; ma < (1u << n); ++ma) {
        for (std::uint32_t mb = 0; mb < (1u << m); ++mb) {
            if (std::popcount(ma) != std::popcount(mb)) continue;
            std::size_t i = 0, j = 0, mism = 0;
            const auto k = static_cast<std::size_t>(std::popcount(ma));
            for (std::size_t p = 0; p < k; ++p) {
                while (!(ma >> i & 1u)) ++i;
                while (!(mb >> j & 1u)) ++j;
                mism += a[i] == b[j] ? 0 : 1;
                ++i;
                ++j;
            }
            best = std::min(best, mism + (n - k) + (m - k));
        }
    }
    return best;
}

inline bool bit_equal(const sparsetrim::Matrix<float>& a, const sparsetrim::Matrix<float>& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols()
           && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

inline bool bit_equal(const sparsetrim::ModelCheckpoint& a, const sparsetrim::ModelCheckpoint& b)
{
    if (a.profile != b.profile || a.pruned_with != b.pruned_with || a.entries.size() != b.entries.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        const auto& x = a.entries[i];
        const auto& y = b.entries[i];
        const auto& mx = x.meta;
        const auto& my = y.meta;
        if (x.matrix.name != y.matrix.name || !bit_equal(x.matrix.values, y.matrix.values) || mx.side != my.side
            || mx.kind != my.kind || mx.layer_index != my.layer_index || mx.in_p1 != my.in_p1
            || x.frozen_theta_w.has_value() != y.frozen_theta_w.has_value()
            || (x.frozen_theta_w && std::memcmp(&*x.frozen_theta_w, &*y.frozen_theta_w, sizeof(double)) != 0)) {
            return false;
        }
    }
    return true;
}

/// Random checkpoint exercising awkward float values (denormals, signed
/// zero, extremes) and every metadata field.
inline sparsetrim::ModelCheckpoint random_checkpoint(std::mt19937_64& rng)
{
    using namespace sparsetrim;
    ModelCheckpoint c;
    c.profile = Profile::Custom;
    std::uniform_int_distribution<std::size_t> dim(1, 9), count(0, 5), pick(0, 9);
    std::normal_distribution<float> normal(0.0f, 0.05f);
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        Matrix<float> m(dim(rng), dim(rng));
        for (auto& x : m.data()) {
            switch (pick(rng)) {
            case 0: x = -0.0f; break;
            case 1: x = std::numeric_limits<float>::denorm_min(); break;
            case 2: x = std::numeric_limits<float>::max(); break;
            case 3: x = -std::numeric_limits<float>::min(); break;
            default: x = normal(rng);
            }
        }
        LayerMeta meta{i % 2 ? Side::Decoder : Side::Encoder, static_cast<LayerKind>(pick(rng) % 5), i, false};
        std::optional<double> theta;
        if (pick(rng) < 3) theta = std::fabs(static_cast<double>(normal(rng))) / 3.0;
        c.entries.push_back(CheckpointEntry{WeightMatrix{"m" + std::to_string(i) + (i % 3 ? ".w" : ""), m}, meta, theta});
    }
    if (pick(rng) < 5) c.pruned_with = "t3 eta=0.1";
    return c;
}


/// Random Devanagari text with conjuncts, nukta forms, nasal marks, long and
/// short vowels, punctuation, digits, lexicon variants, Latin words and
/// irregular whitespace. Returned as UTF-8.
inline std::string devanagari_line(std::mt19937_64& rng)
{
    const std::u32string consonants = U"कखगघचछजझटठडढतथदधनपफबभमयरलवशषसह";
    const std::u32string matras = U"\u093E\u093F\u0940\u0941\u0942\u0943\u0947\u0948\u094B\u094C";
    const std::u32string vowels = U"अआइईउऊएऐओऔ";
    const std::u32string punct = U"\u0964\u0965,.?!\"'-:;()";
    const std::vector<std::u32string> words{U"बताओ", U"बताइये", U"गयी", U"लिये", U"चाहिये", U"हिंदी",
                                            U"क़िताब", U"\u0958\u093C", U"ज़्यादा", U"hello", U"café"};
    const std::u32string digits = U"०१२३४५६७८९0123456789";
    std::uniform_int_distribution<int> die(0, 99);
    const auto any = [&](const std::u32string& s) { return s[static_cast<std::size_t>(die(rng)) % s.size()]; };

    std::u32string out;
    const int n_words = 1 + die(rng) % 8;
    for (int w = 0; w < n_words; ++w) {
        const int kind = die(rng);
        if (kind < 15) {
            out += words[static_cast<std::size_t>(die(rng)) % words.size()];
        } else if (kind < 22) {
            for (int k = 0; k < 1 + die(rng) % 3; ++k) out += any(digits);
        } else {
            for (int syl = 0; syl < 1 + die(rng) % 4; ++syl) {
                if (die(rng) < 10) {
                    out += any(vowels);
                } else {
                    out += any(consonants);
                    if (die(rng) < 8) out += U'\u093C';
                    if (die(rng) < 20) {
                        out += U'\u094D';
                        out += any(consonants);
                    }
                    if (die(rng) < 60) out += any(matras);
                }
                const int nasal = die(rng);
                if (nasal < 10) out += U'\u0902';
                else if (nasal < 15) out += U'\u0901';
                else if (nasal < 17) out += U'\u0903';
            }
        }
        if (die(rng) < 25) out += any(punct);
        const int gap = die(rng);
        out += gap < 70 ? U" " : gap < 85 ? U"  " : gap < 95 ? U"\t" : U" \u3000 ";
    }
    if (die(rng) < 40) out += U'\u0964';
    return sparsetrim::u32_to_utf8(out);
}

/// Devanagari combining marks as enumerated for the aggressive mode.
inline bool is_devanagari_mark(char32_t c)
{
    return (c >= 0x0900 && c <= 0x0903) || (c >= 0x093A && c <= 0x094F) || (c >= 0x0951 && c <= 0x0957);
}

/// Scratch directory removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path()
                / ("sparsetrim-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace oracle
