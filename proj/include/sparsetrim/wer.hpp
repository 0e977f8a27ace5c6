// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sparsetrim/error.hpp"
#include "sparsetrim/text_normalizer.hpp"

namespace sparsetrim {

struct EditCounts
{
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;

    [[nodiscard]] std::size_t total() const noexcept { return substitutions + deletions + insertions; }
    friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

struct WERResult
{
    EditCounts edits;
    std::size_t ref_len = 0;
    std::size_t hyp_len = 0;
    double wer = 0.0;
};

/// Splits on runs of ASCII whitespace.
[[nodiscard]] inline std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    constexpr std::string_view ws = " \t\n\r\f\v";
    while (i < text.size()) {
        const auto b = text.find_first_not_of(ws, i);
        if (b == std::string_view::npos) {
            break;
        }
        const auto e = std::min(text.find_first_of(ws, b), text.size());
        out.emplace_back(text.substr(b, e - b));
        i = e;
    }
    return out;
}

/**
 * Levenshtein alignment of token sequences. Among minimal scripts the
 * backtrace prefers, at each step, a diagonal move (match or substitution),
 * then a deletion, then an insertion.
 */
template <typename Token>
[[nodiscard]] EditCounts edit_distance(const std::vector<Token>& ref, const std::vector<Token>& hyp)
{
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    std::vector<std::size_t> d((n + 1) * (m + 1));
    const auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
        }
    }

    EditCounts c;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const bool same = ref[i - 1] == hyp[j - 1];
            if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
                c.substitutions += same ? 0 : 1;
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            ++c.deletions;
            --i;
        } else {
            ++c.insertions;
            --j;
        }
    }
    return c;
}

[[nodiscard]] inline WERResult make_wer_result(const EditCounts& e, std::size_t ref_len, std::size_t hyp_len)
{
    if (ref_len == 0) {
        throw InvalidArgument("undefined WER: the normalized reference is empty");
    }
    return WERResult{e, ref_len, hyp_len, static_cast<double>(e.total()) / static_cast<double>(ref_len)};
}

/// Normalizes both sides with the same mode, then scores token edits against
/// the normalized reference length.
[[nodiscard]] inline WERResult wer(std::string_view ref_text, std::string_view hyp_text, NormalizerMode mode,
                                   const VariantLexicon& lex = {}, const NormalizerOptions& opt = {})
{
    const auto ref = tokenize(normalize(ref_text, mode, lex, opt));
    const auto hyp = tokenize(normalize(hyp_text, mode, lex, opt));
    return make_wer_result(edit_distance(ref, hyp), ref.size(), hyp.size());
}

struct CorpusWER
{
    std::vector<WERResult> utterances;
    EditCounts edits;
    std::size_t ref_len = 0;
    double wer = 0.0; ///< sum of edits over sum of reference lengths
};

[[nodiscard]] inline CorpusWER corpus_wer(const std::vector<std::string>& refs, const std::vector<std::string>& hyps,
                                          NormalizerMode mode, const VariantLexicon& lex = {},
                                          const NormalizerOptions& opt = {})
{
    if (refs.size() != hyps.size()) {
        throw InvalidArgument("reference and hypothesis line counts differ (" + std::to_string(refs.size())
                              + " vs " + std::to_string(hyps.size()) + ")");
    }
    CorpusWER out;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        try {
            out.utterances.push_back(wer(refs[i], hyps[i], mode, lex, opt));
        } catch (const Error& e) {
            throw InvalidArgument("line " + std::to_string(i + 1) + ": " + e.what());
        }
        const auto& u = out.utterances.back();
        out.edits.substitutions += u.edits.substitutions;
        out.edits.deletions += u.edits.deletions;
        out.edits.insertions += u.edits.insertions;
        out.ref_len += u.ref_len;
    }
    if (out.ref_len == 0) {
        throw InvalidArgument("undefined WER: the corpus has no reference tokens");
    }
    out.wer = static_cast<double>(out.edits.total()) / static_cast<double>(out.ref_len);
    return out;
}

} // namespace sparsetrim
