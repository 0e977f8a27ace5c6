// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include "sparsetrim/error.hpp"

namespace sparsetrim {

/// Balanced is the Hindi normalizer used for WER scoring. Aggressive strips
/// every Devanagari mark (in the spirit of Whisper's basic normalizer);
/// Preserving keeps every mark (in the spirit of the Indic NLP normalizer).
enum class NormalizerMode { Aggressive, Preserving, Balanced };

[[nodiscard]] inline std::string_view to_string(NormalizerMode m) noexcept
{
    switch (m) {
    case NormalizerMode::Aggressive: return "aggressive";
    case NormalizerMode::Preserving: return "preserving";
    case NormalizerMode::Balanced: return "balanced";
    }
    return "balanced";
}

[[nodiscard]] inline NormalizerMode parse_normalizer_mode(std::string_view s)
{
    if (s == "aggressive" || s == "whisper") return NormalizerMode::Aggressive;
    if (s == "preserving" || s == "indic") return NormalizerMode::Preserving;
    if (s == "balanced") return NormalizerMode::Balanced;
    throw InvalidArgument("unknown normalizer mode '" + std::string(s)
                          + "' (expected aggressive, preserving or balanced)");
}

struct NormalizerOptions
{
    /// Also fold the long-u matra (U+0942) and independent UU (U+090A) into
    /// their short forms.
    bool merge_u_pair = false;
};

namespace devanagari {

inline constexpr char32_t kCandrabindu = 0x0901;
inline constexpr char32_t kAnusvara = 0x0902;
inline constexpr char32_t kVirama = 0x094D;
inline constexpr char32_t kNukta = 0x093C;
inline constexpr char32_t kDanda = 0x0964;
inline constexpr char32_t kDoubleDanda = 0x0965;
inline constexpr char32_t kVowelSignI = 0x093F;
inline constexpr char32_t kVowelSignII = 0x0940;
inline constexpr char32_t kVowelSignU = 0x0941;
inline constexpr char32_t kVowelSignUU = 0x0942;
inline constexpr char32_t kLetterI = 0x0907;
inline constexpr char32_t kLetterII = 0x0908;
inline constexpr char32_t kLetterU = 0x0909;
inline constexpr char32_t kLetterUU = 0x090A;

[[nodiscard]] constexpr bool is_consonant(char32_t c) noexcept
{
    return (c >= 0x0915 && c <= 0x0939) || (c >= 0x0958 && c <= 0x095F) || (c >= 0x0978 && c <= 0x097F);
}

/// Marks the aggressive mode removes.
[[nodiscard]] constexpr bool is_mark(char32_t c) noexcept
{
    return (c >= 0x0900 && c <= 0x0903) || (c >= 0x093A && c <= 0x094F) || (c >= 0x0951 && c <= 0x0957);
}

[[nodiscard]] constexpr bool is_digit(char32_t c) noexcept
{
    return (c >= U'0' && c <= U'9') || (c >= 0x0966 && c <= 0x096F);
}

} // namespace devanagari

namespace detail {

inline icu::UnicodeString utf8_to_icu(std::string_view text)
{
    UErrorCode err = U_ZERO_ERROR;
    int32_t len = 0;
    u_strFromUTF8(nullptr, 0, &len, text.data(), static_cast<int32_t>(text.size()), &err);
    if (err != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(err)) {
        throw FormatError("input is not valid UTF-8");
    }
    icu::UnicodeString out;
    err = U_ZERO_ERROR;
    UChar* buf = out.getBuffer(len);
    u_strFromUTF8(buf, len, nullptr, text.data(), static_cast<int32_t>(text.size()), &err);
    out.releaseBuffer(U_SUCCESS(err) ? len : 0);
    if (U_FAILURE(err)) {
        throw FormatError("input is not valid UTF-8");
    }
    return out;
}

inline std::u32string icu_to_u32(const icu::UnicodeString& s)
{
    std::u32string out;
    out.reserve(static_cast<std::size_t>(s.length()));
    for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) {
        out.push_back(static_cast<char32_t>(s.char32At(i)));
    }
    return out;
}

inline icu::UnicodeString u32_to_icu(const std::u32string& s)
{
    return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(s.data()),
                                         static_cast<int32_t>(s.size()));
}

inline std::u32string nfc(const std::u32string& s)
{
    UErrorCode err = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(err);
    if (U_FAILURE(err)) {
        throw Error("ICU NFC normalizer unavailable");
    }
    const auto out = n->normalize(u32_to_icu(s), err);
    if (U_FAILURE(err)) {
        throw Error("ICU normalization failed");
    }
    return icu_to_u32(out);
}

inline bool is_punct(char32_t c) noexcept
{
    return c == devanagari::kDanda || c == devanagari::kDoubleDanda || u_ispunct(static_cast<UChar32>(c));
}

inline bool is_space(char32_t c) noexcept
{
    return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

template <typename Pred>
std::u32string erase_if(std::u32string s, Pred pred)
{
    s.erase(std::remove_if(s.begin(), s.end(), pred), s.end());
    return s;
}

inline std::u32string expand_conjuncts(const std::u32string& s)
{
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == devanagari::kVirama && i + 1 < s.size() && devanagari::is_consonant(s[i + 1]) && i > 0) {
            // consonant (+ optional nukta) + virama + consonant
            std::size_t prev = i - 1;
            if (s[prev] == devanagari::kNukta && prev > 0) {
                --prev;
            }
            if (devanagari::is_consonant(s[prev])) {
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

inline std::u32string merge_vowels(std::u32string s, const NormalizerOptions& opt)
{
    for (auto& c : s) {
        if (c == devanagari::kVowelSignII) c = devanagari::kVowelSignI;
        else if (c == devanagari::kLetterII) c = devanagari::kLetterI;
        else if (opt.merge_u_pair && c == devanagari::kVowelSignUU) c = devanagari::kVowelSignU;
        else if (opt.merge_u_pair && c == devanagari::kLetterUU) c = devanagari::kLetterU;
    }
    return s;
}

/// One pass of the character-level rules for `mode`.
inline std::u32string character_pass(const std::u32string& in, NormalizerMode mode, const NormalizerOptions& opt)
{
    auto s = nfc(in);
    switch (mode) {
    case NormalizerMode::Balanced:
        s = erase_if(std::move(s), [](char32_t c) {
            return c == devanagari::kAnusvara || c == devanagari::kCandrabindu;
        });
        s = expand_conjuncts(s);
        s = erase_if(std::move(s), is_punct);
        s = merge_vowels(std::move(s), opt);
        break;
    case NormalizerMode::Aggressive:
        s = erase_if(std::move(s), is_punct);
        s = erase_if(std::move(s), devanagari::is_mark);
        break;
    case NormalizerMode::Preserving:
        s = erase_if(std::move(s), is_punct);
        break;
    }
    return s;
}

/// Character rules iterated to a fixed point. Deleting a mark or a
/// punctuation character can expose a new composable pair or a new
/// consonant-virama-consonant cluster; iterating keeps normalize idempotent.
inline std::u32string character_rules(std::u32string s, NormalizerMode mode, const NormalizerOptions& opt)
{
    for (int i = 0; i < 16; ++i) {
        auto next = character_pass(s, mode, opt);
        if (next == s) {
            return next;
        }
        s = std::move(next);
    }
    return nfc(s);
}

inline std::vector<std::u32string> split_ws(const std::u32string& s)
{
    std::vector<std::u32string> tokens;
    std::u32string cur;
    for (char32_t c : s) {
        if (is_space(c)) {
            if (!cur.empty()) {
                tokens.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) {
        tokens.push_back(std::move(cur));
    }
    return tokens;
}

} // namespace detail

[[nodiscard]] inline std::u32string utf8_to_u32(std::string_view text)
{
    return detail::icu_to_u32(detail::utf8_to_icu(text));
}

[[nodiscard]] inline std::string u32_to_utf8(const std::u32string& text)
{
    std::string out;
    detail::u32_to_icu(text).toUTF8String(out);
    return out;
}

/**
 * Surface-form to canonical-form map for morphological variants.
 *
 * Keys and values are stored after the balanced character rules, so lookups
 * work on normalized tokens and every canonical form is a fixed point of the
 * pipeline. A canonical form can never itself be rewritten.
 */
class VariantLexicon
{
public:
    VariantLexicon() = default;

    explicit VariantLexicon(const std::vector<std::pair<std::string, std::string>>& pairs,
                            const NormalizerOptions& opt = {})
    {
        for (const auto& [surface, canonical] : pairs) {
            add(surface, canonical, opt);
        }
    }

    /// Reads `canonical<TAB>variant[<TAB>variant...]` lines: the first form on
    /// a line is the one its variants are rewritten to. Blank lines and '#'
    /// comments are skipped.
    static VariantLexicon from_stream(std::istream& in, const std::string& origin = "lexicon",
                                      const NormalizerOptions& opt = {})
    {
        VariantLexicon lex;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty() || line.front() == '#') {
                continue;
            }
            std::vector<std::string> fields;
            for (std::size_t b = 0;;) {
                const auto tab = line.find('\t', b);
                fields.push_back(line.substr(b, tab == std::string::npos ? std::string::npos : tab - b));
                if (tab == std::string::npos) break;
                b = tab + 1;
            }
            if (fields.size() < 2) {
                throw FormatError(origin + ":" + std::to_string(line_no)
                                  + ": expected 'canonical<TAB>variant[<TAB>variant...]'");
            }
            try {
                for (std::size_t i = 1; i < fields.size(); ++i) {
                    lex.add(fields[i], fields[0], opt);
                }
            } catch (const Error& e) {
                throw FormatError(origin + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        return lex;
    }

    static VariantLexicon from_file(const std::filesystem::path& path, const NormalizerOptions& opt = {})
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw FormatError("cannot open lexicon '" + path.string() + "'");
        }
        return from_stream(in, path.string(), opt);
    }

    /// Built-in seed list of common Hindi spelling variants.
    static VariantLexicon seed(const NormalizerOptions& opt = {})
    {
        return VariantLexicon(
            {
                {"बताओ", "बताइए"},
                {"बताइये", "बताइए"},
                {"बताईये", "बताइए"},
                {"लिये", "लिए"},
                {"किये", "किए"},
                {"दिये", "दिए"},
                {"गये", "गए"},
                {"गयी", "गई"},
                {"नयी", "नई"},
                {"हुये", "हुए"},
                {"चाहिये", "चाहिए"},
                {"जाइये", "जाइए"},
            },
            opt);
    }

    void add(const std::string& surface, const std::string& canonical, const NormalizerOptions& opt = {})
    {
        const auto key = detail::character_rules(utf8_to_u32(surface), NormalizerMode::Balanced, opt);
        const auto value = detail::character_rules(utf8_to_u32(canonical), NormalizerMode::Balanced, opt);
        if (key.empty() || value.empty()) {
            throw FormatError("lexicon entries must be non-empty after normalization");
        }
        if (std::any_of(key.begin(), key.end(), detail::is_space)
            || std::any_of(value.begin(), value.end(), detail::is_space)) {
            throw FormatError("lexicon entries must be single tokens");
        }
        if (key == value) {
            return;
        }
        if (map_.contains(value)) {
            throw FormatError("canonical form '" + canonical + "' is itself mapped to another form");
        }
        for (const auto& [k, v] : map_) {
            if (v == key) {
                throw FormatError("surface form '" + surface + "' is already used as a canonical form");
            }
        }
        const auto [it, inserted] = map_.emplace(key, value);
        if (!inserted && it->second != value) {
            throw FormatError("surface form '" + surface + "' has two different canonical forms");
        }
    }

    [[nodiscard]] const std::u32string& lookup(const std::u32string& token) const noexcept
    {
        const auto it = map_.find(token);
        return it == map_.end() ? token : it->second;
    }

    [[nodiscard]] std::size_t size() const noexcept { return map_.size(); }
    [[nodiscard]] bool empty() const noexcept { return map_.empty(); }

private:
    std::map<std::u32string, std::u32string> map_;
};

/**
 * Normalizes one UTF-8 line.
 *
 * Balanced, in order: NFC; drop anusvara and candrabindu; drop the virama
 * inside consonant clusters; drop punctuation (danda included, digits kept);
 * fold long I into short I; rewrite lexicon variants per token; collapse
 * whitespace. Aggressive: NFC, punctuation, every Devanagari mark,
 * whitespace. Preserving: NFC, punctuation, whitespace.
 *
 * Throws FormatError on invalid UTF-8.
 */
[[nodiscard]] inline std::string normalize(std::string_view text, NormalizerMode mode,
                                           const VariantLexicon& lex = {}, const NormalizerOptions& opt = {})
{
    const auto chars = detail::character_rules(utf8_to_u32(text), mode, opt);
    std::u32string out;
    for (const auto& token : detail::split_ws(chars)) {
        if (!out.empty()) {
            out.push_back(U' ');
        }
        out += mode == NormalizerMode::Balanced ? lex.lookup(token) : token;
    }
    return u32_to_utf8(out);
}

} // namespace sparsetrim
