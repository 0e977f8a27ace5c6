// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace sparsetrim;

namespace {

constexpr NormalizerMode kModes[] = {NormalizerMode::Aggressive, NormalizerMode::Preserving, NormalizerMode::Balanced};

std::set<char32_t> marks(const std::string& s)
{
    std::set<char32_t> out;
    for (char32_t c : utf8_to_u32(s))
        if (oracle::is_devanagari_mark(c)) out.insert(c);
    return out;
}

std::vector<std::string> corpus(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < n; ++i) lines.push_back(oracle::devanagari_line(rng));
    return lines;
}

/// Applies the balanced steps one at a time on codepoints, recording the
/// text after each one. Input is assumed to already be NFC.
std::vector<std::u32string> balanced_trace(std::u32string s)
{
    std::vector<std::u32string> trace{s};
    std::u32string t;
    for (char32_t c : s)
        if (c != 0x0902 && c != 0x0901) t += c;
    trace.push_back(t);
    s = t;
    t.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool cons_before = i > 0 && s[i - 1] >= 0x0915 && s[i - 1] <= 0x0939;
        const bool cons_after = i + 1 < s.size() && s[i + 1] >= 0x0915 && s[i + 1] <= 0x0939;
        if (s[i] == 0x094D && cons_before && cons_after) continue;
        t += s[i];
    }
    trace.push_back(t);
    s = t;
    t.clear();
    for (char32_t c : s)
        if (c != 0x0964 && c != 0x0965 && c != U',' && c != U'.' && c != U'!' && c != U'?') t += c;
    trace.push_back(t);
    for (auto& c : t) {
        if (c == 0x0940) c = 0x093F;
        if (c == 0x0908) c = 0x0907;
    }
    trace.push_back(t);
    return trace;
}

} // namespace

TEST(Normalizer, LexiconExample)
{
    VariantLexicon lex;
    lex.add("बताओ", "बताइए");
    EXPECT_EQ(normalize("बताओ", NormalizerMode::Balanced, lex), "बताइए");
    EXPECT_EQ(normalize("बताओ", NormalizerMode::Balanced, VariantLexicon::seed()), "बताइए");
    EXPECT_EQ(normalize("आप बताइये ना", NormalizerMode::Balanced, VariantLexicon::seed()), "आप बताइए ना");
    // The comparison modes never consult the lexicon.
    EXPECT_EQ(normalize("बताओ", NormalizerMode::Preserving, lex), "बताओ");
}

TEST(Normalizer, NasalAndDandaExampleWithRuleTrace)
{
    const auto trace = balanced_trace(utf8_to_u32("हिंदी।"));
    EXPECT_EQ(u32_to_utf8(trace[3]), "हिदी"); // after nasal removal and punctuation removal
    EXPECT_EQ(u32_to_utf8(trace.back()), "हिदि");
    EXPECT_EQ(normalize("हिंदी।", NormalizerMode::Balanced), u32_to_utf8(trace.back()));
}

TEST(Normalizer, RuleTraceAgreesOnSimpleWords)
{
    for (const char* w : {"संस्कृत", "पत्नी", "चाँद", "क्या!", "ईश्वर.", "मंत्री॥"}) {
        EXPECT_EQ(normalize(w, NormalizerMode::Balanced), u32_to_utf8(balanced_trace(utf8_to_u32(w)).back())) << w;
    }
}

TEST(Normalizer, EmptyString)
{
    for (auto m : kModes) EXPECT_EQ(normalize("", m), "");
    for (auto m : kModes) EXPECT_EQ(normalize(" \t ।", m), "");
}

TEST(Normalizer, LongIFolds)
{
    EXPECT_EQ(normalize("नदी", NormalizerMode::Balanced), "नदि");
    EXPECT_EQ(normalize("ईख", NormalizerMode::Balanced), "इख");
    EXPECT_EQ(normalize("नदी", NormalizerMode::Preserving), "नदी");
    EXPECT_EQ(normalize("नदी", NormalizerMode::Aggressive), "नद");
}

TEST(Normalizer, UPairMergeIsOptIn)
{
    NormalizerOptions opt;
    EXPECT_EQ(normalize("फूल ऊपर", NormalizerMode::Balanced, {}, opt), "फूल ऊपर");
    opt.merge_u_pair = true;
    EXPECT_EQ(normalize("फूल ऊपर", NormalizerMode::Balanced, {}, opt), "फुल उपर");
}

TEST(Normalizer, ConjunctsAndNukta)
{
    EXPECT_EQ(normalize("क्षमा", NormalizerMode::Balanced), "कषमा");
    EXPECT_EQ(normalize("ज़्यादा", NormalizerMode::Balanced), "ज़यादा");
    EXPECT_EQ(normalize("क़", NormalizerMode::Balanced), "क़"); // NFC decomposes QA
    EXPECT_EQ(normalize("क्", NormalizerMode::Balanced), "क्"); // word-final virama is not a cluster
    // Removing the anusvara exposes a new cluster; the result is still a fixed point.
    const auto once = normalize("क्ंष", NormalizerMode::Balanced);
    EXPECT_EQ(normalize(once, NormalizerMode::Balanced), once);
}

TEST(Normalizer, DigitsAndPunctuation)
{
    for (auto m : kModes) {
        EXPECT_EQ(normalize("१२३, 456! (७८९)", m), "१२३ 456 ७८९");
        EXPECT_EQ(normalize("Hello, World!", m), "Hello World");
    }
}

TEST(Normalizer, InvalidUtf8IsRejected)
{
    for (std::string bad : {std::string("\xff"), std::string("\xc0\xaf"), std::string("\xed\xa0\x80"),
                            std::string("ab\xe0\xa4")}) {
        EXPECT_THROW((void)normalize(bad, NormalizerMode::Balanced), FormatError);
    }
}

TEST(Normalizer, CorpusProperties)
{
    const auto lex = VariantLexicon::seed();
    for (const auto& line : corpus(300, 99)) {
        std::map<NormalizerMode, std::string> out;
        for (auto m : kModes) {
            const auto a = normalize(line, m, lex);
            EXPECT_EQ(normalize(a, m, lex), a) << line;
            EXPECT_EQ(a.find("  "), std::string::npos);
            EXPECT_EQ(a.find_first_of("\t\n\r"), std::string::npos);
            if (!a.empty()) {
                EXPECT_NE(a.front(), ' ');
                EXPECT_NE(a.back(), ' ');
            }
            // Digits survive in order.
            std::u32string din, dout;
            for (char32_t c : utf8_to_u32(line))
                if ((c >= U'0' && c <= U'9') || (c >= 0x0966 && c <= 0x096F)) din += c;
            for (char32_t c : utf8_to_u32(a))
                if ((c >= U'0' && c <= U'9') || (c >= 0x0966 && c <= 0x096F)) dout += c;
            EXPECT_EQ(din, dout) << line;
            out[m] = a;
        }
        EXPECT_LE(utf8_to_u32(out[NormalizerMode::Aggressive]).size(), utf8_to_u32(line).size());
        EXPECT_TRUE(marks(out[NormalizerMode::Aggressive]).empty());
        // Balanced keeps a subset of the preserved marks, with long I counted as short I.
        auto kept = marks(out[NormalizerMode::Preserving]);
        if (kept.erase(0x0940)) kept.insert(0x093F);
        for (char32_t c : marks(out[NormalizerMode::Balanced])) EXPECT_TRUE(kept.count(c)) << line;
    }
}

TEST(Lexicon, Invariants)
{
    const auto lex = VariantLexicon::seed();
    EXPECT_GE(lex.size(), 10u);
    for (const char* canonical : {"बताइए", "लिए", "गए", "चाहिए"}) {
        EXPECT_EQ(normalize(canonical, NormalizerMode::Balanced, lex), canonical);
    }
    VariantLexicon l;
    l.add("x", "y");
    EXPECT_THROW(l.add("y", "z"), FormatError);   // canonical cannot be rewritten
    EXPECT_THROW(l.add("w", "x"), FormatError);   // surface cannot be a target
    EXPECT_THROW(l.add("x", "q"), FormatError);   // two targets
    EXPECT_THROW(l.add("a b", "c"), FormatError); // single tokens only
    EXPECT_THROW(l.add("।", "c"), FormatError);   // empty after normalization
    EXPECT_NO_THROW(l.add("x", "y"));
    l.add("नदी", "नदि"); // identity after folding: ignored
    EXPECT_EQ(l.size(), 1u);
}

TEST(Lexicon, FileFormat)
{
    std::istringstream ok("# comment\n\nबताइए\tबताओ\tबताइये\r\nगए\tगये\n");
    const auto lex = VariantLexicon::from_stream(ok);
    EXPECT_EQ(lex.size(), 3u);
    EXPECT_EQ(normalize("बताओ गये", NormalizerMode::Balanced, lex), "बताइए गए");

    std::istringstream bad("only-one-field\n");
    EXPECT_THROW((void)VariantLexicon::from_stream(bad), FormatError);
    std::istringstream chain("b\ta\nc\tb\n");
    try {
        (void)VariantLexicon::from_stream(chain, "lex.tsv");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("lex.tsv:2"), std::string::npos) << e.what();
    }
    const auto shipped = VariantLexicon::from_file(SPARSETRIM_DATA_DIR "/lexicon_hi.tsv");
    EXPECT_EQ(shipped.size(), VariantLexicon::seed().size());
    EXPECT_THROW((void)VariantLexicon::from_file("/nonexistent/lexicon.tsv"), FormatError);
}
