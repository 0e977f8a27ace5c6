// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsetrim/sparsetrim.hpp"

namespace sparsetrim::cli {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string num(double v)
{
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6g", v);
    return buf.data();
}

inline std::string pct(double v)
{
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.2f%%", v);
    return buf.data();
}

/// Left-aligned plain-text table with two-space column gaps.
class Table
{
public:
    explicit Table(std::vector<std::string> header) : rows_{std::move(header)} {}

    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    void print(std::ostream& os) const
    {
        std::vector<std::size_t> width;
        for (const auto& r : rows_) {
            width.resize(std::max(width.size(), r.size()));
            for (std::size_t i = 0; i < r.size(); ++i) {
                width[i] = std::max(width[i], display_width(r[i]));
            }
        }
        for (const auto& r : rows_) {
            std::string line;
            for (std::size_t i = 0; i < r.size(); ++i) {
                line += r[i];
                if (i + 1 < r.size()) {
                    line.append(width[i] - display_width(r[i]) + 2, ' ');
                }
            }
            os << line << '\n';
        }
    }

private:
    static std::size_t display_width(const std::string& s)
    {
        std::size_t n = 0;
        for (unsigned char c : s) {
            n += (c & 0xC0) != 0x80 ? 1 : 0;
        }
        return n;
    }

    std::vector<std::vector<std::string>> rows_;
};

inline std::vector<std::string> read_lines(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

inline json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

inline void require_distinct(const std::filesystem::path& in, const std::filesystem::path& out)
{
    if (std::filesystem::weakly_canonical(in) == std::filesystem::weakly_canonical(out)) {
        throw InvalidArgument("output path must differ from the input path '" + in.string() + "'");
    }
}

inline ToyConfig toy_config_from_json(const json& j)
{
    ToyConfig c;
    try {
        c.layer_widths = j.value("layer_widths", c.layer_widths);
        c.steps = j.value("steps", c.steps);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.schedule = parse_lr_schedule(j.value("schedule", std::string(to_string(c.schedule))));
        c.seed = j.value("seed", c.seed);
        if (j.contains("sgl")) {
            const auto& s = j.at("sgl");
            c.sgl.lambda1 = s.value("lambda1", 0.0);
            c.sgl.lambda2 = s.value("lambda2", 0.0);
            c.sgl.lambda3 = s.value("lambda3", 0.0);
            c.sgl.lambda4 = s.value("lambda4", 0.0);
        }
        if (j.contains("task")) {
            const auto& t = j.at("task");
            c.task.input_dim = t.value("input_dim", c.task.input_dim);
            c.task.classes = t.value("classes", c.task.classes);
            c.task.samples = t.value("samples", c.task.samples);
            c.task.informative = t.value("informative", c.task.informative);
            c.task.separation = t.value("separation", c.task.separation);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("toy config: ") + e.what());
    }
    c.validate();
    return c;
}

inline SynthRecipe recipe_from_json(const json& j)
{
    SynthRecipe r;
    try {
        r.profile = parse_profile(j.value("profile", std::string("Custom")));
        for (const auto& m : j.at("matrices")) {
            MatrixRecipe mr;
            mr.name = m.at("name").get<std::string>();
            mr.rows = m.at("rows").get<std::size_t>();
            mr.cols = m.at("cols").get<std::size_t>();
            mr.dist = parse_dist_class(m.at("class").get<std::string>());
            mr.near_zero_fraction = m.value("near_zero_fraction", 0.0);
            mr.meta.side = parse_side(m.value("side", std::string("encoder")));
            mr.meta.kind = parse_layer_kind(m.value("kind", std::string("FC")));
            mr.meta.layer_index = m.value("layer_index", std::size_t{0});
            mr.meta.in_p1 = m.value("in_p1", false);
            mr.scale = m.value("scale", mr.scale);
            mr.mean = m.value("mean", mr.mean);
            r.matrices.push_back(std::move(mr));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("synth recipe: ") + e.what());
    }
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the process exit status.

inline int cmd_analyze(const std::string& in_path, bool as_json, std::ostream& out)
{
    const auto ckpt = load_checkpoint(in_path);
    detail::Table t({"name", "rows", "cols", "mu", "sigma", "q25", "q75", "w_max", "class", "sc_hist"});
    for (const auto& e : ckpt.entries) {
        const auto s = matrix_stats(e.matrix);
        const auto cls = classify_distribution(s);
        const auto hist = sparsity_histogram(e.matrix.values);
        if (as_json) {
            json j{{"name", e.matrix.name}, {"rows", e.matrix.rows()}, {"cols", e.matrix.cols()},
                   {"mu", s.mu}, {"sigma", s.sigma}, {"q25", s.q25}, {"q75", s.q75}, {"w_max", s.w_max},
                   {"class", to_string(cls)}, {"sc_hist", hist}};
            out << j.dump() << '\n';
            continue;
        }
        std::string h;
        for (std::size_t i = 0; i < hist.size(); ++i) {
            h += (i ? "," : "") + std::to_string(hist[i]);
        }
        t.add({e.matrix.name, std::to_string(e.matrix.rows()), std::to_string(e.matrix.cols()), detail::num(s.mu),
               detail::num(s.sigma), detail::num(s.q25), detail::num(s.q75), detail::num(s.w_max),
               std::string(to_string(cls)), h});
    }
    if (!as_json) {
        t.print(out);
    }
    return 0;
}

inline int cmd_penalty(const std::string& in_path, const SGLConfig& cfg, bool as_json, std::ostream& out)
{
    const auto ckpt = load_checkpoint(in_path);
    const auto b = penalty_breakdown(ckpt, cfg);
    if (as_json) {
        out << json{{"l1_encoder", b.l1_encoder}, {"l1_decoder", b.l1_decoder}, {"group_l2_encoder", b.group_encoder},
                    {"group_l2_decoder", b.group_decoder}, {"lambda1", cfg.lambda1}, {"lambda2", cfg.lambda2},
                    {"lambda3", cfg.lambda3}, {"lambda4", cfg.lambda4}, {"total", b.total}}
                   .dump()
            << '\n';
        return 0;
    }
    detail::Table t({"term", "side", "unweighted", "lambda", "weighted"});
    t.add({"L1", "encoder", detail::num(b.l1_encoder), detail::num(cfg.lambda1), detail::num(cfg.lambda1 * b.l1_encoder)});
    t.add({"L1", "decoder", detail::num(b.l1_decoder), detail::num(cfg.lambda2), detail::num(cfg.lambda2 * b.l1_decoder)});
    t.add({"group-L2", "encoder", detail::num(b.group_encoder), detail::num(cfg.lambda3),
           detail::num(cfg.lambda3 * b.group_encoder)});
    t.add({"group-L2", "decoder", detail::num(b.group_decoder), detail::num(cfg.lambda4),
           detail::num(cfg.lambda4 * b.group_decoder)});
    t.add({"total", "", "", "", detail::num(b.total)});
    t.print(out);
    return 0;
}

inline int cmd_train_toy(const std::string& config_path, const std::string& out_path, const std::string& metrics_path,
                         std::optional<std::uint64_t> seed, bool as_json, std::ostream& out)
{
    auto cfg = detail::toy_config_from_json(detail::read_json(config_path));
    if (seed) {
        cfg.seed = *seed;
    }
    const auto res = train_toy(cfg);
    save_checkpoint(res.checkpoint, out_path);

    std::ostringstream table;
    if (as_json) {
        for (const auto& m : res.metrics) {
            table << json{{"step", m.step}, {"lr", m.learning_rate}, {"cross_entropy", m.cross_entropy},
                          {"penalty", m.penalty}, {"total", m.total}}
                         .dump()
                  << '\n';
        }
    } else {
        detail::Table t({"step", "lr", "cross_entropy", "penalty", "total"});
        for (const auto& m : res.metrics) {
            t.add({std::to_string(m.step), detail::num(m.learning_rate), detail::num(m.cross_entropy),
                   detail::num(m.penalty), detail::num(m.total)});
        }
        t.print(table);
    }
    if (!metrics_path.empty()) {
        std::ofstream mf(metrics_path, std::ios::binary | std::ios::trunc);
        if (!mf) {
            throw Error("cannot open '" + metrics_path + "' for writing");
        }
        mf << table.str();
    } else {
        out << table.str();
    }
    const auto& last = res.metrics.back();
    if (as_json) {
        out << json{{"final_cross_entropy", last.cross_entropy}, {"final_penalty", last.penalty},
                    {"accuracy", res.accuracy}, {"sparse_columns", count_sparse_columns(res.checkpoint)}}
                   .dump()
            << '\n';
    } else {
        out << "accuracy " << detail::num(res.accuracy) << "  sparse_columns "
            << count_sparse_columns(res.checkpoint) << '\n';
    }
    return 0;
}

inline int cmd_prune(const std::string& in_path, const ThresholdSchedule& sched, const std::string& out_path,
                     bool as_json, std::ostream& out)
{
    detail::require_distinct(in_path, out_path);
    const auto ckpt = load_checkpoint(in_path);
    const auto res = prune_model(ckpt, sched);
    save_checkpoint(res.checkpoint, out_path);
    const auto& r = res.report;
    if (as_json) {
        for (const auto& m : r.matrices) {
            out << json{{"name", m.name}, {"excluded", m.excluded}, {"class", to_string(m.dist)}, {"rule", m.rule},
                        {"fallback", m.fallback}, {"theta_w", m.theta_w}, {"cols", m.cols},
                        {"columns_pruned", m.columns_pruned}, {"weights_pruned_pass2", m.weights_pruned_pass2},
                        {"params", m.rows * m.cols}, {"params_pruned", m.params_pruned}}
                       .dump()
                << '\n';
        }
        out << json{{"schedule", r.schedule}, {"replayed", r.replayed}, {"params_total", r.params_total},
                    {"params_before", r.params_before}, {"params_pruned", r.params_pruned},
                    {"pruned_fraction", r.pruned_fraction}, {"model_pruned_fraction", r.model_pruned_fraction}}
                   .dump()
            << '\n';
        return 0;
    }
    detail::Table t({"name", "class", "rule", "theta_w", "cols_pruned", "pass2_pruned", "params", "pruning"});
    for (const auto& m : r.matrices) {
        const auto params = m.rows * m.cols;
        if (m.excluded) {
            t.add({m.name, std::string(to_string(m.dist)), "excluded", "-", "-", "-", std::to_string(params), "-"});
            continue;
        }
        t.add({m.name, std::string(to_string(m.dist)), m.rule, detail::num(m.theta_w),
               std::to_string(m.columns_pruned) + "/" + std::to_string(m.cols), std::to_string(m.weights_pruned_pass2),
               std::to_string(params),
               detail::pct(100.0 * static_cast<double>(m.params_pruned) / static_cast<double>(params))});
    }
    t.print(out);
    out << "schedule " << r.schedule << (r.replayed ? " (replayed)" : "") << "\n";
    out << "pruned " << r.params_pruned << " of " << r.params_before << " prunable parameters: "
        << detail::pct(100.0 * r.pruned_fraction) << " (" << detail::pct(100.0 * r.model_pruned_fraction)
        << " of all " << r.params_total << ")\n";
    return 0;
}

inline int cmd_cost(const std::string& before_path, const std::string& after_path, std::uint64_t tokens,
                    MemoryRepr repr, bool as_json, std::ostream& out)
{
    const auto before = load_checkpoint(before_path);
    const auto after = load_checkpoint(after_path);
    const auto r = cost_report(before, after, tokens, repr);
    if (as_json) {
        out << json{{"repr", to_string(r.repr)}, {"tokens", r.tokens},
                    {"memory_bytes_before", r.memory_bytes_before}, {"memory_bytes_after", r.memory_bytes_after},
                    {"flops_before", r.flops_before}, {"flops_after", r.flops_after},
                    {"params_before", r.params_before}, {"params_after", r.params_after},
                    {"memory_reduction_pct", r.memory_reduction_pct}, {"flops_reduction_pct", r.flops_reduction_pct},
                    {"params_reduction_pct", r.params_reduction_pct}}
                   .dump()
            << '\n';
        return 0;
    }
    constexpr double mib = 1024.0 * 1024.0;
    detail::Table t({"", "memory_MiB", "FLOPs", "params"});
    t.add({"before", detail::num(static_cast<double>(r.memory_bytes_before) / mib),
           detail::num(static_cast<double>(r.flops_before)), std::to_string(r.params_before)});
    t.add({"after", detail::num(static_cast<double>(r.memory_bytes_after) / mib),
           detail::num(static_cast<double>(r.flops_after)), std::to_string(r.params_after)});
    t.add({"reduction", detail::pct(r.memory_reduction_pct), detail::pct(r.flops_reduction_pct),
           detail::pct(r.params_reduction_pct)});
    t.print(out);
    out << "representation " << to_string(r.repr) << ", tokens " << r.tokens << '\n';
    return 0;
}

inline int cmd_normalize(NormalizerMode mode, const VariantLexicon& lex, const NormalizerOptions& opt,
                         std::istream& in, std::ostream& out)
{
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        try {
            out << normalize(line, mode, lex, opt) << '\n';
        } catch (const Error& e) {
            throw FormatError("stdin line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return 0;
}

inline int cmd_wer(const std::string& ref_path, const std::string& hyp_path, NormalizerMode mode,
                   const VariantLexicon& lex, const NormalizerOptions& opt, bool as_json, std::ostream& out)
{
    const auto refs = detail::read_lines(ref_path);
    const auto hyps = detail::read_lines(hyp_path);
    const auto c = corpus_wer(refs, hyps, mode, lex, opt);
    if (as_json) {
        for (std::size_t i = 0; i < c.utterances.size(); ++i) {
            const auto& u = c.utterances[i];
            out << json{{"line", i + 1}, {"ref_len", u.ref_len}, {"S", u.edits.substitutions}, {"D", u.edits.deletions},
                        {"I", u.edits.insertions}, {"wer", u.wer}}
                       .dump()
                << '\n';
        }
        out << json{{"corpus", true}, {"mode", to_string(mode)}, {"ref_len", c.ref_len}, {"S", c.edits.substitutions},
                    {"D", c.edits.deletions}, {"I", c.edits.insertions}, {"wer", c.wer}}
                   .dump()
            << '\n';
        return 0;
    }
    detail::Table t({"line", "ref_len", "S", "D", "I", "wer"});
    for (std::size_t i = 0; i < c.utterances.size(); ++i) {
        const auto& u = c.utterances[i];
        t.add({std::to_string(i + 1), std::to_string(u.ref_len), std::to_string(u.edits.substitutions),
               std::to_string(u.edits.deletions), std::to_string(u.edits.insertions), detail::num(u.wer)});
    }
    t.add({"corpus", std::to_string(c.ref_len), std::to_string(c.edits.substitutions), std::to_string(c.edits.deletions),
           std::to_string(c.edits.insertions), detail::num(c.wer)});
    t.print(out);
    return 0;
}

inline int cmd_synth(const std::string& profile, const std::string& recipe_path, std::size_t width,
                     std::uint64_t seed, const std::string& out_path, std::ostream& out)
{
    SynthRecipe recipe;
    if (!recipe_path.empty()) {
        recipe = detail::recipe_from_json(detail::read_json(recipe_path));
    } else {
        recipe = profile_fixture_recipe(parse_profile(profile), width);
    }
    const auto ckpt = synth_checkpoint(recipe, seed);
    save_checkpoint(ckpt, out_path);
    out << "wrote " << ckpt.entries.size() << " matrices (" << ckpt.parameter_count() << " parameters, profile "
        << to_string(ckpt.profile) << ") to " << out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

/// Parses `args` (without the program name) and dispatches. Never throws.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"sparsetrim: structured-sparsity regularization, weight-statistics pruning, cost model, "
                 "Hindi text normalization and WER"};
    app.name("sparsetrim");
    app.require_subcommand(1);

    bool as_json = false;
    app.add_flag("--json", as_json, "Emit one JSON record per line instead of aligned tables");

    std::string in_path, out_path, metrics_path, config_path, before_path, after_path, ref_path, hyp_path;
    std::string schedule = "tw1", repr_name = "column-compact", mode_name = "balanced", lexicon_path;
    std::string profile = "net1", recipe_path;
    double eta = kDefaultEta;
    SGLConfig sgl;
    std::uint64_t tokens = kDefaultTokens;
    std::uint64_t seed = 0;
    std::size_t width = 64;
    bool no_lexicon = false, merge_u = false;

    auto* analyze = app.add_subcommand("analyze", "Per-matrix weight statistics, distribution class, column sparsity");
    analyze->add_option("--in", in_path, "Checkpoint manifest")->required();

    auto* penalty = app.add_subcommand("penalty", "Sparse Group LASSO penalty components and weighted total");
    penalty->add_option("--in", in_path, "Checkpoint manifest")->required();
    penalty->add_option("--lambda1", sgl.lambda1, "Encoder L1 coefficient")->check(CLI::NonNegativeNumber);
    penalty->add_option("--lambda2", sgl.lambda2, "Decoder L1 coefficient")->check(CLI::NonNegativeNumber);
    penalty->add_option("--lambda3", sgl.lambda3, "Encoder group-L2 coefficient")->check(CLI::NonNegativeNumber);
    penalty->add_option("--lambda4", sgl.lambda4, "Decoder group-L2 coefficient")->check(CLI::NonNegativeNumber);

    auto* train = app.add_subcommand("train-toy", "Train the toy network with cross-entropy plus SGL");
    train->add_option("--config", config_path, "JSON training config")->required();
    train->add_option("--out", out_path, "Output checkpoint manifest")->required();
    train->add_option("--metrics", metrics_path, "Write the per-step metrics table here instead of stdout");
    auto* train_seed = train->add_option("--seed", seed, "Override the config seed");

    auto* prune = app.add_subcommand("prune", "Two-pass weight-statistics pruning");
    prune->add_option("--in", in_path, "Input checkpoint manifest")->required();
    prune->add_option("--schedule", schedule, "tw1..tw5, t1, t2 or t3")->capture_default_str();
    prune->add_option("--eta", eta, "T3 multiplier")->check(CLI::PositiveNumber)->capture_default_str();
    prune->add_option("--out", out_path, "Output checkpoint manifest")->required();

    auto* cost = app.add_subcommand("cost", "Memory and FLOPs before/after pruning");
    cost->add_option("--before", before_path, "Reference checkpoint")->required();
    cost->add_option("--after", after_path, "Pruned checkpoint")->required();
    cost->add_option("--tokens", tokens, "Tokens per forward pass")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()))
        ->capture_default_str();
    cost->add_option("--repr", repr_name, "dense, column-compact or sparse-coo")->capture_default_str();

    auto* norm = app.add_subcommand("normalize", "Normalize UTF-8 lines from stdin");
    auto* wer_cmd = app.add_subcommand("wer", "Word error rate of aligned reference/hypothesis files");
    for (auto* sub : {norm, wer_cmd}) {
        sub->add_option("--mode", mode_name, "aggressive, preserving or balanced")->capture_default_str();
        sub->add_option("--lexicon", lexicon_path, "Variant lexicon (canonical<TAB>variant... per line)");
        sub->add_flag("--no-lexicon", no_lexicon, "Disable the built-in seed lexicon");
        sub->add_flag("--merge-u", merge_u, "Also fold long U into short U");
    }
    wer_cmd->add_option("--ref", ref_path, "Reference transcripts, one per line")->required();
    wer_cmd->add_option("--hyp", hyp_path, "Hypothesis transcripts, one per line")->required();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic checkpoint");
    synth->add_option("--profile", profile, "net1, net2 or net3 built-in fixture")->capture_default_str();
    synth->add_option("--recipe", recipe_path, "JSON recipe (overrides --profile)");
    synth->add_option("--width", width, "Fixture base width")->check(CLI::Range(20, 4096))->capture_default_str();
    synth->add_option("--seed", seed, "Random seed")->capture_default_str();
    synth->add_option("--out", out_path, "Output checkpoint manifest")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        if (args.empty()) {
            err << app.help();
        }
        const int code = app.exit(e, out, err);
        return code == 0 ? 2 : code;
    }

    try {
        const auto text_setup = [&] {
            NormalizerOptions opt;
            opt.merge_u_pair = merge_u;
            VariantLexicon lex;
            if (!lexicon_path.empty()) {
                lex = VariantLexicon::from_file(lexicon_path, opt);
            } else if (!no_lexicon) {
                lex = VariantLexicon::seed(opt);
            }
            return std::pair{lex, opt};
        };

        if (analyze->parsed()) return cmd_analyze(in_path, as_json, out);
        if (penalty->parsed()) return cmd_penalty(in_path, sgl, as_json, out);
        if (train->parsed()) {
            std::optional<std::uint64_t> s;
            if (train_seed->count() > 0) s = seed;
            return cmd_train_toy(config_path, out_path, metrics_path, s, as_json, out);
        }
        if (prune->parsed()) {
            return cmd_prune(in_path, ThresholdSchedule{parse_schedule_id(schedule), eta}, out_path, as_json, out);
        }
        if (cost->parsed()) return cmd_cost(before_path, after_path, tokens, parse_memory_repr(repr_name), as_json, out);
        if (norm->parsed()) {
            const auto mode = parse_normalizer_mode(mode_name);
            const auto [lex, opt] = text_setup();
            return cmd_normalize(mode, lex, opt, in, out);
        }
        if (wer_cmd->parsed()) {
            const auto mode = parse_normalizer_mode(mode_name);
            const auto [lex, opt] = text_setup();
            return cmd_wer(ref_path, hyp_path, mode, lex, opt, as_json, out);
        }
        if (synth->parsed()) return cmd_synth(profile, recipe_path, width, seed, out_path, out);
    } catch (const std::exception& e) {
        err << "sparsetrim: error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

} // namespace sparsetrim::cli
