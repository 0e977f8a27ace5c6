// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"

namespace sparsetrim {

enum class Side { Encoder, Decoder };
enum class LayerKind { FC, ATT, CONV, LayerNorm, Other };

/// Built-in layer taxonomies. Net1: FC-regularized small model (12+12 blocks),
/// Net2: all-layer-regularized small model, Net3: FC-regularized medium model
/// (24+24 blocks). Custom carries no built-in rules beyond LayerNorm exclusion.
enum class Profile { Net1, Net2, Net3, Custom };

struct LayerMeta
{
    Side side = Side::Encoder;
    LayerKind kind = LayerKind::FC;
    std::size_t layer_index = 0;
    /// Member of Net2's highly-spiked layer set; only meaningful for Net2.
    bool in_p1 = false;

    friend bool operator==(const LayerMeta&, const LayerMeta&) = default;
};

struct CheckpointEntry
{
    WeightMatrix matrix;
    LayerMeta meta;
    /// Second-pass threshold the matrix was pruned with, if any. Re-pruning
    /// with the same schedule replays it instead of re-deriving statistics.
    std::optional<double> frozen_theta_w;

    friend bool operator==(const CheckpointEntry&, const CheckpointEntry&) = default;
};

struct ModelCheckpoint
{
    Profile profile = Profile::Custom;
    std::vector<CheckpointEntry> entries;
    /// Schedule tag recorded by the pruning engine ("tw1 eta=0.1"), empty if
    /// the checkpoint has never been pruned.
    std::string pruned_with;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }

    [[nodiscard]] std::size_t parameter_count() const noexcept
    {
        std::size_t n = 0;
        for (const auto& e : entries) {
            n += e.matrix.values.size();
        }
        return n;
    }

    [[nodiscard]] const CheckpointEntry* find(std::string_view name) const noexcept
    {
        for (const auto& e : entries) {
            if (e.matrix.name == name) {
                return &e;
            }
        }
        return nullptr;
    }

    friend bool operator==(const ModelCheckpoint&, const ModelCheckpoint&) = default;
};

// ---------------------------------------------------------------------------
// Enum <-> text

[[nodiscard]] inline std::string_view to_string(Side s) noexcept
{
    return s == Side::Encoder ? "encoder" : "decoder";
}

[[nodiscard]] inline std::string_view to_string(LayerKind k) noexcept
{
    switch (k) {
    case LayerKind::FC: return "FC";
    case LayerKind::ATT: return "ATT";
    case LayerKind::CONV: return "CONV";
    case LayerKind::LayerNorm: return "LayerNorm";
    case LayerKind::Other: return "Other";
    }
    return "Other";
}

[[nodiscard]] inline std::string_view to_string(Profile p) noexcept
{
    switch (p) {
    case Profile::Net1: return "Net1";
    case Profile::Net2: return "Net2";
    case Profile::Net3: return "Net3";
    case Profile::Custom: return "Custom";
    }
    return "Custom";
}

namespace detail {

inline std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') {
            ch = static_cast<char>(ch - 'A' + 'a');
        }
    }
    return out;
}

} // namespace detail

[[nodiscard]] inline Side parse_side(std::string_view s)
{
    const auto v = detail::lower(s);
    if (v == "encoder") return Side::Encoder;
    if (v == "decoder") return Side::Decoder;
    throw FormatError("unknown side '" + std::string(s) + "'");
}

[[nodiscard]] inline LayerKind parse_layer_kind(std::string_view s)
{
    const auto v = detail::lower(s);
    if (v == "fc") return LayerKind::FC;
    if (v == "att") return LayerKind::ATT;
    if (v == "conv") return LayerKind::CONV;
    if (v == "layernorm") return LayerKind::LayerNorm;
    if (v == "other") return LayerKind::Other;
    throw FormatError("unknown layer kind '" + std::string(s) + "'");
}

[[nodiscard]] inline Profile parse_profile(std::string_view s)
{
    const auto v = detail::lower(s);
    if (v == "net1") return Profile::Net1;
    if (v == "net2") return Profile::Net2;
    if (v == "net3") return Profile::Net3;
    if (v == "custom") return Profile::Custom;
    throw FormatError("unknown profile '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Profile tables

struct ProfileInfo
{
    std::size_t encoder_blocks = 0; ///< 0 = unbounded (Custom)
    std::size_t decoder_blocks = 0;
    bool fc_only = false;           ///< regularized and pruned on FC layers only
};

[[nodiscard]] constexpr ProfileInfo profile_info(Profile p) noexcept
{
    switch (p) {
    case Profile::Net1: return {12, 12, true};
    case Profile::Net2: return {12, 12, false};
    case Profile::Net3: return {24, 24, true};
    case Profile::Custom: return {0, 0, false};
    }
    return {};
}

/// Whether a matrix is out of reach of regularization and pruning.
/// LayerNorm is always excluded; FC-only profiles also exclude ATT and CONV.
[[nodiscard]] constexpr bool prune_excluded(Profile p, const LayerMeta& meta) noexcept
{
    if (meta.kind == LayerKind::LayerNorm) {
        return true;
    }
    if (profile_info(p).fc_only) {
        return meta.kind == LayerKind::ATT || meta.kind == LayerKind::CONV;
    }
    return false;
}

/// Checks the structural invariants of a checkpoint; throws FormatError.
inline void validate(const ModelCheckpoint& ckpt)
{
    std::set<std::string, std::less<>> names;
    const auto info = profile_info(ckpt.profile);
    for (const auto& e : ckpt.entries) {
        const auto& m = e.matrix;
        if (m.name.empty() || m.name.find_first_of("\n\r") != std::string::npos
            || m.name.front() == ' ' || m.name.back() == ' ') {
            throw FormatError("invalid matrix name '" + m.name + "'");
        }
        if (!names.insert(m.name).second) {
            throw FormatError("duplicate matrix name '" + m.name + "'");
        }
        if (m.rows() == 0 || m.cols() == 0) {
            throw FormatError("matrix '" + m.name + "' has an empty shape");
        }
        if (m.values.size() != m.rows() * m.cols()) {
            throw FormatError("matrix '" + m.name + "' value count does not match its shape");
        }
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            if (!std::isfinite(m.values.data()[i])) {
                throw FormatError("matrix '" + m.name + "' has a non-finite value at offset "
                                  + std::to_string(i * sizeof(float)));
            }
        }
        if (e.meta.in_p1 && ckpt.profile != Profile::Net2) {
            throw FormatError("matrix '" + m.name + "' is marked in_p1 but the profile is "
                              + std::string(to_string(ckpt.profile)));
        }
        const auto blocks = e.meta.side == Side::Encoder ? info.encoder_blocks : info.decoder_blocks;
        if (blocks != 0 && e.meta.layer_index >= blocks) {
            throw FormatError("matrix '" + m.name + "' has layer_index "
                              + std::to_string(e.meta.layer_index) + " outside the "
                              + std::string(to_string(ckpt.profile)) + " "
                              + std::string(to_string(e.meta.side)) + " range");
        }
        if (e.frozen_theta_w && !(std::isfinite(*e.frozen_theta_w) && *e.frozen_theta_w >= 0.0)) {
            throw FormatError("matrix '" + m.name + "' has an invalid theta_w");
        }
    }
}

// ---------------------------------------------------------------------------
// On-disk format
//
//   sparsetrim-checkpoint v1
//   profile = Net1
//   pruned_with = tw1 eta=0.1        (optional)
//
//   [matrix]
//   name = enc.0.fc1
//   rows = 128
//   cols = 64
//   blob = c.ckpt.0000.f32
//   side = encoder
//   kind = FC
//   layer_index = 0
//   in_p1 = false
//   theta_w = 0.00123                (optional)
//
// Blobs hold rows*cols little-endian IEEE-754 binary32 values, row-major.

inline constexpr std::string_view kManifestHeader = "sparsetrim-checkpoint v1";

namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v) noexcept
{
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    } else {
        return v;
    }
}

inline std::string format_double(double v)
{
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::size_t parse_size(const std::string& value, const std::string& what)
{
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw FormatError(what + ": expected a non-negative integer, got '" + value + "'");
    }
    return static_cast<std::size_t>(std::stoull(value));
}

inline double parse_real(const std::string& value, const std::string& what)
{
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size()) {
        throw FormatError(what + ": expected a real number, got '" + value + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& value, const std::string& what)
{
    if (value == "true") return true;
    if (value == "false") return false;
    throw FormatError(what + ": expected true/false, got '" + value + "'");
}

inline void write_blob(const std::filesystem::path& path, const Matrix<float>& values)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    std::vector<std::uint32_t> words(values.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        words[i] = to_little_endian(std::bit_cast<std::uint32_t>(values.data()[i]));
    }
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

inline Matrix<float> read_blob(const std::filesystem::path& path, const std::string& name,
                               std::size_t rows, std::size_t cols)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("matrix '" + name + "': missing blob '" + path.string() + "'");
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t expected = rows * cols * sizeof(float);
    if (bytes.size() != expected) {
        throw FormatError("matrix '" + name + "': byte-count mismatch in '" + path.string()
                          + "' (expected " + std::to_string(expected) + " bytes, found "
                          + std::to_string(bytes.size()) + ")");
    }
    std::vector<float> values(rows * cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t word = 0;
        std::memcpy(&word, bytes.data() + i * sizeof(word), sizeof(word));
        values[i] = std::bit_cast<float>(to_little_endian(word));
        if (!std::isfinite(values[i])) {
            throw FormatError("matrix '" + name + "': non-finite value at byte offset "
                              + std::to_string(i * sizeof(float)));
        }
    }
    return Matrix<float>(rows, cols, std::move(values));
}

} // namespace detail

/// Blob file name used for entry `index` of a manifest named `manifest_name`.
[[nodiscard]] inline std::string blob_name(const std::string& manifest_name, std::size_t index)
{
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), ".%04zu.f32", index);
    return manifest_name + buf.data();
}

/// Renders the manifest text for `ckpt` as it would be written next to
/// `manifest_name`.
[[nodiscard]] inline std::string render_manifest(const ModelCheckpoint& ckpt, const std::string& manifest_name)
{
    std::ostringstream os;
    os << kManifestHeader << '\n';
    os << "profile = " << to_string(ckpt.profile) << '\n';
    if (!ckpt.pruned_with.empty()) {
        os << "pruned_with = " << ckpt.pruned_with << '\n';
    }
    for (std::size_t i = 0; i < ckpt.entries.size(); ++i) {
        const auto& e = ckpt.entries[i];
        os << "\n[matrix]\n";
        os << "name = " << e.matrix.name << '\n';
        os << "rows = " << e.matrix.rows() << '\n';
        os << "cols = " << e.matrix.cols() << '\n';
        os << "blob = " << blob_name(manifest_name, i) << '\n';
        os << "side = " << to_string(e.meta.side) << '\n';
        os << "kind = " << to_string(e.meta.kind) << '\n';
        os << "layer_index = " << e.meta.layer_index << '\n';
        os << "in_p1 = " << (e.meta.in_p1 ? "true" : "false") << '\n';
        if (e.frozen_theta_w) {
            os << "theta_w = " << detail::format_double(*e.frozen_theta_w) << '\n';
        }
    }
    return os.str();
}

/// Writes the manifest at `path` and one blob per matrix in the same directory.
inline void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path)
{
    validate(ckpt);
    const auto dir = path.parent_path();
    const auto manifest_name = path.filename().string();
    if (manifest_name.empty()) {
        throw InvalidArgument("checkpoint path '" + path.string() + "' has no file name");
    }
    for (std::size_t i = 0; i < ckpt.entries.size(); ++i) {
        detail::write_blob(dir / blob_name(manifest_name, i), ckpt.entries[i].matrix.values);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out << render_manifest(ckpt, manifest_name);
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

inline ModelCheckpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("missing checkpoint manifest '" + path.string() + "'");
    }
    const auto dir = path.parent_path();

    struct Record
    {
        std::size_t line = 0;
        std::optional<std::string> name, blob;
        std::optional<std::size_t> rows, cols, layer_index;
        std::optional<Side> side;
        std::optional<LayerKind> kind;
        std::optional<bool> in_p1;
        std::optional<double> theta_w;
    };

    ModelCheckpoint ckpt;
    std::optional<Profile> profile;
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line) || detail::trim(line) != kManifestHeader) {
        throw FormatError("'" + path.string() + "': missing header line '" + std::string(kManifestHeader) + "'");
    }
    ++line_no;

    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (text == "[matrix]") {
            records.emplace_back().line = line_no;
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw FormatError(where + ": expected 'key = value'");
        }
        const auto key = detail::trim(std::string_view(text).substr(0, eq));
        const auto value = detail::trim(std::string_view(text).substr(eq + 1));

        if (records.empty()) {
            if (key == "profile") {
                profile = parse_profile(value);
            } else if (key == "pruned_with") {
                ckpt.pruned_with = value;
            } else {
                throw FormatError(where + ": unknown header key '" + key + "'");
            }
            continue;
        }

        auto& r = records.back();
        if (key == "name") r.name = value;
        else if (key == "rows") r.rows = detail::parse_size(value, where);
        else if (key == "cols") r.cols = detail::parse_size(value, where);
        else if (key == "blob") r.blob = value;
        else if (key == "side") r.side = parse_side(value);
        else if (key == "kind") r.kind = parse_layer_kind(value);
        else if (key == "layer_index") r.layer_index = detail::parse_size(value, where);
        else if (key == "in_p1") r.in_p1 = detail::parse_bool(value, where);
        else if (key == "theta_w") r.theta_w = detail::parse_real(value, where);
        else throw FormatError(where + ": unknown matrix key '" + key + "'");
    }

    if (!profile) {
        throw FormatError("'" + path.string() + "': missing 'profile'");
    }
    ckpt.profile = *profile;

    std::set<std::string, std::less<>> seen;
    for (const auto& r : records) {
        const auto where = path.string() + ":" + std::to_string(r.line);
        if (!r.name || !r.rows || !r.cols || !r.blob || !r.side || !r.kind || !r.layer_index || !r.in_p1) {
            throw FormatError(where + ": matrix record is missing a required field "
                              "(name, rows, cols, blob, side, kind, layer_index, in_p1)");
        }
        if (!seen.insert(*r.name).second) {
            throw FormatError(where + ": duplicate matrix name '" + *r.name + "'");
        }
        if (*r.rows == 0 || *r.cols == 0) {
            throw FormatError(where + ": matrix '" + *r.name + "' has an empty shape");
        }
        CheckpointEntry e;
        e.matrix.name = *r.name;
        e.matrix.values = detail::read_blob(dir / *r.blob, *r.name, *r.rows, *r.cols);
        e.meta = LayerMeta{*r.side, *r.kind, *r.layer_index, *r.in_p1};
        e.frozen_theta_w = r.theta_w;
        ckpt.entries.push_back(std::move(e));
    }

    validate(ckpt);
    return ckpt;
}

} // namespace sparsetrim
