// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsetrim/checkpoint.hpp"
#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"
#include "sparsetrim/weight_stats.hpp"

namespace sparsetrim {

/// Default T3 multiplier; also used for rows a schedule has no case for.
inline constexpr double kDefaultEta = 0.1;

/**
 * Second-pass threshold schedules.
 *
 *  - TW1 (Net1): encoder blocks 0-5 max(T1,T2), blocks 6-11 T2; decoder T3.
 *  - TW2 (Net2): P1 0.1 sigma; Enc-ATT 0.1 T1; Dec-ATT 0.1 T2; Enc-FC 0.2 T1; Dec-FC T2.
 *  - TW3 (Net2): P1 0.1 sigma; ATT 0.1 T1; FC 0.2 T2.
 *  - TW4 (Net2): P1 0.1 sigma; Enc-ATT 0.1 T1; Dec-ATT 0.5 T2; Enc-FC 0.2 T1; Dec-FC T2.
 *  - TW5 (Net3): encoder blocks 0-4 max(T1,T2), blocks 5-23 T2; decoder T2.
 *  - UniformT1/T2/T3: one formula for every prunable matrix.
 *
 * Rows a case table does not cover (CONV or Other outside P1 under TW2-TW4)
 * fall back to T3 and are flagged in the report.
 */
enum class ScheduleId { TW1, TW2, TW3, TW4, TW5, UniformT1, UniformT2, UniformT3 };

struct ThresholdSchedule
{
    ScheduleId id = ScheduleId::UniformT3;
    double eta = kDefaultEta;
};

[[nodiscard]] inline std::string_view to_string(ScheduleId id) noexcept
{
    switch (id) {
    case ScheduleId::TW1: return "tw1";
    case ScheduleId::TW2: return "tw2";
    case ScheduleId::TW3: return "tw3";
    case ScheduleId::TW4: return "tw4";
    case ScheduleId::TW5: return "tw5";
    case ScheduleId::UniformT1: return "t1";
    case ScheduleId::UniformT2: return "t2";
    case ScheduleId::UniformT3: return "t3";
    }
    return "t3";
}

[[nodiscard]] inline ScheduleId parse_schedule_id(std::string_view s)
{
    const auto v = detail::lower(s);
    for (auto id : {ScheduleId::TW1, ScheduleId::TW2, ScheduleId::TW3, ScheduleId::TW4, ScheduleId::TW5,
                    ScheduleId::UniformT1, ScheduleId::UniformT2, ScheduleId::UniformT3}) {
        if (v == to_string(id)) {
            return id;
        }
    }
    if (v == "uniform-t1") return ScheduleId::UniformT1;
    if (v == "uniform-t2") return ScheduleId::UniformT2;
    if (v == "uniform-t3") return ScheduleId::UniformT3;
    throw InvalidArgument("unknown schedule '" + std::string(s) + "' (expected tw1..tw5, t1, t2 or t3)");
}

namespace detail {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_shortest(double v)
{
    std::array<char, 40> buf{};
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf.data(), buf.size(), "%.*g", prec, v);
        if (std::strtod(buf.data(), nullptr) == v) {
            break;
        }
    }
    return buf.data();
}

} // namespace detail

/// Provenance tag stored in pruned checkpoints, e.g. "tw1 eta=0.1".
[[nodiscard]] inline std::string schedule_tag(const ThresholdSchedule& s)
{
    return std::string(to_string(s.id)) + " eta=" + detail::format_shortest(s.eta);
}

/// Frozen per-matrix pruning parameters.
struct MatrixPolicy
{
    bool excluded = false;
    double theta_c = kDefaultThetaC;
    double theta_w = 0.0;
    /// Almost-zero cutoff per column, 0.1 sigma_c of the unpruned column.
    std::vector<double> theta0;
    /// Replay of an already-applied policy: pass 1 selects exactly the
    /// all-zero columns and pass 2 reuses the recorded theta_w.
    bool replay = false;
    std::string rule;     ///< human-readable threshold formula
    bool fallback = false; ///< schedule had no case for this matrix
    WeightStats stats;
    DistClass dist = DistClass::C_WideSpread;
};

struct PruningPolicy
{
    ThresholdSchedule schedule;
    std::vector<MatrixPolicy> matrices; ///< aligned with checkpoint entries
};

struct MatrixPruneReport
{
    std::string name;
    bool excluded = false;
    bool fallback = false;
    std::string rule;
    double theta_w = 0.0;
    DistClass dist = DistClass::C_WideSpread;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t columns_pruned = 0;
    std::size_t weights_pruned_pass2 = 0;
    std::size_t params_pruned = 0; ///< columns_pruned * rows + weights_pruned_pass2
    std::size_t newly_zeroed = 0;  ///< entries non-zero before and zero after
};

struct PruneReport
{
    std::string schedule;
    bool replayed = false;
    std::vector<MatrixPruneReport> matrices;
    std::size_t params_total = 0;  ///< every parameter, excluded ones included
    std::size_t params_before = 0; ///< prunable (non-excluded) parameters
    std::size_t params_pruned = 0;
    std::size_t newly_zeroed = 0;
    double pruned_fraction = 0.0;       ///< params_pruned / params_before
    double model_pruned_fraction = 0.0; ///< params_pruned / params_total
};

struct PruneOutcome
{
    WeightMatrix matrix;
    MatrixPruneReport report;
};

struct PruneResult
{
    ModelCheckpoint checkpoint;
    PruneReport report;
};

namespace detail {

struct Threshold
{
    double value = 0.0;
    std::string rule;
    bool fallback = false;
};

inline void require_profile(ScheduleId id, Profile have, Profile want)
{
    if (have != want) {
        throw InvalidArgument("schedule " + std::string(to_string(id)) + " requires a "
                              + std::string(to_string(want)) + " checkpoint, got "
                              + std::string(to_string(have)));
    }
}

inline Threshold select_threshold(const ThresholdSchedule& sched, const CheckpointEntry& e, const WeightStats& s)
{
    const double t1 = threshold_T1(s);
    const double t2 = threshold_T2(s);
    const double t3 = threshold_T3(s, sched.eta);
    const auto& m = e.meta;
    const bool enc = m.side == Side::Encoder;
    const Threshold fallback{t3, "T3 (fallback)", true};
    const auto no_case = [&] {
        return InvalidArgument("schedule " + std::string(to_string(sched.id)) + " has no case for matrix '"
                               + e.matrix.name + "' (" + std::string(to_string(m.side)) + " layer "
                               + std::to_string(m.layer_index) + ")");
    };

    switch (sched.id) {
    case ScheduleId::UniformT1: return {t1, "T1"};
    case ScheduleId::UniformT2: return {t2, "T2"};
    case ScheduleId::UniformT3: return {t3, "T3"};
    case ScheduleId::TW1:
        if (!enc) return {t3, "T3"};
        if (m.layer_index <= 5) return {std::max(t1, t2), "max(T1,T2)"};
        if (m.layer_index <= 11) return {t2, "T2"};
        throw no_case();
    case ScheduleId::TW5:
        if (!enc) return {t2, "T2"};
        if (m.layer_index <= 4) return {std::max(t1, t2), "max(T1,T2)"};
        if (m.layer_index <= 23) return {t2, "T2"};
        throw no_case();
    case ScheduleId::TW2:
    case ScheduleId::TW4: {
        if (m.in_p1) return {0.1 * s.sigma, "0.1*sigma (P1)"};
        const bool tw2 = sched.id == ScheduleId::TW2;
        if (m.kind == LayerKind::ATT) {
            if (enc) return {0.1 * t1, "0.1*T1"};
            return tw2 ? Threshold{0.1 * t2, "0.1*T2"} : Threshold{0.5 * t2, "0.5*T2"};
        }
        if (m.kind == LayerKind::FC) {
            return enc ? Threshold{0.2 * t1, "0.2*T1"} : Threshold{t2, "T2"};
        }
        return fallback;
    }
    case ScheduleId::TW3:
        if (m.in_p1) return {0.1 * s.sigma, "0.1*sigma (P1)"};
        if (m.kind == LayerKind::ATT) return {0.1 * t1, "0.1*T1"};
        if (m.kind == LayerKind::FC) return {0.2 * t2, "0.2*T2"};
        return fallback;
    }
    throw no_case();
}

} // namespace detail

/// Resolves the frozen per-matrix policy. Statistics come from each matrix
/// as it is now, before any pruning mutation.
[[nodiscard]] inline PruningPolicy resolve_policy(const ModelCheckpoint& ckpt, const ThresholdSchedule& sched)
{
    if (!(sched.eta > 0.0) || !std::isfinite(sched.eta)) {
        throw InvalidArgument("eta must be a positive finite number");
    }
    switch (sched.id) {
    case ScheduleId::TW1: detail::require_profile(sched.id, ckpt.profile, Profile::Net1); break;
    case ScheduleId::TW2:
    case ScheduleId::TW3:
    case ScheduleId::TW4: detail::require_profile(sched.id, ckpt.profile, Profile::Net2); break;
    case ScheduleId::TW5: detail::require_profile(sched.id, ckpt.profile, Profile::Net3); break;
    default: break;
    }

    const bool replay = !ckpt.pruned_with.empty() && ckpt.pruned_with == schedule_tag(sched);

    PruningPolicy policy;
    policy.schedule = sched;
    policy.matrices.reserve(ckpt.entries.size());
    for (const auto& e : ckpt.entries) {
        MatrixPolicy mp;
        mp.excluded = prune_excluded(ckpt.profile, e.meta);
        mp.stats = matrix_stats(e.matrix);
        mp.dist = classify_distribution(mp.stats);
        if (mp.excluded) {
            mp.rule = "excluded";
            policy.matrices.push_back(std::move(mp));
            continue;
        }
        const auto t = detail::select_threshold(sched, e, mp.stats);
        mp.rule = t.rule;
        mp.fallback = t.fallback;
        if (replay && e.frozen_theta_w) {
            mp.replay = true;
            mp.theta_w = *e.frozen_theta_w;
        } else {
            mp.theta_w = t.value;
        }
        mp.theta0.resize(e.matrix.cols());
        for (std::size_t c = 0; c < e.matrix.cols(); ++c) {
            mp.theta0[c] = kAlmostZeroFactor * population_sigma(e.matrix.values.column(c));
        }
        policy.matrices.push_back(std::move(mp));
    }
    return policy;
}

/**
 * Two-pass pruning of one matrix.
 *
 * Pass 1 zeroes every column whose approximate sparsity reaches theta_c.
 * Pass 2 zeroes, inside the surviving columns, every entry with |w| < theta_w.
 * The column sparsities are measured once, before any mutation.
 */
[[nodiscard]] inline PruneOutcome prune_matrix(const WeightMatrix& w, const MatrixPolicy& pol)
{
    if (pol.excluded) {
        throw InvalidArgument("matrix '" + w.name + "' is excluded from pruning");
    }
    if (!w.values.all_finite()) {
        throw InvalidArgument("matrix '" + w.name + "' has non-finite weights");
    }
    if (!(pol.theta_c > 0.0 && pol.theta_c <= 1.0)) {
        throw InvalidArgument("theta_c must lie in (0, 1]");
    }
    if (!pol.replay && pol.theta0.size() != w.cols()) {
        throw InvalidArgument("policy for '" + w.name + "' has " + std::to_string(pol.theta0.size())
                              + " column cutoffs for " + std::to_string(w.cols()) + " columns");
    }

    PruneOutcome out{w, {}};
    auto& rep = out.report;
    rep.name = w.name;
    rep.rule = pol.rule;
    rep.fallback = pol.fallback;
    rep.theta_w = pol.theta_w;
    rep.dist = pol.dist;
    rep.rows = w.rows();
    rep.cols = w.cols();

    std::vector<double> sparsity(w.cols());
    for (std::size_t c = 0; c < w.cols(); ++c) {
        if (pol.replay) {
            sparsity[c] = w.values.column_is_zero(c) ? 1.0 : 0.0;
        } else {
            sparsity[c] = column_sparsity<float>(w.values.column(c), pol.theta0[c]);
        }
    }

    auto& m = out.matrix.values;
    std::vector<bool> pruned(w.cols(), false);
    for (std::size_t c = 0; c < w.cols(); ++c) {
        if (sparsity[c] >= pol.theta_c) {
            m.set_column(c, 0.0f);
            pruned[c] = true;
            ++rep.columns_pruned;
        }
    }
    for (std::size_t c = 0; c < w.cols(); ++c) {
        if (pruned[c]) {
            continue;
        }
        for (std::size_t r = 0; r < w.rows(); ++r) {
            if (sparsity[c] < pol.theta_c && std::abs(static_cast<double>(m(r, c))) < pol.theta_w) {
                m(r, c) = 0.0f;
                ++rep.weights_pruned_pass2;
            }
        }
    }

    rep.params_pruned = rep.columns_pruned * rep.rows + rep.weights_pruned_pass2;
    const auto before = w.values.data();
    const auto after = m.data();
    for (std::size_t i = 0; i < before.size(); ++i) {
        rep.newly_zeroed += (before[i] != 0.0f && after[i] == 0.0f) ? 1 : 0;
    }
    return out;
}

/// Resolves the schedule and prunes every non-excluded matrix. Pruning again
/// with the same schedule replays the recorded thresholds and is a no-op.
[[nodiscard]] inline PruneResult prune_model(const ModelCheckpoint& ckpt, const ThresholdSchedule& sched)
{
    const auto policy = resolve_policy(ckpt, sched);

    PruneResult res;
    res.checkpoint.profile = ckpt.profile;
    res.checkpoint.pruned_with = schedule_tag(sched);
    auto& rep = res.report;
    rep.schedule = res.checkpoint.pruned_with;
    rep.replayed = !ckpt.pruned_with.empty() && ckpt.pruned_with == rep.schedule;

    for (std::size_t i = 0; i < ckpt.entries.size(); ++i) {
        const auto& e = ckpt.entries[i];
        const auto& mp = policy.matrices[i];
        rep.params_total += e.matrix.values.size();
        if (mp.excluded) {
            res.checkpoint.entries.push_back(e);
            MatrixPruneReport mr;
            mr.name = e.matrix.name;
            mr.excluded = true;
            mr.rule = mp.rule;
            mr.dist = mp.dist;
            mr.rows = e.matrix.rows();
            mr.cols = e.matrix.cols();
            rep.matrices.push_back(std::move(mr));
            continue;
        }
        auto outcome = prune_matrix(e.matrix, mp);
        rep.params_before += e.matrix.values.size();
        rep.params_pruned += outcome.report.params_pruned;
        rep.newly_zeroed += outcome.report.newly_zeroed;
        res.checkpoint.entries.push_back(CheckpointEntry{std::move(outcome.matrix), e.meta, mp.theta_w});
        rep.matrices.push_back(std::move(outcome.report));
    }

    rep.pruned_fraction = rep.params_before == 0
                              ? 0.0
                              : static_cast<double>(rep.params_pruned) / static_cast<double>(rep.params_before);
    rep.model_pruned_fraction = rep.params_total == 0 ? 0.0
                                                      : static_cast<double>(rep.params_pruned)
                                                            / static_cast<double>(rep.params_total);
    return res;
}

} // namespace sparsetrim
