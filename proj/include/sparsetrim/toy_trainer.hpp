// Copyright 2026 The sparsetrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsetrim/checkpoint.hpp"
#include "sparsetrim/error.hpp"
#include "sparsetrim/matrix.hpp"
#include "sparsetrim/sgl_loss.hpp"
#include "sparsetrim/weight_stats.hpp"

namespace sparsetrim {

/// Gaussian-cluster classification task. Only the first `informative`
/// input features separate the classes; the rest are pure noise.
struct ToyTask
{
    std::size_t input_dim = 16;
    std::size_t classes = 10;
    std::size_t samples = 400;
    std::size_t informative = 8;
    double separation = 3.0;
};

enum class LrSchedule { Constant, Cosine };

[[nodiscard]] inline std::string_view to_string(LrSchedule s) noexcept
{
    return s == LrSchedule::Constant ? "constant" : "cosine";
}

[[nodiscard]] inline LrSchedule parse_lr_schedule(std::string_view s)
{
    if (s == "constant") return LrSchedule::Constant;
    if (s == "cosine") return LrSchedule::Cosine;
    throw InvalidArgument("unknown learning-rate schedule '" + std::string(s) + "'");
}

struct ToyConfig
{
    std::vector<std::size_t> layer_widths{16, 32, 32, 10};
    std::size_t steps = 300;
    double learning_rate = 0.1;
    LrSchedule schedule = LrSchedule::Constant;
    SGLConfig sgl;
    std::uint64_t seed = 0;
    ToyTask task;

    void validate() const
    {
        if (layer_widths.size() < 2) {
            throw InvalidArgument("the toy network needs at least two layer widths");
        }
        if (std::any_of(layer_widths.begin(), layer_widths.end(), [](std::size_t w) { return w == 0; })) {
            throw InvalidArgument("layer widths must be positive");
        }
        if (steps == 0) {
            throw InvalidArgument("steps must be at least 1");
        }
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw InvalidArgument("learning rate must be finite and non-negative");
        }
        if (layer_widths.front() != task.input_dim) {
            throw InvalidArgument("first layer width must equal the task input dimension");
        }
        if (layer_widths.back() != task.classes) {
            throw InvalidArgument("last layer width must equal the number of classes");
        }
        if (task.classes < 2 || task.samples == 0 || task.informative > task.input_dim) {
            throw InvalidArgument("invalid synthetic task");
        }
        sgl.validate();
    }
};

struct StepMetrics
{
    std::size_t step = 0;
    double learning_rate = 0.0;
    double cross_entropy = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

struct TrainResult
{
    ModelCheckpoint checkpoint;
    std::vector<StepMetrics> metrics;
    double accuracy = 0.0; ///< training-set accuracy of the final weights
};

struct ToyDataset
{
    Matrix<double> inputs; ///< samples x input_dim
    std::vector<std::size_t> labels;
};

[[nodiscard]] inline ToyDataset make_toy_dataset(const ToyTask& task, std::uint64_t seed)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xDA7Au};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix<double> centers(task.classes, task.input_dim);
    for (std::size_t k = 0; k < task.classes; ++k) {
        for (std::size_t d = 0; d < task.informative; ++d) {
            centers(k, d) = task.separation * normal(rng);
        }
    }
    ToyDataset ds{Matrix<double>(task.samples, task.input_dim), std::vector<std::size_t>(task.samples)};
    for (std::size_t i = 0; i < task.samples; ++i) {
        const std::size_t k = i % task.classes;
        ds.labels[i] = k;
        for (std::size_t d = 0; d < task.input_dim; ++d) {
            ds.inputs(i, d) = centers(k, d) + normal(rng);
        }
    }
    return ds;
}

/// Initial weights: Xavier-normal, drawn in float so that a zero-step run
/// reproduces them exactly. Matrix l has shape widths[l+1] x widths[l]; the
/// first ceil(L/2) matrices are tagged encoder, the rest decoder.
[[nodiscard]] inline ModelCheckpoint toy_initial_checkpoint(const ToyConfig& cfg)
{
    cfg.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0x1417u};
    std::mt19937_64 rng(seq);
    const std::size_t layers = cfg.layer_widths.size() - 1;
    const std::size_t enc_layers = (layers + 1) / 2;

    ModelCheckpoint ckpt;
    ckpt.profile = Profile::Custom;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto in = cfg.layer_widths[l];
        const auto out = cfg.layer_widths[l + 1];
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(in + out)));
        Matrix<float> w(out, in);
        for (auto& v : w.data()) {
            v = static_cast<float>(normal(rng));
        }
        const bool enc = l < enc_layers;
        LayerMeta meta{enc ? Side::Encoder : Side::Decoder, LayerKind::FC, enc ? l : l - enc_layers, false};
        ckpt.entries.push_back(CheckpointEntry{WeightMatrix{"layer" + std::to_string(l), std::move(w)}, meta, {}});
    }
    return ckpt;
}

namespace detail {

struct Forward
{
    std::vector<Matrix<double>> activations; ///< activations[0] = inputs, last = softmax probabilities
    double cross_entropy = 0.0;
    std::size_t correct = 0;
};

inline Forward forward(const std::vector<Matrix<double>>& weights, const ToyDataset& ds)
{
    Forward f;
    f.activations.push_back(ds.inputs);
    const std::size_t n = ds.inputs.rows();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto& w = weights[l];
        const auto& h = f.activations.back();
        Matrix<double> z(n, w.rows());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < w.rows(); ++o) {
                double acc = 0.0;
                for (std::size_t k = 0; k < w.cols(); ++k) {
                    acc += h(i, k) * w(o, k);
                }
                z(i, o) = acc;
            }
        }
        if (l + 1 < weights.size()) {
            for (auto& v : z.data()) {
                v = std::tanh(v);
            }
        }
        f.activations.push_back(std::move(z));
    }

    auto& p = f.activations.back();
    for (std::size_t i = 0; i < n; ++i) {
        double mx = p(i, 0);
        std::size_t arg = 0;
        for (std::size_t o = 1; o < p.cols(); ++o) {
            if (p(i, o) > mx) {
                mx = p(i, o);
                arg = o;
            }
        }
        double sum = 0.0;
        for (std::size_t o = 0; o < p.cols(); ++o) {
            p(i, o) = std::exp(p(i, o) - mx);
            sum += p(i, o);
        }
        for (std::size_t o = 0; o < p.cols(); ++o) {
            p(i, o) /= sum;
        }
        f.cross_entropy -= std::log(std::max(p(i, ds.labels[i]), 1e-300));
        f.correct += arg == ds.labels[i] ? 1 : 0;
    }
    f.cross_entropy /= static_cast<double>(n);
    return f;
}

/// Mean cross-entropy gradients for every weight matrix.
inline std::vector<Matrix<double>> backward(const std::vector<Matrix<double>>& weights, const Forward& f,
                                            const ToyDataset& ds)
{
    const std::size_t n = ds.inputs.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<Matrix<double>> grads(weights.size());

    Matrix<double> delta = f.activations.back();
    for (std::size_t i = 0; i < n; ++i) {
        delta(i, ds.labels[i]) -= 1.0;
    }
    for (auto& v : delta.data()) {
        v *= inv_n;
    }

    for (std::size_t l = weights.size(); l-- > 0;) {
        const auto& w = weights[l];
        const auto& h = f.activations[l];
        Matrix<double> g(w.rows(), w.cols());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < w.rows(); ++o) {
                const double d = delta(i, o);
                if (d == 0.0) continue;
                for (std::size_t k = 0; k < w.cols(); ++k) {
                    g(o, k) += d * h(i, k);
                }
            }
        }
        grads[l] = std::move(g);
        if (l == 0) {
            break;
        }
        Matrix<double> prev(n, w.cols());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < w.cols(); ++k) {
                double acc = 0.0;
                for (std::size_t o = 0; o < w.rows(); ++o) {
                    acc += delta(i, o) * w(o, k);
                }
                const double a = h(i, k);
                prev(i, k) = acc * (1.0 - a * a);
            }
        }
        delta = std::move(prev);
    }
    return grads;
}

inline double learning_rate_at(const ToyConfig& cfg, std::size_t step) noexcept
{
    if (cfg.schedule == LrSchedule::Constant || cfg.steps <= 1) {
        return cfg.learning_rate;
    }
    const double t = static_cast<double>(step) / static_cast<double>(cfg.steps - 1);
    return 0.5 * cfg.learning_rate * (1.0 + std::cos(std::numbers::pi * t));
}

} // namespace detail

/**
 * Full-batch subgradient descent on cross-entropy plus the SGL penalty.
 * Each step applies `W -= lr * (dCE/dW + penalty_subgradient(W))` to every
 * in-scope matrix. Metrics are recorded at the weights entering each step.
 * Throws Error with the step index if the loss becomes non-finite.
 */
[[nodiscard]] inline TrainResult train_toy(const ToyConfig& cfg)
{
    auto ckpt = toy_initial_checkpoint(cfg);
    const auto ds = make_toy_dataset(cfg.task, cfg.seed);
    const auto scope = detail::resolve_scope(ckpt, cfg.sgl.scope);

    std::vector<Matrix<double>> weights;
    std::vector<double> lam_l1, lam_gl2;
    for (std::size_t l = 0; l < ckpt.entries.size(); ++l) {
        const auto& e = ckpt.entries[l];
        weights.push_back(e.matrix.values.cast<double>());
        lam_l1.push_back(scope[l] ? cfg.sgl.l1_for(e.meta.side) : 0.0);
        lam_gl2.push_back(scope[l] ? cfg.sgl.group_for(e.meta.side) : 0.0);
    }

    TrainResult res;
    res.metrics.reserve(cfg.steps);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const auto f = detail::forward(weights, ds);
        StepMetrics m;
        m.step = step;
        m.learning_rate = detail::learning_rate_at(cfg, step);
        m.cross_entropy = f.cross_entropy;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            m.penalty += matrix_penalty(weights[l], lam_l1[l], lam_gl2[l]);
        }
        m.total = m.cross_entropy + m.penalty;
        if (!std::isfinite(m.total)) {
            throw Error("toy training diverged at step " + std::to_string(step));
        }
        res.metrics.push_back(m);

        if (m.learning_rate == 0.0) {
            continue;
        }
        const auto grads = detail::backward(weights, f, ds);
        for (std::size_t l = 0; l < weights.size(); ++l) {
            const auto sub = penalty_subgradient(weights[l], lam_l1[l], lam_gl2[l]);
            auto w = weights[l].data();
            const auto g = grads[l].data();
            const auto s = sub.data();
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] -= m.learning_rate * (g[i] + s[i]);
            }
        }
    }

    const auto f = detail::forward(weights, ds);
    if (!std::isfinite(f.cross_entropy)) {
        throw Error("toy training diverged at step " + std::to_string(cfg.steps));
    }
    res.accuracy = static_cast<double>(f.correct) / static_cast<double>(ds.labels.size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        ckpt.entries[l].matrix.values = weights[l].cast<float>();
    }
    res.checkpoint = std::move(ckpt);
    return res;
}

/// Columns whose approximate sparsity at theta0 = 0.1 sigma_c reaches `theta_c`.
[[nodiscard]] inline std::size_t count_sparse_columns(const ModelCheckpoint& ckpt, double theta_c = kDefaultThetaC)
{
    std::size_t n = 0;
    for (const auto& e : ckpt.entries) {
        for (const auto& cs : all_column_stats(e.matrix.values)) {
            n += cs.approx_sparsity >= theta_c ? 1 : 0;
        }
    }
    return n;
}

/**
 * Largest relative disagreement between penalty_subgradient and central
 * finite differences of the penalty of `w` (scored as an encoder matrix:
 * lambda1 for L1, lambda3 for the group term). Entries with |w| < eps or in
 * a column with norm < eps sit too close to a kink and are skipped. The step
 * is eps * max(1, |w|).
 */
[[nodiscard]] inline double finite_diff_check(const WeightMatrix& w, const SGLConfig& cfg, double eps)
{
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw InvalidArgument("eps must be positive");
    }
    cfg.validate();
    const double lam_l1 = cfg.lambda1;
    const double lam_gl2 = cfg.lambda3;
    auto x = w.values.cast<double>();
    const auto analytic = penalty_subgradient(x, lam_l1, lam_gl2);

    double worst = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        if (column_norm(x, c) < eps) {
            continue;
        }
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double v = x(r, c);
            if (std::abs(v) < eps) {
                continue;
            }
            const double h = eps * std::max(1.0, std::abs(v));
            x(r, c) = v + h;
            const double up = matrix_penalty(x, lam_l1, lam_gl2);
            x(r, c) = v - h;
            const double down = matrix_penalty(x, lam_l1, lam_gl2);
            x(r, c) = v;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic(r, c);
            const double scale = std::max(std::abs(a), std::abs(numeric));
            if (scale > 0.0) {
                worst = std::max(worst, std::abs(a - numeric) / scale);
            }
        }
    }
    return worst;
}

} // namespace sparsetrim
