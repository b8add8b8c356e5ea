#pragma once

#include <cstddef>
#include <cstdint>

#include "arlif/matrix.hpp"

namespace arlif {

inline constexpr double kScoreEpsilon = 1e-6;
inline constexpr std::size_t kDefaultWindow = 10;
inline constexpr double kDefaultInitScale = 0.01;

/// Query, key and value affine maps R^k -> R^k. Exactly 3k(k+1) scalars.
struct AttentionParams {
    Matrix wq, wk, wv;
    std::vector<double> bq, bk, bv;

    std::size_t k() const noexcept { return wq.rows(); }
    std::size_t scalar_count() const noexcept {
        return wq.size() + wk.size() + wv.size() + bq.size() + bk.size() + bv.size();
    }

    /// Zero-filled parameters (and gradient buffers) for window k.
    static AttentionParams zeros(std::size_t k);

    bool operator==(const AttentionParams&) const = default;
};

using AttentionGrads = AttentionParams;

constexpr std::size_t param_count(std::size_t k) noexcept { return 3 * k * (k + 1); }

/// Wv = I, zero biases, Wq and Wk uniform in [-scale, scale].
AttentionParams init_params(std::size_t k, std::uint64_t seed, double scale = kDefaultInitScale);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

/// Intermediates of one forward pass, consumed by backward.
struct ForwardCache {
    Matrix h, q, k, v;
    Matrix a;  // T x T attention weights
    Matrix e;  // T x k attended embeddings
    double readout = 0.0;
    double score = 0.0;
};

/// Attention over the T x k history matrix (row i = tree i, last column most
/// recent). The score is the tree-mean of the most recent embedding column,
/// clamped to [eps, 1 - eps].
double forward(const AttentionParams& params, const Matrix& history, ForwardCache& cache);

/// Binary cross-entropy of a clamped score.
double bce_loss(double score, double target);

/// Gradients of bce_loss(score, target) with respect to every parameter block.
/// The target is the binary label; fractional targets in [0, 1] are accepted.
/// Zero when the readout was clamped.
AttentionGrads backward(const AttentionParams& params, const ForwardCache& cache, double target);

/// p <- p - eta * g for every scalar.
void sgd_step(AttentionParams& params, const AttentionGrads& grads, double eta);

/// Online update used by the detector. Moves along the BCE gradient `grads`
/// (from backward on `cache`) with the step length chosen so the first-order
/// change of the readout is eta * (target - score). A raw BCE step scales with
/// 1 / (s (1 - s)) and drives the readout into the clamped, gradient-free
/// region within a few samples. No-op when the gradient vanishes.
void normalized_step(AttentionParams& params, const AttentionGrads& grads, const ForwardCache& cache,
                     double target, double eta);

}  // namespace arlif
