#include "arlif/attention.hpp"

#include <algorithm>
#include <cmath>

#include "arlif/error.hpp"
#include "arlif/random.hpp"

namespace arlif {

namespace {

// out = in * w + 1 * b^T
void affine(const Matrix& in, const Matrix& w, std::span<const double> b, Matrix& out) {
    const std::size_t k = w.cols();
    out.resize(in.rows(), k);
    for (std::size_t i = 0; i < in.rows(); ++i) {
        auto dst = out.row(i);
        std::copy(b.begin(), b.end(), dst.begin());
        const auto src = in.row(i);
        for (std::size_t l = 0; l < in.cols(); ++l) {
            const double x = src[l];
            const auto wl = w.row(l);
            for (std::size_t j = 0; j < k; ++j) dst[j] += x * wl[j];
        }
    }
}

void softmax_rows_inplace(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        const double peak = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (auto& v : row) {
            v = std::exp(v - peak);
            total += v;
        }
        for (auto& v : row) v /= total;
    }
}

// Accumulates the gradients of out = in * w + b given d(out).
void affine_backward(const Matrix& in, const Matrix& d_out, Matrix& d_w, std::vector<double>& d_b) {
    for (std::size_t i = 0; i < in.rows(); ++i) {
        const auto x = in.row(i);
        const auto g = d_out.row(i);
        for (std::size_t j = 0; j < g.size(); ++j) d_b[j] += g[j];
        for (std::size_t l = 0; l < x.size(); ++l) {
            auto dw = d_w.row(l);
            for (std::size_t j = 0; j < g.size(); ++j) dw[j] += x[l] * g[j];
        }
    }
}

}  // namespace

AttentionParams AttentionParams::zeros(std::size_t k) {
    AttentionParams p;
    p.wq = Matrix(k, k);
    p.wk = Matrix(k, k);
    p.wv = Matrix(k, k);
    p.bq.assign(k, 0.0);
    p.bk.assign(k, 0.0);
    p.bv.assign(k, 0.0);
    return p;
}

AttentionParams init_params(std::size_t k, std::uint64_t seed, double scale) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "window k must be >= 1");
    if (!(scale >= 0.0)) throw Error(ErrorKind::InvalidArgument, "init scale must be >= 0");
    auto p = AttentionParams::zeros(k);
    p.wv = Matrix::identity(k);
    Rng rng(splitmix64(seed));
    for (auto& w : p.wq.flat()) w = uniform(rng, -scale, scale);
    for (auto& w : p.wk.flat()) w = uniform(rng, -scale, scale);
    return p;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out = logits;
    softmax_rows_inplace(out);
    return out;
}

double forward(const AttentionParams& params, const Matrix& history, ForwardCache& cache) {
    const std::size_t k = params.k();
    const std::size_t trees = history.rows();
    if (history.cols() != k || trees == 0) {
        throw Error(ErrorKind::DimensionMismatch,
                    "history is " + std::to_string(trees) + "x" + std::to_string(history.cols()) +
                        ", attention window is " + std::to_string(k));
    }

    cache.h = history;
    affine(history, params.wq, params.bq, cache.q);
    affine(history, params.wk, params.bk, cache.k);
    affine(history, params.wv, params.bv, cache.v);

    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
    cache.a.resize(trees, trees);
    for (std::size_t i = 0; i < trees; ++i) {
        const auto qi = cache.q.row(i);
        for (std::size_t j = 0; j < trees; ++j) {
            const auto kj = cache.k.row(j);
            double dot = 0.0;
            for (std::size_t c = 0; c < k; ++c) dot += qi[c] * kj[c];
            cache.a(i, j) = dot * inv_sqrt_k;
        }
    }
    softmax_rows_inplace(cache.a);

    cache.e.resize(trees, k);
    for (std::size_t i = 0; i < trees; ++i) {
        auto ei = cache.e.row(i);
        for (std::size_t j = 0; j < trees; ++j) {
            const double w = cache.a(i, j);
            const auto vj = cache.v.row(j);
            for (std::size_t c = 0; c < k; ++c) ei[c] += w * vj[c];
        }
    }

    double total = 0.0;
    for (std::size_t i = 0; i < trees; ++i) total += cache.e(i, k - 1);
    cache.readout = total / static_cast<double>(trees);
    cache.score = std::clamp(cache.readout, kScoreEpsilon, 1.0 - kScoreEpsilon);
    return cache.score;
}

double bce_loss(double score, double target) {
    const double s = std::clamp(score, kScoreEpsilon, 1.0 - kScoreEpsilon);
    return -(target * std::log(s) + (1.0 - target) * std::log(1.0 - s));
}

AttentionGrads backward(const AttentionParams& params, const ForwardCache& cache, double target) {
    const std::size_t k = params.k();
    const std::size_t trees = cache.h.rows();
    if (cache.h.cols() != k || cache.a.rows() != trees || cache.e.cols() != k || trees == 0) {
        throw Error(ErrorKind::StaleCache, "forward cache does not match attention window " +
                                               std::to_string(k));
    }

    auto grads = AttentionParams::zeros(k);
    const double s = cache.score;
    if (cache.readout < kScoreEpsilon || cache.readout > 1.0 - kScoreEpsilon) return grads;

    // dL/dr, already divided by T for the tree-mean readout: dL/dE[i, k-1] = g.
    const double g = (s - target) / (s * (1.0 - s)) / static_cast<double>(trees);
    if (g == 0.0) return grads;

    // E = A V with only column k-1 of dE non-zero.
    Matrix d_v(trees, k);
    for (std::size_t j = 0; j < trees; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < trees; ++i) col += cache.a(i, j);
        d_v(j, k - 1) = g * col;
    }

    // Softmax Jacobian per row: dS = A * (dA - <A, dA>), dA[i, j] = g * V[j, k-1].
    Matrix d_logits(trees, trees);
    for (std::size_t i = 0; i < trees; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < trees; ++j) inner += cache.a(i, j) * g * cache.v(j, k - 1);
        for (std::size_t j = 0; j < trees; ++j) {
            d_logits(i, j) = cache.a(i, j) * (g * cache.v(j, k - 1) - inner);
        }
    }

    // S = Q K^T / sqrt(k).
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
    Matrix d_q(trees, k);
    Matrix d_k(trees, k);
    for (std::size_t i = 0; i < trees; ++i) {
        for (std::size_t j = 0; j < trees; ++j) {
            const double d = d_logits(i, j) * inv_sqrt_k;
            if (d == 0.0) continue;
            for (std::size_t c = 0; c < k; ++c) {
                d_q(i, c) += d * cache.k(j, c);
                d_k(j, c) += d * cache.q(i, c);
            }
        }
    }

    affine_backward(cache.h, d_q, grads.wq, grads.bq);
    affine_backward(cache.h, d_k, grads.wk, grads.bk);
    affine_backward(cache.h, d_v, grads.wv, grads.bv);
    return grads;
}

void sgd_step(AttentionParams& params, const AttentionGrads& grads, double eta) {
    if (!(eta > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be > 0");
    if (grads.k() != params.k() || grads.scalar_count() != params.scalar_count()) {
        throw Error(ErrorKind::DimensionMismatch, "gradient shape does not match parameters");
    }
    const auto step = [eta](std::span<double> p, std::span<const double> g) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= eta * g[i];
    };
    step(params.wq.flat(), grads.wq.flat());
    step(params.wk.flat(), grads.wk.flat());
    step(params.wv.flat(), grads.wv.flat());
    step(params.bq, grads.bq);
    step(params.bk, grads.bk);
    step(params.bv, grads.bv);
}

void normalized_step(AttentionParams& params, const AttentionGrads& grads, const ForwardCache& cache,
                     double target, double eta) {
    const double s = cache.score;
    double norm2 = 0.0;
    const auto accumulate = [&norm2](std::span<const double> g) {
        for (const double v : g) norm2 += v * v;
    };
    accumulate(grads.wq.flat());
    accumulate(grads.wk.flat());
    accumulate(grads.wv.flat());
    accumulate(grads.bq);
    accumulate(grads.bk);
    accumulate(grads.bv);
    if (norm2 == 0.0) return;

    // grads = dL/dr * J, so (s - y) J / |J|^2 = (s - y) dL/dr grads / |grads|^2.
    const double d_readout = (s - target) / (s * (1.0 - s));
    sgd_step(params, grads, eta * (s - target) * d_readout / norm2);
}

}  // namespace arlif
