#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "arlif/attention.hpp"
#include "arlif/error.hpp"
#include "arlif/random.hpp"

using namespace arlif;

namespace {

Matrix random_history(std::size_t trees, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    Matrix h(trees, k);
    for (auto& v : h.flat()) v = uniform(rng, 0.2, 0.8);
    return h;
}

// Non-trivial attention with the readout kept inside (0, 1).
AttentionParams random_params(std::size_t k, std::uint64_t seed) {
    Rng rng(seed ^ 0xABCDEFull);
    auto p = AttentionParams::zeros(k);
    for (auto& v : p.wq.flat()) v = uniform(rng, -1.5, 1.5);
    for (auto& v : p.wk.flat()) v = uniform(rng, -1.5, 1.5);
    p.wv = Matrix::identity(k);
    for (auto& v : p.wv.flat()) v += uniform(rng, -0.2, 0.2);
    for (auto& v : p.bq) v = uniform(rng, -0.3, 0.3);
    for (auto& v : p.bk) v = uniform(rng, -0.3, 0.3);
    for (auto& v : p.bv) v = uniform(rng, -0.1, 0.1);
    return p;
}

std::vector<std::span<double>> blocks(AttentionParams& p) {
    return {p.wq.flat(), p.wk.flat(), p.wv.flat(), p.bq, p.bk, p.bv};
}

double loss_at(const AttentionParams& p, const Matrix& h, double target) {
    ForwardCache cache;
    return bce_loss(forward(p, h, cache), target);
}

// Largest relative error between backward() and central differences.
double max_fd_error(std::size_t k, std::size_t trees, std::uint64_t seed) {
    auto params = random_params(k, seed);
    const auto h = random_history(trees, k, seed + 1);
    const double target = seed % 2 == 0 ? 1.0 : 0.0;

    ForwardCache cache;
    forward(params, h, cache);
    REQUIRE(cache.readout > kScoreEpsilon);
    REQUIRE(cache.readout < 1.0 - kScoreEpsilon);
    auto grads = backward(params, cache, target);

    constexpr double step = 1e-6;
    double worst = 0.0;
    auto param_blocks = blocks(params);
    auto grad_blocks = blocks(grads);
    for (std::size_t b = 0; b < param_blocks.size(); ++b) {
        for (std::size_t i = 0; i < param_blocks[b].size(); ++i) {
            double& theta = param_blocks[b][i];
            const double saved = theta;
            theta = saved + step;
            const double up = loss_at(params, h, target);
            theta = saved - step;
            const double down = loss_at(params, h, target);
            theta = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = grad_blocks[b][i];
            const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-5});
            worst = std::max(worst, std::abs(numeric - analytic) / scale);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("param_count follows 3k(k+1)") {
    CHECK(param_count(1) == 6);
    CHECK(param_count(4) == 60);
    CHECK(param_count(10) == 330);
    for (std::size_t k = 1; k <= 32; ++k) {
        CHECK(init_params(k, 3).scalar_count() == param_count(k));
    }
}

TEST_CASE("init_params") {
    const auto p = init_params(4, 9);
    CHECK(p.wv == Matrix::identity(4));
    CHECK(std::all_of(p.bq.begin(), p.bq.end(), [](double v) { return v == 0.0; }));
    CHECK(std::all_of(p.bk.begin(), p.bk.end(), [](double v) { return v == 0.0; }));
    CHECK(std::all_of(p.bv.begin(), p.bv.end(), [](double v) { return v == 0.0; }));
    for (const double w : p.wq.flat()) CHECK(std::abs(w) <= kDefaultInitScale);
    CHECK(init_params(4, 9) == p);
    CHECK_FALSE(init_params(4, 10) == p);

    const auto flat = init_params(3, 1, 0.0);
    CHECK(flat.wq == Matrix(3, 3));
    CHECK(flat.wk == Matrix(3, 3));
    ForwardCache cache;
    forward(flat, random_history(5, 3, 2), cache);
    for (const double a : cache.a.flat()) CHECK(a == doctest::Approx(0.2).epsilon(1e-15));

    CHECK_THROWS_AS(init_params(0, 1), Error);
}

TEST_CASE("softmax_rows") {
    Matrix m(3, 2);
    m(0, 0) = 0.0;
    m(0, 1) = 0.0;
    m(1, 0) = std::log(2.0);
    m(1, 1) = 0.0;
    m(2, 0) = 1000.0;
    m(2, 1) = 0.0;
    const auto s = softmax_rows(m);
    CHECK(s(0, 0) == 0.5);
    CHECK(s(0, 1) == 0.5);
    CHECK(s(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s(2, 0) == 1.0);
    CHECK(std::isfinite(s(2, 1)));

    Rng rng(8);
    Matrix r(4, 6);
    for (auto& v : r.flat()) v = uniform(rng, -5.0, 5.0);
    Matrix shifted = r;
    for (std::size_t i = 0; i < 4; ++i) {
        for (auto& v : shifted.row(i)) v += 3.0 * static_cast<double>(i) - 4.0;
    }
    const auto a = softmax_rows(r);
    const auto b = softmax_rows(shifted);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.flat()[i] == doctest::Approx(b.flat()[i]).epsilon(1e-12));
    }
}

TEST_CASE("forward hand-computed instance") {
    // Wq = Wk = 0, Wv = I: uniform attention, E rows are the column means.
    const auto p = init_params(2, 0, 0.0);
    Matrix h(2, 2);
    h(0, 0) = 0.2;
    h(0, 1) = 0.8;
    h(1, 0) = 0.4;
    h(1, 1) = 0.6;
    ForwardCache cache;
    const double s = forward(p, h, cache);
    CHECK(s == doctest::Approx(0.7).epsilon(1e-15));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(cache.a(i, 0) == 0.5);
        CHECK(cache.a(i, 1) == 0.5);
        CHECK(cache.e(i, 0) == doctest::Approx(0.3).epsilon(1e-15));
        CHECK(cache.e(i, 1) == doctest::Approx(0.7).epsilon(1e-15));
    }
}

TEST_CASE("forward with a single tree") {
    const auto p = random_params(3, 4);
    const auto h = random_history(1, 3, 5);
    ForwardCache cache;
    const double s = forward(p, h, cache);
    CHECK(cache.a(0, 0) == 1.0);
    for (std::size_t c = 0; c < 3; ++c) CHECK(cache.e(0, c) == cache.v(0, c));
    CHECK(s == std::clamp(cache.v(0, 2), kScoreEpsilon, 1.0 - kScoreEpsilon));
}

TEST_CASE("forward invariants") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t k = 2 + seed % 4;
        const std::size_t trees = 1 + seed * 3;
        const auto p = random_params(k, seed);
        const auto h = random_history(trees, k, seed + 100);

        ForwardCache cache;
        const double s = forward(p, h, cache);
        CHECK(s >= kScoreEpsilon);
        CHECK(s <= 1.0 - kScoreEpsilon);
        for (std::size_t i = 0; i < trees; ++i) {
            const auto row = cache.a.row(i);
            CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
            for (const double a : row) {
                CHECK(a >= 0.0);
                CHECK(a <= 1.0);
            }
        }

        // Pure: bit-identical on repeat.
        ForwardCache again;
        CHECK(forward(p, h, again) == s);
        CHECK(again.e == cache.e);

        // Permuting trees permutes E rows and keeps the score.
        std::vector<std::size_t> perm(trees);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(seed);
        for (std::size_t i = trees; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
        Matrix permuted(trees, k);
        for (std::size_t i = 0; i < trees; ++i) {
            std::copy_n(h.row(perm[i]).begin(), k, permuted.row(i).begin());
        }
        ForwardCache pc;
        CHECK(forward(p, permuted, pc) == doctest::Approx(s).epsilon(1e-12));
        for (std::size_t i = 0; i < trees; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
                CHECK(pc.e(i, c) == doctest::Approx(cache.e(perm[i], c)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("uniform attention reduces to the mean of current probabilities") {
    const auto p = init_params(4, 0, 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto h = random_history(7, 4, seed);
        double mean = 0.0;
        for (std::size_t i = 0; i < 7; ++i) mean += h(i, 3);
        mean /= 7.0;
        ForwardCache cache;
        CHECK(std::abs(forward(p, h, cache) - mean) < 1e-12);
    }
}

TEST_CASE("forward rejects mismatched history") {
    ForwardCache cache;
    CHECK_THROWS_AS(forward(init_params(3, 0), Matrix(4, 2), cache), Error);
    CHECK_THROWS_AS(forward(init_params(3, 0), Matrix(0, 3), cache), Error);
}

TEST_CASE("backward matches central finite differences") {
    CHECK(max_fd_error(3, 5, 0) < 1e-4);
    const std::size_t ks[] = {2, 3, 5};
    const std::size_t ts[] = {1, 4, 16};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto k = ks[seed % 3];
        const auto trees = ts[(seed / 3) % 3];
        CAPTURE(k);
        CAPTURE(trees);
        CHECK(max_fd_error(k, trees, seed) < 1e-4);
    }
}

TEST_CASE("backward special cases") {
    const auto p = random_params(3, 2);

    SUBCASE("target equal to the score gives zero gradients") {
        const auto h = random_history(4, 3, 3);
        ForwardCache cache;
        const double s = forward(p, h, cache);
        auto g = backward(p, cache, s);
        for (auto block : blocks(g)) {
            for (const double v : block) CHECK(v == 0.0);
        }
    }
    SUBCASE("single tree has no query/key gradient") {
        const auto h = random_history(1, 3, 4);
        ForwardCache cache;
        forward(p, h, cache);
        const auto g = backward(p, cache, 1.0);
        for (const double v : g.wq.flat()) CHECK(v == 0.0);
        for (const double v : g.wk.flat()) CHECK(v == 0.0);
        for (const double v : g.bq) CHECK(v == 0.0);
        for (const double v : g.bk) CHECK(v == 0.0);
        CHECK(g.bv[2] != 0.0);
    }
    SUBCASE("clamped readout gives zero gradients") {
        auto big = p;
        for (auto& v : big.bv) v = 5.0;
        ForwardCache cache;
        CHECK(forward(big, random_history(4, 3, 5), cache) == 1.0 - kScoreEpsilon);
        auto g = backward(big, cache, 0.0);
        for (auto block : blocks(g)) {
            for (const double v : block) CHECK(v == 0.0);
        }
    }
    SUBCASE("stale cache") {
        ForwardCache cache;
        forward(init_params(2, 0), random_history(3, 2, 1), cache);
        CHECK_THROWS_AS(backward(p, cache, 1.0), Error);
    }
}

TEST_CASE("sgd_step") {
    SUBCASE("zero gradients leave params unchanged") {
        auto p = random_params(3, 1);
        const auto before = p;
        sgd_step(p, AttentionParams::zeros(3), 0.5);
        CHECK(p == before);
    }
    SUBCASE("one unit step") {
        auto p = AttentionParams::zeros(3);
        auto g = AttentionParams::zeros(3);
        g.wq = Matrix::identity(3);
        sgd_step(p, g, 1.0);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) CHECK(p.wq(i, j) == (i == j ? -1.0 : 0.0));
        }
    }
    SUBCASE("two steps on a fixed sample reduce the loss") {
        auto p = init_params(4, 0);
        const auto h = random_history(6, 4, 77);
        ForwardCache cache;
        const double loss1 = bce_loss(forward(p, h, cache), 1.0);
        sgd_step(p, backward(p, cache, 1.0), 0.01);
        const double loss2 = bce_loss(forward(p, h, cache), 1.0);
        sgd_step(p, backward(p, cache, 1.0), 0.01);
        const double loss3 = bce_loss(forward(p, h, cache), 1.0);
        CHECK(loss2 < loss1);
        CHECK(loss3 < loss2);
    }
    SUBCASE("invalid arguments") {
        auto p = AttentionParams::zeros(3);
        CHECK_THROWS_AS(sgd_step(p, AttentionParams::zeros(3), 0.0), Error);
        CHECK_THROWS_AS(sgd_step(p, AttentionParams::zeros(2), 0.1), Error);
    }
}

TEST_CASE("normalized_step moves the readout by eta * (target - score) to first order") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto p = random_params(3, seed);
        const auto h = random_history(5, 3, seed + 40);
        const double target = seed % 2 == 0 ? 1.0 : 0.0;
        ForwardCache cache;
        const double before = forward(p, h, cache);
        const double eta = 1e-3;
        normalized_step(p, backward(p, cache, target), cache, target, eta);
        ForwardCache after;
        const double moved = forward(p, h, after) - before;
        CHECK(moved == doctest::Approx(eta * (target - before)).epsilon(1e-2));
    }

    auto p = random_params(3, 1);
    const auto before = p;
    ForwardCache cache;
    const double s = forward(p, random_history(4, 3, 2), cache);
    normalized_step(p, backward(p, cache, s), cache, s, 0.05);
    CHECK(p == before);
}
