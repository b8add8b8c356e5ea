#include "arlif/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arlif/error.hpp"

namespace arlif {

namespace {

constexpr double kEulerGamma = 0.5772156649;

class TreeBuilder {
public:
    TreeBuilder(std::span<const FeatureVector> points, Rng& rng, std::size_t height_limit)
        : points_(points), rng_(rng), height_limit_(height_limit), dims_(points.front().size()) {}

    IsolationTree build() {
        std::vector<std::uint32_t> index(points_.size());
        std::iota(index.begin(), index.end(), 0u);
        grow(index, 0);
        return IsolationTree{std::move(nodes_)};
    }

private:
    std::uint32_t make_leaf(std::size_t size, std::size_t depth) {
        TreeNode leaf;
        leaf.size = static_cast<std::uint32_t>(size);
        leaf.depth = static_cast<std::uint32_t>(depth);
        nodes_.push_back(leaf);
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    // Preorder emission keeps every child index above its parent's.
    std::uint32_t grow(std::span<std::uint32_t> index, std::size_t depth) {
        if (index.size() <= 1 || depth >= height_limit_) return make_leaf(index.size(), depth);

        candidates_.clear();
        lo_.assign(dims_, 0.0);
        hi_.assign(dims_, 0.0);
        for (std::size_t d = 0; d < dims_; ++d) {
            double lo = points_[index[0]][d];
            double hi = lo;
            for (const auto i : index) {
                lo = std::min(lo, points_[i][d]);
                hi = std::max(hi, points_[i][d]);
            }
            lo_[d] = lo;
            hi_[d] = hi;
            if (hi > lo) candidates_.push_back(d);
        }
        if (candidates_.empty()) return make_leaf(index.size(), depth);

        const std::size_t column = candidates_[uniform_index(rng_, candidates_.size())];
        const double lo = lo_[column];
        const double hi = hi_[column];
        double threshold;
        do {
            threshold = uniform(rng_, lo, hi);
        } while (!(threshold > lo && threshold <= hi));

        const auto mid = std::partition(index.begin(), index.end(), [&](std::uint32_t i) {
            return points_[i][column] < threshold;
        });
        const auto split = static_cast<std::size_t>(mid - index.begin());

        const auto self = static_cast<std::uint32_t>(nodes_.size());
        TreeNode node;
        node.column = static_cast<std::uint32_t>(column);
        node.threshold = threshold;
        nodes_.push_back(node);
        const auto left = grow(index.first(split), depth + 1);
        const auto right = grow(index.subspan(split), depth + 1);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    std::span<const FeatureVector> points_;
    Rng& rng_;
    std::size_t height_limit_;
    std::size_t dims_;
    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> candidates_;
    std::vector<double> lo_, hi_;
};

}  // namespace

double c_factor(std::size_t n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    const double m = static_cast<double>(n);
    return 2.0 * (std::log(m - 1.0) + kEulerGamma) - 2.0 * (m - 1.0) / m;
}

std::size_t height_limit_for(std::size_t n) {
    std::size_t h = 0;
    while ((std::size_t{1} << h) < n) ++h;
    return h;
}

std::size_t IsolationTree::leaf_for(std::span<const double> x) const {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
        const auto& node = nodes[at];
        at = x[node.column] < node.threshold ? node.left : node.right;
    }
    return at;
}

IsolationTree build_tree(std::span<const FeatureVector> subsample, Rng& rng,
                         std::size_t height_limit) {
    if (subsample.empty()) throw Error(ErrorKind::InsufficientData, "empty subsample");
    const auto dims = subsample.front().size();
    for (const auto& v : subsample) {
        if (v.size() != dims) {
            throw Error(ErrorKind::DimensionMismatch, "subsample vectors differ in length");
        }
    }
    return TreeBuilder(subsample, rng, height_limit).build();
}

IsolationForest build_forest(std::span<const FeatureVector> data, std::size_t trees,
                             std::size_t psi, std::uint64_t seed) {
    if (data.size() < 2) {
        throw Error(ErrorKind::InsufficientData, "need at least 2 points, got " +
                                                     std::to_string(data.size()));
    }
    if (trees < 1) throw Error(ErrorKind::InvalidArgument, "tree count must be >= 1");
    if (psi < 2) throw Error(ErrorKind::InvalidArgument, "psi must be >= 2");

    IsolationForest forest;
    forest.psi = std::min(psi, data.size());
    forest.dims = data.front().size();
    forest.c_psi = c_factor(forest.psi);
    forest.height_limit = height_limit_for(forest.psi);
    forest.trees.reserve(trees);

    std::vector<std::size_t> pool(data.size());
    std::vector<FeatureVector> subsample(forest.psi);
    for (std::size_t t = 0; t < trees; ++t) {
        auto rng = derive_rng(seed, t);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        // Partial Fisher-Yates: the first psi slots are a uniform draw without replacement.
        for (std::size_t i = 0; i < forest.psi; ++i) {
            const auto j = i + uniform_index(rng, pool.size() - i);
            std::swap(pool[i], pool[j]);
            subsample[i] = data[pool[i]];
        }
        forest.trees.push_back(build_tree(subsample, rng, forest.height_limit));
    }
    return forest;
}

double path_length(const IsolationTree& tree, std::span<const double> x) {
    const auto& leaf = tree.nodes[tree.leaf_for(x)];
    return static_cast<double>(leaf.depth) + c_factor(leaf.size);
}

double tree_proba(const IsolationTree& tree, std::span<const double> x, double c_psi) {
    return std::exp2(-path_length(tree, x) / c_psi);
}

double forest_score(const IsolationForest& forest, std::span<const double> x) {
    double total = 0.0;
    for (const auto& tree : forest.trees) total += path_length(tree, x);
    return std::exp2(-(total / static_cast<double>(forest.size())) / forest.c_psi);
}

void tree_probas(const IsolationForest& forest, std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < forest.size(); ++i) {
        out[i] = tree_proba(forest.trees[i], x, forest.c_psi);
    }
}

}  // namespace arlif
