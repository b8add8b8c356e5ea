#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "arlif/ingest.hpp"
#include "arlif/random.hpp"

namespace arlif {

/// Average path length of an unsuccessful BST search over n points.
/// Exact harmonic numbers up to 1000, the logarithmic approximation above.
double c_factor(std::size_t n);

/// One node of a flattened isolation tree. Children always sit at larger
/// indices than their parent; node 0 is the root.
struct TreeNode {
    static constexpr std::uint32_t kLeaf = UINT32_MAX;

    std::uint32_t column = kLeaf;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t size = 0;   // leaves only
    std::uint32_t depth = 0;  // leaves only

    bool is_leaf() const noexcept { return column == kLeaf; }
    bool operator==(const TreeNode&) const = default;
};

struct IsolationTree {
    std::vector<TreeNode> nodes;

    /// Index of the leaf `x` routes to.
    std::size_t leaf_for(std::span<const double> x) const;

    bool operator==(const IsolationTree&) const = default;
};

struct IsolationForest {
    std::vector<IsolationTree> trees;
    std::size_t psi = 0;  // effective subsample size
    std::size_t dims = 0;
    double c_psi = 0.0;
    std::size_t height_limit = 0;

    std::size_t size() const noexcept { return trees.size(); }
    bool operator==(const IsolationForest&) const = default;
};

inline constexpr std::size_t kDefaultTrees = 100;
inline constexpr std::size_t kDefaultPsi = 256;

/// ceil(log2 n) for n >= 1.
std::size_t height_limit_for(std::size_t n);

IsolationTree build_tree(std::span<const FeatureVector> subsample, Rng& rng,
                         std::size_t height_limit);

IsolationForest build_forest(std::span<const FeatureVector> data, std::size_t trees,
                             std::size_t psi, std::uint64_t seed);

double path_length(const IsolationTree& tree, std::span<const double> x);

/// Per-tree anomaly probability 2^(-h(x)/c(psi)), in (0, 1].
double tree_proba(const IsolationTree& tree, std::span<const double> x, double c_psi);

/// Classical isolation-forest score 2^(-mean h(x)/c(psi)).
double forest_score(const IsolationForest& forest, std::span<const double> x);

/// tree_proba for every tree, written into `out` (size == forest.size()).
void tree_probas(const IsolationForest& forest, std::span<const double> x, std::span<double> out);

}  // namespace arlif
