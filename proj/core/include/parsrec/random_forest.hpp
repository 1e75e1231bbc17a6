#pragma once

#include <cstdint>
#include <vector>

namespace parsrec {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 12;
    int min_samples_leaf = 5;
    // Features tried per split: max(1, round(fraction * sqrt(d))) with
    // fraction 1.0, i.e. the conventional sqrt(d).
    double features_per_split_fraction = 1.0;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> class_distribution;  // leaves only; sums to 1
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    std::vector<std::vector<std::uint8_t>> in_bag;  // [tree][sample]
    ForestParams params;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    // Summed impurity decrease per feature, accumulated during fitting.
    std::vector<double> split_gain;
};

// Gini-impurity classification forest: bootstrap sample per tree, random
// feature subset per split, growth until the depth/min-leaf limits.
// Deterministic given params.seed.
RandomForest fit_random_forest(const std::vector<std::vector<double>>& x,
                               const std::vector<int>& y, const ForestParams& params);

// Mean impurity decrease per feature, normalized to sum to 1; the all-zero
// vector when no tree made any split.
std::vector<double> feature_importances(const RandomForest& forest);

std::vector<double> predict_tree_distribution(const DecisionTree& tree,
                                              const std::vector<double>& x);
int predict_forest(const RandomForest& forest, const std::vector<double>& x);

// Out-of-bag accuracy; samples that were in-bag for every tree are skipped.
double oob_accuracy(const RandomForest& forest, const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y);

}  // namespace parsrec
