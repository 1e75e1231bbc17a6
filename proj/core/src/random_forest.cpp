#include "parsrec/random_forest.hpp"

#include <algorithm>
#include <cmath>

#include "parsrec/errors.hpp"
#include "parsrec/rng.hpp"

namespace parsrec {

namespace {

struct Builder {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;
    std::size_t n_classes;
    const ForestParams& params;
    int n_try;
    std::mt19937_64 rng;
    DecisionTree tree;
    std::vector<double>& split_gain;
    double n_total;

    double gini(const std::vector<double>& counts, double total) const {
        if (total <= 0.0) return 0.0;
        double s = 0.0;
        for (double c : counts) {
            const double p = c / total;
            s += p * p;
        }
        return 1.0 - s;
    }

    // Distinct feature indices drawn without replacement.
    void sample_features(std::vector<int>& out) {
        out.clear();
        const int d = static_cast<int>(x[0].size());
        const int k = std::min(n_try, d);
        while (static_cast<int>(out.size()) < k) {
            const int f = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(d)));
            if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
        }
    }

    int build(std::vector<std::uint32_t>& samples, int depth) {
        std::vector<double> counts(n_classes, 0.0);
        for (auto i : samples) counts[static_cast<std::size_t>(y[i])] += 1.0;
        const double total = static_cast<double>(samples.size());
        const double node_gini = gini(counts, total);

        const auto make_leaf = [&]() {
            TreeNode leaf;
            leaf.class_distribution.resize(n_classes, 0.0);
            for (std::size_t c = 0; c < n_classes; ++c)
                leaf.class_distribution[c] = total > 0.0 ? counts[c] / total : 0.0;
            tree.nodes.push_back(std::move(leaf));
            return static_cast<int>(tree.nodes.size() - 1);
        };

        if (depth >= params.max_depth || node_gini <= 0.0 ||
            samples.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf))
            return make_leaf();

        std::vector<int> features;
        sample_features(features);

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 1e-12;
        std::vector<std::pair<double, std::uint32_t>> vals;
        std::vector<double> left_counts(n_classes);
        for (int f : features) {
            vals.clear();
            for (auto i : samples) vals.emplace_back(x[i][static_cast<std::size_t>(f)], i);
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            // Scan split points between consecutive distinct values.
            for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
                left_counts[static_cast<std::size_t>(y[vals[k].second])] += 1.0;
                if (vals[k].first == vals[k + 1].first) continue;
                const double nl = static_cast<double>(k + 1);
                const double nr = total - nl;
                if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
                double gl = 0.0, gr = 0.0;
                for (std::size_t c = 0; c < n_classes; ++c) {
                    const double pl = left_counts[c] / nl;
                    const double pr = (counts[c] - left_counts[c]) / nr;
                    gl += pl * pl;
                    gr += pr * pr;
                }
                const double gain =
                    node_gini - (nl / total) * (1.0 - gl) - (nr / total) * (1.0 - gr);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (vals[k].first + vals[k + 1].first);
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::uint32_t> left, right;
        for (auto i : samples) {
            if (x[i][static_cast<std::size_t>(best_feature)] <= best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        if (left.empty() || right.empty()) return make_leaf();

        split_gain[static_cast<std::size_t>(best_feature)] += (total / n_total) * best_gain;

        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node_index)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(node_index)].threshold = best_threshold;
        samples.clear();
        samples.shrink_to_fit();
        const int li = build(left, depth + 1);
        const int ri = build(right, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_index)].left = li;
        tree.nodes[static_cast<std::size_t>(node_index)].right = ri;
        return node_index;
    }
};

}  // namespace

RandomForest fit_random_forest(const std::vector<std::vector<double>>& x,
                               const std::vector<int>& y, const ForestParams& params) {
    const std::size_t n = x.size();
    if (n < 2) throw InvalidInput("fit_random_forest: need at least 2 samples");
    if (y.size() != n) throw InvalidInput("fit_random_forest: row/label count mismatch");
    int max_label = 0;
    for (int label : y) {
        if (label < 0) throw InvalidInput("fit_random_forest: negative class label");
        max_label = std::max(max_label, label);
    }

    RandomForest forest;
    forest.params = params;
    forest.n_features = x[0].size();
    forest.n_classes = static_cast<std::size_t>(max_label) + 1;
    forest.split_gain.assign(forest.n_features, 0.0);

    const int n_try = std::max(
        1, static_cast<int>(std::lround(params.features_per_split_fraction *
                                        std::sqrt(static_cast<double>(forest.n_features)))));

    for (int t = 0; t < params.n_trees; ++t) {
        std::mt19937_64 rng(derive_seed(params.seed, "tree", static_cast<std::uint64_t>(t)));
        std::vector<std::uint32_t> samples;
        std::vector<std::uint8_t> in_bag(n, 0);
        samples.reserve(n);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto pick = static_cast<std::uint32_t>(uniform_below(rng, n));
                samples.push_back(pick);
                in_bag[pick] = 1;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                samples.push_back(static_cast<std::uint32_t>(i));
                in_bag[i] = 1;
            }
        }
        Builder builder{x, y, forest.n_classes, params, n_try, std::move(rng),
                        DecisionTree{},       forest.split_gain, static_cast<double>(samples.size())};
        std::vector<std::uint32_t> root_samples = std::move(samples);
        builder.build(root_samples, 0);
        forest.trees.push_back(std::move(builder.tree));
        forest.in_bag.push_back(std::move(in_bag));
    }
    return forest;
}

std::vector<double> feature_importances(const RandomForest& forest) {
    std::vector<double> imp(forest.n_features, 0.0);
    if (forest.trees.empty()) return imp;
    for (std::size_t f = 0; f < forest.n_features; ++f)
        imp[f] = forest.split_gain[f] / static_cast<double>(forest.trees.size());
    double sum = 0.0;
    for (double v : imp) sum += v;
    if (sum > 0.0)
        for (double& v : imp) v /= sum;
    return imp;
}

std::vector<double> predict_tree_distribution(const DecisionTree& tree,
                                              const std::vector<double>& x) {
    int idx = 0;
    while (true) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
        if (node.feature < 0) return node.class_distribution;
        idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
}

int predict_forest(const RandomForest& forest, const std::vector<double>& x) {
    std::vector<double> votes(forest.n_classes, 0.0);
    for (const auto& tree : forest.trees) {
        const auto dist = predict_tree_distribution(tree, x);
        for (std::size_t c = 0; c < dist.size(); ++c) votes[c] += dist[c];
    }
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

double oob_accuracy(const RandomForest& forest, const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y) {
    std::size_t scored = 0, correct = 0;
    std::vector<double> votes(forest.n_classes);
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::fill(votes.begin(), votes.end(), 0.0);
        bool any = false;
        for (std::size_t t = 0; t < forest.trees.size(); ++t) {
            if (forest.in_bag[t][i]) continue;
            const auto dist = predict_tree_distribution(forest.trees[t], x[i]);
            for (std::size_t c = 0; c < dist.size(); ++c) votes[c] += dist[c];
            any = true;
        }
        if (!any) continue;
        ++scored;
        const int pred =
            static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        if (pred == y[i]) ++correct;
    }
    return scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
}

}  // namespace parsrec
