#include "torapp/error.hpp"
#include "torapp/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace torapp {
namespace {

std::size_t majority(const std::vector<std::size_t>& counts) {
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const std::vector<std::size_t>& y, std::size_t n_classes,
                std::optional<std::size_t> max_depth, std::mt19937_64& rng)
        : x_(x), y_(y), n_classes_(n_classes), max_depth_(max_depth), rng_(rng),
          mtry_(std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))))),
          features_(static_cast<std::size_t>(x.cols())) {
        for (std::size_t f = 0; f < features_.size(); ++f) features_[f] = static_cast<int>(f);
        mtry_ = std::min(mtry_, features_.size());
    }

    DecisionTree build(std::vector<std::size_t> rows) {
        rows_ = std::move(rows);
        grow(0, rows_.size(), 0);
        return DecisionTree{std::move(nodes_)};
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0;
        double score = std::numeric_limits<double>::infinity();
    };

    int grow(std::size_t begin, std::size_t end, std::size_t depth) {
        std::vector<std::size_t> counts(n_classes_, 0);
        for (std::size_t i = begin; i < end; ++i) ++counts[y_[rows_[i]]];

        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{});
        nodes_[id].label = majority(counts);

        const std::size_t n = end - begin;
        const bool pure = counts[nodes_[id].label] == n;
        if (pure || n < 2 || (max_depth_ && depth >= *max_depth_)) return id;

        // Partial Fisher-Yates: the first mtry_ entries become the candidates.
        for (std::size_t i = 0; i < mtry_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, features_.size() - 1);
            std::swap(features_[i], features_[pick(rng_)]);
        }
        Split best;
        for (std::size_t i = 0; i < mtry_; ++i) consider(features_[i], begin, end, counts, best);
        if (best.feature < 0) return id;

        const auto mid = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                               rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                               [&](std::size_t r) {
                                                   return x_(static_cast<Eigen::Index>(r), best.feature) <=
                                                          best.threshold;
                                               });
        const auto split_at = static_cast<std::size_t>(mid - rows_.begin());
        const int left = grow(begin, split_at, depth + 1);
        const int right = grow(split_at, end, depth + 1);
        nodes_[id].feature = best.feature;
        nodes_[id].threshold = best.threshold;
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    // Sweep sorted values; score = n_L * gini_L + n_R * gini_R.
    void consider(int feature, std::size_t begin, std::size_t end, const std::vector<std::size_t>& counts,
                  Split& best) {
        sorted_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = rows_[i];
            sorted_.emplace_back(x_(static_cast<Eigen::Index>(r), feature), y_[r]);
        }
        std::sort(sorted_.begin(), sorted_.end());

        left_.assign(n_classes_, 0);
        right_ = counts;
        double sq_left = 0;
        double sq_right = 0;
        for (auto c : counts) sq_right += static_cast<double>(c) * static_cast<double>(c);
        const std::size_t n = sorted_.size();
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const auto c = sorted_[j].second;
            sq_left += 2.0 * static_cast<double>(left_[c]) + 1.0;
            sq_right -= 2.0 * static_cast<double>(right_[c]) - 1.0;
            ++left_[c];
            --right_[c];
            const double lo = sorted_[j].first;
            const double hi = sorted_[j + 1].first;
            if (!(lo < hi)) continue;
            const double nl = static_cast<double>(j + 1);
            const double nr = static_cast<double>(n - j - 1);
            const double score = (nl - sq_left / nl) + (nr - sq_right / nr);
            if (score < best.score) {
                double mid = lo + (hi - lo) / 2;
                if (!(mid < hi)) mid = lo;
                best = Split{feature, mid, score};
            }
        }
    }

    const Eigen::MatrixXd& x_;
    const std::vector<std::size_t>& y_;
    std::size_t n_classes_;
    std::optional<std::size_t> max_depth_;
    std::mt19937_64& rng_;
    std::size_t mtry_;
    std::vector<int> features_;
    std::vector<std::size_t> rows_;
    std::vector<TreeNode> nodes_;
    std::vector<std::pair<double, std::size_t>> sorted_;
    std::vector<std::size_t> left_;
    std::vector<std::size_t> right_;
};

std::mt19937_64 tree_rng(std::uint64_t seed, std::size_t tree) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tree), 0x7265u};
    return std::mt19937_64(seq);
}

} // namespace

std::size_t DecisionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        node = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].label;
}

ClassifierModel train_random_forest(const LabeledDataset& ds, ForestParams params) {
    ds.validate();
    if (ds.size() == 0) throw PreconditionError("cannot train a random forest on an empty dataset");
    if (params.trees < 1) throw PreconditionError("a forest needs at least one tree");

    ForestModel forest{params, std::vector<DecisionTree>(params.trees)};
    const std::size_t n = ds.size();
    auto grow_tree = [&](std::size_t t) {
        auto rng = tree_rng(params.seed, t);
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = draw(rng);
        TreeBuilder builder(ds.features, ds.targets, ds.classes.size(), params.max_depth, rng);
        forest.trees[t] = builder.build(std::move(sample));
    };

    // Each tree owns its generator, so the result does not depend on the
    // number of workers.
    const std::size_t workers =
        std::min<std::size_t>(params.trees, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t t = 0; t < params.trees; ++t) grow_tree(t);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < params.trees; t += workers) grow_tree(t);
            });
    }

    ClassifierModel m;
    m.classes = ds.classes;
    m.scaler_id = ds.scaler_id;
    m.dim = ds.dim();
    m.impl = std::move(forest);
    return m;
}

std::vector<std::size_t> forest_votes(const ForestModel& forest, std::size_t n_classes,
                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
    std::vector<std::size_t> votes(n_classes, 0);
    for (const auto& tree : forest.trees) ++votes.at(tree.predict(x));
    return votes;
}

} // namespace torapp
