#include <algorithm>
#include <cmath>
#include <numeric>

#include "experts_detail.hpp"
#include "isac/error.hpp"
#include "isac/experts.hpp"
#include "isac/rng.hpp"

namespace isac {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini
};

class TreeBuilder {
 public:
  TreeBuilder(const LabeledDataset& data, std::size_t dim, int num_classes, const ForestParams& params,
              Rng& rng)
      : data_(data), dim_(dim), classes_(static_cast<std::size_t>(num_classes)), params_(params), rng_(rng) {
    candidates_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim))));
  }

  DecisionTree build(std::vector<std::size_t> samples) {
    tree_.nodes.clear();
    grow(std::move(samples), 0);
    return std::move(tree_);
  }

 private:
  double gini(std::span<const double> counts, double total) const {
    double s = 0.0;
    for (double c : counts) s += (c / total) * (c / total);
    return 1.0 - s;
  }

  int grow(std::vector<std::size_t> samples, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    std::vector<double> counts(classes_, 0.0);
    for (auto i : samples) counts[static_cast<std::size_t>(data_.labels[i])] += 1.0;
    const auto pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
    const bool depth_limited = params_.max_depth > 0 && depth >= params_.max_depth;

    Split split;
    if (!pure && !depth_limited && samples.size() >= 2) split = best_split(samples, counts);

    if (split.feature < 0) {
      const auto n = static_cast<double>(samples.size());
      for (double& c : counts) c /= n;
      tree_.nodes[static_cast<std::size_t>(index)].leaf_probs = std::move(counts);
      return index;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : samples) {
      (data_.features[i].values[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(i);
    }
    samples.clear();
    samples.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  // Tries ceil(sqrt(d)) seeded features first; if none of them separates the
  // node, keeps going through the rest of the shuffled order.
  Split best_split(const std::vector<std::size_t>& samples, std::span<const double> parent_counts) {
    std::vector<std::size_t> order(dim_);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = dim_; i > 1; --i) std::swap(order[i - 1], order[rng_.index(i)]);

    Split best;
    const auto n = static_cast<double>(samples.size());
    std::vector<std::pair<double, int>> column(samples.size());
    std::vector<double> left_counts(classes_);
    std::vector<double> right_counts(classes_);
    for (std::size_t tried = 0; tried < dim_; ++tried) {
      if (tried >= candidates_ && best.feature >= 0) break;
      const std::size_t f = order[tried];
      for (std::size_t i = 0; i < samples.size(); ++i)
        column[i] = {data_.features[samples[i]].values[f], data_.labels[samples[i]]};
      std::sort(column.begin(), column.end());
      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      std::copy(parent_counts.begin(), parent_counts.end(), right_counts.begin());
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const auto label = static_cast<std::size_t>(column[i].second);
        left_counts[label] += 1.0;
        right_counts[label] -= 1.0;
        const double a = column[i].first;
        const double b = column[i + 1].first;
        if (!(a < b)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double impurity = nl / n * gini(left_counts, nl) + nr / n * gini(right_counts, nr);
        if (best.feature < 0 || impurity < best.impurity) {
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best = {static_cast<int>(f), mid, impurity};
        }
      }
    }
    return best;
  }

  const LabeledDataset& data_;
  std::size_t dim_;
  std::size_t classes_;
  std::size_t candidates_;
  const ForestParams& params_;
  Rng& rng_;
  DecisionTree tree_;
};

int subtree_depth(const DecisionTree& tree, int node) {
  const auto& n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.feature < 0) return 0;
  return 1 + std::max(subtree_depth(tree, n.left), subtree_depth(tree, n.right));
}

}  // namespace

int DecisionTree::depth() const { return nodes.empty() ? 0 : subtree_depth(*this, 0); }

ForestModel train_forest(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed) {
  const auto shape = detail::check_dataset(data);
  if (params.num_trees < 1) throw TrainingError("forest: num_trees must be >= 1");

  ForestModel model;
  model.kind = shape.kind;
  model.dim = shape.dim;
  model.num_classes = shape.num_classes;
  model.params = params;
  model.seed = seed;

  const std::size_t n = data.features.size();
  for (int t = 0; t < params.num_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> sample(n);
    if (params.bootstrap) {
      for (auto& s : sample) s = rng.index(n);
      std::sort(sample.begin(), sample.end());
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    TreeBuilder builder(data, shape.dim, shape.num_classes, params, rng);
    model.trees.push_back(builder.build(std::move(sample)));
  }
  return model;
}

ClassPosterior predict_forest(const ForestModel& model, const FeatureVector& x) {
  detail::check_query(model.kind, model.dim, x);
  ClassPosterior post{std::vector<double>(static_cast<std::size_t>(model.num_classes), 0.0)};
  for (const auto& tree : model.trees) {
    std::size_t node = 0;
    while (tree.nodes[node].feature >= 0) {
      const auto& nd = tree.nodes[node];
      node = static_cast<std::size_t>(x.values[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
    }
    const auto& leaf = tree.nodes[node].leaf_probs;
    for (std::size_t c = 0; c < leaf.size(); ++c) post.probs[c] += leaf[c];
  }
  for (double& p : post.probs) p /= static_cast<double>(model.trees.size());
  return post;
}

}  // namespace isac
