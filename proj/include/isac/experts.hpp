#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "isac/features.hpp"

namespace isac {

/// Feature vectors with target-count labels in [0, num_classes).
struct LabeledDataset {
  std::vector<FeatureVector> features;
  std::vector<int> labels;
  int num_classes = 0;  // K_max + 1; 0 means "max label + 1"
};

/// Probability vector over target counts 0..K_max.
struct ClassPosterior {
  std::vector<double> probs;

  /// Lowest class index among the maxima.
  int argmax() const;
  bool operator==(const ClassPosterior&) const = default;
};

enum class ClassifierKind { Knn, LinearSvm, Forest };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view tag);

struct KnnParams {
  int k = 5;
  bool operator==(const KnnParams&) const = default;
};

struct SvmParams {
  int epochs = 200;
  double step = 0.01;
  bool decay = true;  // step / epoch when set
  double l2 = 1e-3;
  bool operator==(const SvmParams&) const = default;
};

struct ForestParams {
  int num_trees = 25;
  int max_depth = 8;  // <= 0: unlimited
  bool bootstrap = true;
  bool operator==(const ForestParams&) const = default;
};

struct KnnModel {
  FeatureKind kind = FeatureKind::DopplerEnergy;
  std::size_t dim = 0;
  int num_classes = 0;
  int k = 1;
  std::vector<double> points;  // row-major, one row per training sample
  std::vector<int> labels;

  bool operator==(const KnnModel&) const = default;
};

/// One-vs-rest linear SVM over z-scored features.
struct LinearSvmModel {
  FeatureKind kind = FeatureKind::DopplerEnergy;
  std::size_t dim = 0;
  int num_classes = 0;
  SvmParams params;
  std::vector<double> mean;     // per-dimension training mean
  std::vector<double> scale;    // per-dimension training std (1 where zero)
  std::vector<double> weights;  // num_classes x dim
  std::vector<double> bias;     // num_classes

  bool operator==(const LinearSvmModel&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  std::vector<double> leaf_probs;

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int depth() const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
  FeatureKind kind = FeatureKind::DopplerEnergy;
  std::size_t dim = 0;
  int num_classes = 0;
  ForestParams params;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  bool operator==(const ForestModel&) const = default;
};

using TrainedModel = std::variant<KnnModel, LinearSvmModel, ForestModel>;

KnnModel train_knn(const LabeledDataset& data, int k);
ClassPosterior predict_knn(const KnnModel& model, const FeatureVector& x);

LinearSvmModel train_linear_svm(const LabeledDataset& data, const SvmParams& params = {});
ClassPosterior predict_linear_svm(const LinearSvmModel& model, const FeatureVector& x);
/// Raw one-vs-rest margins w_c . z(x) + b_c.
std::vector<double> svm_margins(const LinearSvmModel& model, const FeatureVector& x);
/// Sum over classes of mean hinge loss plus (l2 / 2) |w_c|^2.
double svm_objective(const LinearSvmModel& model, const LabeledDataset& data);

ForestModel train_forest(const LabeledDataset& data, const ForestParams& params, std::uint64_t seed);
ClassPosterior predict_forest(const ForestModel& model, const FeatureVector& x);

ClassPosterior predict(const TrainedModel& model, const FeatureVector& x);
FeatureKind model_feature_kind(const TrainedModel& model);
ClassifierKind model_classifier_kind(const TrainedModel& model);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);

}  // namespace isac
