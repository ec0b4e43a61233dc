#include "isac/experts.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "experts_detail.hpp"
#include "isac/error.hpp"

namespace isac {

int ClassPosterior::argmax() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Knn:
      return "knn";
    case ClassifierKind::LinearSvm:
      return "svm";
    case ClassifierKind::Forest:
      return "forest";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view tag) {
  if (tag == "knn") return ClassifierKind::Knn;
  if (tag == "svm") return ClassifierKind::LinearSvm;
  if (tag == "forest") return ClassifierKind::Forest;
  throw ConfigError("unknown classifier kind '" + std::string(tag) + "'");
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

namespace detail {

DatasetShape check_dataset(const LabeledDataset& data) {
  if (data.features.empty()) throw TrainingError("training set is empty");
  if (data.features.size() != data.labels.size())
    throw TrainingError("feature and label counts differ");
  DatasetShape shape{data.features.front().kind, data.features.front().values.size(), data.num_classes};
  if (shape.dim == 0) throw TrainingError("feature vectors are empty");
  int max_label = 0;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    const auto& f = data.features[i];
    if (f.kind != shape.kind) throw TrainingError("training set mixes feature kinds");
    if (f.values.size() != shape.dim) throw TrainingError("training set mixes feature lengths");
    for (double v : f.values)
      if (!std::isfinite(v)) throw TrainingError("training feature is not finite");
    if (data.labels[i] < 0) throw TrainingError("negative label");
    max_label = std::max(max_label, data.labels[i]);
  }
  if (shape.num_classes == 0) shape.num_classes = max_label + 1;
  if (max_label >= shape.num_classes) throw TrainingError("label exceeds num_classes - 1");
  return shape;
}

void check_query(FeatureKind kind, std::size_t dim, const FeatureVector& x) {
  if (x.kind != kind) throw InputError("query feature kind does not match the model");
  if (x.values.size() != dim) throw InputError("query feature length does not match the model");
}

}  // namespace detail

KnnModel train_knn(const LabeledDataset& data, int k) {
  const auto shape = detail::check_dataset(data);
  if (k < 1 || static_cast<std::size_t>(k) > data.features.size())
    throw TrainingError("knn: k must lie in [1, training size]");
  KnnModel model;
  model.kind = shape.kind;
  model.dim = shape.dim;
  model.num_classes = shape.num_classes;
  model.k = k;
  model.labels = data.labels;
  model.points.reserve(shape.dim * data.features.size());
  for (const auto& f : data.features) model.points.insert(model.points.end(), f.values.begin(), f.values.end());
  return model;
}

ClassPosterior predict_knn(const KnnModel& model, const FeatureVector& x) {
  detail::check_query(model.kind, model.dim, x);
  const std::size_t n = model.labels.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = model.points.data() + i * model.dim;
    double d = 0.0;
    for (std::size_t j = 0; j < model.dim; ++j) d += (p[j] - x.values[j]) * (p[j] - x.values[j]);
    dist[i] = {d, i};
  }
  // Pairs order by (distance, index): ties go to the lower training index.
  const auto k = static_cast<std::size_t>(model.k);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  ClassPosterior post{std::vector<double>(static_cast<std::size_t>(model.num_classes), 0.0)};
  for (std::size_t i = 0; i < k; ++i) post.probs[static_cast<std::size_t>(model.labels[dist[i].second])] += 1.0;
  for (double& p : post.probs) p /= static_cast<double>(k);
  return post;
}

ClassPosterior predict(const TrainedModel& model, const FeatureVector& x) {
  return std::visit(
      [&x](const auto& m) -> ClassPosterior {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) return predict_knn(m, x);
        else if constexpr (std::is_same_v<T, LinearSvmModel>) return predict_linear_svm(m, x);
        else return predict_forest(m, x);
      },
      model);
}

FeatureKind model_feature_kind(const TrainedModel& model) {
  return std::visit([](const auto& m) { return m.kind; }, model);
}

ClassifierKind model_classifier_kind(const TrainedModel& model) {
  switch (model.index()) {
    case 0:
      return ClassifierKind::Knn;
    case 1:
      return ClassifierKind::LinearSvm;
    default:
      return ClassifierKind::Forest;
  }
}

}  // namespace isac
