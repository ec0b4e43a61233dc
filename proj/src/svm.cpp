#include <algorithm>
#include <cmath>
#include <set>

#include "experts_detail.hpp"
#include "isac/error.hpp"
#include "isac/experts.hpp"

namespace isac {

namespace {

std::vector<double> standardize(const LinearSvmModel& model, std::span<const double> x) {
  std::vector<double> z(model.dim);
  for (std::size_t j = 0; j < model.dim; ++j) z[j] = (x[j] - model.mean[j]) / model.scale[j];
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LinearSvmModel train_linear_svm(const LabeledDataset& data, const SvmParams& params) {
  const auto shape = detail::check_dataset(data);
  if (std::set<int>(data.labels.begin(), data.labels.end()).size() < 2)
    throw TrainingError("svm: need at least two classes");
  if (params.epochs < 0 || !(params.step > 0.0) || !(params.l2 >= 0.0))
    throw TrainingError("svm: invalid hyperparameters");

  LinearSvmModel model;
  model.kind = shape.kind;
  model.dim = shape.dim;
  model.num_classes = shape.num_classes;
  model.params = params;

  const std::size_t n = data.features.size();
  const std::size_t d = shape.dim;
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 0.0);
  for (const auto& f : data.features)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += f.values[j];
  for (double& m : model.mean) m /= static_cast<double>(n);
  for (const auto& f : data.features)
    for (std::size_t j = 0; j < d; ++j) model.scale[j] += (f.values[j] - model.mean[j]) * (f.values[j] - model.mean[j]);
  for (double& s : model.scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }

  std::vector<std::vector<double>> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = standardize(model, data.features[i].values);

  const auto classes = static_cast<std::size_t>(shape.num_classes);
  model.weights.assign(classes * d, 0.0);
  model.bias.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    std::span<double> w(model.weights.data() + c * d, d);
    double& b = model.bias[c];
    for (int epoch = 1; epoch <= params.epochs; ++epoch) {
      const double eta = params.decay ? params.step / epoch : params.step;
      for (std::size_t i = 0; i < n; ++i) {
        const double y = data.labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const double margin = y * (dot(w, z[i]) + b);
        const double shrink = 1.0 - eta * params.l2;
        if (margin < 1.0) {
          for (std::size_t j = 0; j < d; ++j) w[j] = shrink * w[j] + eta * y * z[i][j];
          b += eta * y;
        } else {
          for (double& wj : w) wj *= shrink;
        }
      }
    }
  }
  return model;
}

std::vector<double> svm_margins(const LinearSvmModel& model, const FeatureVector& x) {
  detail::check_query(model.kind, model.dim, x);
  const auto z = standardize(model, x.values);
  std::vector<double> margins(static_cast<std::size_t>(model.num_classes));
  for (std::size_t c = 0; c < margins.size(); ++c)
    margins[c] = dot({model.weights.data() + c * model.dim, model.dim}, z) + model.bias[c];
  return margins;
}

ClassPosterior predict_linear_svm(const LinearSvmModel& model, const FeatureVector& x) {
  return {softmax(svm_margins(model, x))};
}

double svm_objective(const LinearSvmModel& model, const LabeledDataset& data) {
  double total = 0.0;
  const auto n = static_cast<double>(data.features.size());
  for (int c = 0; c < model.num_classes; ++c) {
    std::span<const double> w(model.weights.data() + static_cast<std::size_t>(c) * model.dim, model.dim);
    double hinge = 0.0;
    for (std::size_t i = 0; i < data.features.size(); ++i) {
      const double y = data.labels[i] == c ? 1.0 : -1.0;
      const auto m = svm_margins(model, data.features[i])[static_cast<std::size_t>(c)];
      hinge += std::max(0.0, 1.0 - y * m);
    }
    total += hinge / n + 0.5 * model.params.l2 * dot(w, w);
  }
  return total;
}

}  // namespace isac
