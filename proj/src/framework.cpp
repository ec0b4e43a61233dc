#include "isac/framework.hpp"

#include <algorithm>
#include <set>

#include "isac/binary_io.hpp"
#include "isac/error.hpp"
#include "isac/rng.hpp"

namespace isac {

namespace {

using FeatureKey = std::pair<double, FeatureKind>;

std::uint64_t stream_fingerprint(const CsiStream& s, int label, std::uint64_t h) {
  const auto samples = s.samples();
  h = fnv1a({reinterpret_cast<const char*>(samples.data()), samples.size_bytes()}, h);
  const double rate = s.packet_rate();
  h = fnv1a({reinterpret_cast<const char*>(&rate), sizeof rate}, h);
  return fnv1a({reinterpret_cast<const char*>(&label), sizeof label}, h);
}

/// Features for every (nominal rate, kind) pair the registry needs, one
/// stream load per sample.
struct FeatureTable {
  std::map<FeatureKey, std::vector<FeatureVector>> columns;
  std::vector<int> labels;
  std::uint64_t fingerprint = 0xcbf29ce484222325ULL;
};

FeatureTable extract_all(const StreamSet& set, const Registry& registry, const DopplerConfig& doppler) {
  std::set<FeatureKey> keys;
  for (const auto& e : registry) keys.insert({e.nominal_rate(), e.feature_kind});
  FeatureTable table;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const CsiStream stream = set.load(i);
    const int label = set.label(i);
    table.labels.push_back(label);
    table.fingerprint = stream_fingerprint(stream, label, table.fingerprint);
    double last_rate = -1.0;
    CsiStream decimated;
    for (const auto& [rate, kind] : keys) {
      if (rate != last_rate) {
        decimated = decimate(stream, rate);
        last_rate = rate;
      }
      table.columns[{rate, kind}].push_back(extract_feature(kind, decimated, doppler));
    }
  }
  return table;
}

TrainedModel train_expert(const ExpertSpec& e, const LabeledDataset& data, std::uint64_t seed) {
  switch (e.classifier_kind) {
    case ClassifierKind::Knn:
      return train_knn(data, e.knn.k);
    case ClassifierKind::LinearSvm:
      return train_linear_svm(data, e.svm);
    case ClassifierKind::Forest:
      return train_forest(data, e.forest, derive_seed(seed, fnv1a(e.id)));
  }
  throw ConfigError("unknown classifier kind");
}

}  // namespace

const ExpertSpec& TrainedBundle::expert(const std::string& id) const {
  for (const auto& e : registry)
    if (e.id == id) return e;
  throw ConfigError("bundle has no expert '" + id + "'");
}

TrainedBundle build_bundle(const StreamSet& train, const StreamSet& val, Registry registry, std::uint64_t seed,
                           const BuildOptions& options) {
  validate_registry(registry);
  if (train.size() == 0) throw TrainingError("training set is empty");
  if (val.size() == 0) throw TrainingError("validation set is empty");
  std::sort(registry.begin(), registry.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  auto train_table = extract_all(train, registry, options.doppler);
  auto val_table = extract_all(val, registry, options.doppler);

  const int k_max = *std::max_element(train_table.labels.begin(), train_table.labels.end());
  std::set<int> present(train_table.labels.begin(), train_table.labels.end());
  for (int c = 0; c <= k_max; ++c)
    if (!present.contains(c)) throw TrainingError("class " + std::to_string(c) + " missing from training data");
  for (int label : val_table.labels)
    if (label > k_max) throw TrainingError("validation label " + std::to_string(label) + " exceeds training K_max");

  TrainedBundle bundle;
  bundle.meta.seed = seed;
  bundle.meta.k_max = k_max;
  bundle.meta.doppler = options.doppler;
  bundle.meta.select_k = options.select_k;
  bundle.meta.gate_scoring = options.gate_scoring;
  bundle.meta.dataset_fingerprint = fnv1a(
      {reinterpret_cast<const char*>(&val_table.fingerprint), sizeof val_table.fingerprint}, train_table.fingerprint);

  for (const auto& e : registry) {
    const FeatureKey key{e.nominal_rate(), e.feature_kind};
    LabeledDataset data{train_table.columns.at(key), train_table.labels, k_max + 1};
    TrainedModel model = train_expert(e, data, seed);

    const auto& val_features = val_table.columns.at(key);
    std::map<int, std::pair<std::vector<double>, int>> sums;
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < val_features.size(); ++i) {
      if (predict(model, val_features[i]).argmax() != val_table.labels[i]) continue;
      hits.push_back(i);
      auto& [sum, count] = sums[val_table.labels[i]];
      if (sum.empty()) sum.assign(val_features[i].values.size(), 0.0);
      for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += val_features[i].values[j];
      ++count;
    }
    auto& entry = bundle.templates[e.id];
    for (auto& [cls, acc] : sums) {
      auto& [sum, count] = acc;
      for (double& v : sum) v /= count;
      entry.centroids[cls] = FeatureVector{e.feature_kind, std::move(sum), val_features.front().source_rate};
    }
    for (std::size_t i : hits)
      entry.reference_scores.push_back(standardized_max_correlation(val_features[i].values, entry.centroids));
    std::sort(entry.reference_scores.begin(), entry.reference_scores.end());
    const auto correct = hits.size();
    bundle.meta.validation_accuracy[e.id] = static_cast<double>(correct) / static_cast<double>(val_features.size());
    bundle.models.emplace(e.id, std::move(model));
  }
  bundle.registry = std::move(registry);
  return bundle;
}

double expert_input_rate(const ExpertSpec& e, double current_rate) {
  return std::min(current_rate, e.nominal_rate());
}

FeatureSet gating_features(const CsiStream& stream, const Registry& registry, const DopplerConfig& doppler) {
  FeatureSet features;
  for (const auto& e : registry)
    if (!features.contains(e.feature_kind))
      features.emplace(e.feature_kind, extract_feature(e.feature_kind, stream, doppler));
  return features;
}

ClassPosterior run_expert(const TrainedBundle& bundle, const std::string& id, const CsiStream& stream,
                          double current_rate) {
  const auto& spec = bundle.expert(id);
  const auto input = decimate(stream, expert_input_rate(spec, current_rate));
  return predict(bundle.models.at(id), extract_feature(spec.feature_kind, input, bundle.meta.doppler));
}

DetectionReport detect(const CsiStream& stream, double current_rate, const TrainedBundle& bundle) {
  if (bundle.registry.empty()) throw ConfigError("bundle registry is empty");
  if (stream.packets() == 0 || stream.subcarriers() == 0) throw InputError("stream is empty");
  for (const auto& z : stream.samples())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InputError("stream has non-finite samples");

  const CsiStream observed = decimate(stream, current_rate);
  DetectionReport report;
  report.current_rate = current_rate;
  report.gating = decide(bundle.registry, bundle.templates, gating_features(observed, bundle.registry, bundle.meta.doppler),
                         current_rate, bundle.meta.select_k, bundle.meta.gate_scoring);
  report.mode = report.gating.mode;
  for (const auto& id : report.gating.selected)
    report.expert_posteriors.push_back(run_expert(bundle, id, observed, current_rate));
  auto fused = fuse(report.expert_posteriors, report.gating.weights);
  report.fused = std::move(fused.fused);
  report.predicted = fused.predicted;
  return report;
}

std::string templates_to_csv(const TemplateLibrary& templates) {
  std::string out = "expert,class,kind,source_rate,values...\n";
  for (const auto& [id, entry] : templates)
    for (const auto& [cls, centroid] : entry.centroids) out += id + "," + std::to_string(cls) + "," + to_csv_row(centroid) + "\n";
  return out;
}

}  // namespace isac
