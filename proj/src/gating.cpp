#include "isac/gating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "isac/error.hpp"

namespace isac {

Registry default_registry() {
  using FK = FeatureKind;
  using CK = ClassifierKind;
  return {
      {"E1", FK::DopplerEnergy, CK::LinearSvm, 600.0, {}, {}, {}},
      {"E2", FK::AmplitudeStats, CK::LinearSvm, 600.0, {}, {}, {}},
      {"E3", FK::DopplerEnergy, CK::Forest, 500.0, {}, {}, {}},
      {"E4", FK::AmplitudeStats, CK::Forest, 500.0, {}, {}, {}},
      {"E5", FK::DopplerEnergy, CK::Knn, 300.0, {}, {}, {}},
      {"E6", FK::AmplitudeStats, CK::Forest, 400.0, {}, {}, {}},
      {"E7", FK::AmplitudeStats, CK::Knn, 300.0, {}, {}, {}},
      {"E8", FK::DopplerEnergy, CK::Forest, 300.0, {}, {}, {}},
  };
}

void validate_registry(const Registry& registry) {
  if (registry.empty()) throw ConfigError("registry is empty");
  std::set<std::string> ids;
  for (const auto& e : registry) {
    if (e.id.empty()) throw ConfigError("registry: expert id is empty");
    if (!ids.insert(e.id).second) throw ConfigError("registry: duplicate expert id '" + e.id + "'");
    if (!(e.required_rate > 0.0) || !std::isfinite(e.required_rate))
      throw ConfigError("registry: expert '" + e.id + "' needs a positive required_rate");
    if (e.knn.k < 1) throw ConfigError("registry: expert '" + e.id + "' has knn.k < 1");
    if (e.svm.epochs < 0 || !(e.svm.step > 0.0) || !(e.svm.l2 >= 0.0))
      throw ConfigError("registry: expert '" + e.id + "' has invalid svm parameters");
    if (e.forest.num_trees < 1) throw ConfigError("registry: expert '" + e.id + "' has forest.num_trees < 1");
  }
}

std::string_view to_string(GateMode mode) { return mode == GateMode::Normal ? "Normal" : "Fallback"; }

std::vector<std::string> filter_by_rate(std::span<const ExpertSpec> registry, double current_rate) {
  if (!(current_rate > 0.0)) throw InputError("current rate must be positive");
  std::vector<std::string> ids;
  for (const auto& e : registry)
    if (e.required_rate <= current_rate) ids.push_back(e.id);
  return ids;
}

std::string_view to_string(GateScoring scoring) { return scoring == GateScoring::Raw ? "raw" : "calibrated"; }

GateScoring parse_gate_scoring(std::string_view text) {
  if (text == "raw") return GateScoring::Raw;
  if (text == "calibrated") return GateScoring::Calibrated;
  throw ConfigError("unknown gate scoring '" + std::string(text) + "'");
}

namespace {

// Resolves the candidate's template entry and the matching input feature;
// nullptr feature when the expert has no centroids.
std::pair<const ExpertTemplates*, const FeatureVector*> lookup(const FeatureSet& features,
                                                               const TemplateLibrary& templates,
                                                               const std::string& id) {
  const auto entry = templates.find(id);
  if (entry == templates.end()) throw ConfigError("no template entry for expert '" + id + "'");
  const auto& centroids = entry->second.centroids;
  if (centroids.empty()) return {&entry->second, nullptr};
  const FeatureKind kind = centroids.begin()->second.kind;
  for (const auto& [cls, centroid] : centroids)
    if (centroid.kind != kind) throw ConfigError("expert '" + id + "' mixes template feature kinds");
  const auto feature = features.find(kind);
  if (feature == features.end())
    throw InputError("no " + std::string(to_string(kind)) + " feature for expert '" + id + "'");
  return {&entry->second, &feature->second};
}

}  // namespace

std::map<std::string, double> score_experts(const FeatureSet& features, const TemplateLibrary& templates,
                                            std::span<const std::string> candidates) {
  std::map<std::string, double> scores;
  for (const auto& id : candidates) {
    const auto [entry, feature] = lookup(features, templates, id);
    if (!feature) {
      scores[id] = kNoTemplateScore;
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [cls, centroid] : entry->centroids) best = std::max(best, pearson(feature->values, centroid.values));
    scores[id] = best;
  }
  return scores;
}

double standardized_max_correlation(std::span<const double> x, const std::map<int, FeatureVector>& centroids) {
  if (centroids.empty()) throw InputError("standardized correlation needs at least one centroid");
  const std::size_t d = x.size();
  if (d < 2) throw InputError("standardized correlation needs at least 2 values");
  const double n = static_cast<double>(centroids.size());
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (const auto& [cls, c] : centroids) {
    if (c.values.size() != d) throw InputError("feature and centroid lengths differ");
    for (std::size_t j = 0; j < d; ++j) mean[j] += c.values[j] / n;
  }
  for (const auto& [cls, c] : centroids)
    for (std::size_t j = 0; j < d; ++j) scale[j] += (c.values[j] - mean[j]) * (c.values[j] - mean[j]) / n;
  for (std::size_t j = 0; j < d; ++j) {
    scale[j] = std::sqrt(scale[j]);
    if (!(scale[j] > 1e-12)) {
      scale[j] = 1.0;
      mean[j] = 0.0;
    }
  }
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return 0.0;
  std::vector<double> zx(d), zc(d);
  for (std::size_t j = 0; j < d; ++j) zx[j] = (x[j] - mean[j]) / scale[j];
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [cls, c] : centroids) {
    for (std::size_t j = 0; j < d; ++j) zc[j] = (c.values[j] - mean[j]) / scale[j];
    best = std::max(best, pearson(zx, zc));
  }
  return best;
}

double reference_percentile(std::span<const double> sorted_reference, double score) {
  if (sorted_reference.empty()) return score;
  const auto below = std::upper_bound(sorted_reference.begin(), sorted_reference.end(), score) - sorted_reference.begin();
  return static_cast<double>(below) / static_cast<double>(sorted_reference.size());
}

std::map<std::string, double> calibrated_scores(const FeatureSet& features, const TemplateLibrary& templates,
                                                std::span<const std::string> candidates) {
  std::map<std::string, double> scores;
  for (const auto& id : candidates) {
    const auto [entry, feature] = lookup(features, templates, id);
    scores[id] = feature ? reference_percentile(entry->reference_scores,
                                                standardized_max_correlation(feature->values, entry->centroids))
                         : kNoTemplateScore;
  }
  return scores;
}

std::vector<std::string> select_top_k(const std::map<std::string, double>& scores, int k) {
  std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
  // std::map iterates in id order, so a stable sort on score keeps the
  // lexicographic tie rule.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && static_cast<int>(i) < k; ++i) out.push_back(ranked[i].first);
  return out;
}

std::vector<double> correlation_weights(std::span<const double> scores) {
  std::vector<double> w(scores.size());
  std::transform(scores.begin(), scores.end(), w.begin(), [](double s) { return std::max(0.0, s); });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total > 0.0) {
    for (double& x : w) x /= total;
  } else {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
  }
  return w;
}

GatingDecision decide(std::span<const ExpertSpec> registry, const TemplateLibrary& templates,
                      const FeatureSet& features, double current_rate, int k, GateScoring scoring) {
  if (registry.empty()) throw ConfigError("registry is empty");
  if (k < 1) throw ConfigError("gating: k must be >= 1");
  GatingDecision d;
  d.eligible = filter_by_rate(registry, current_rate);
  std::vector<std::string> pool = d.eligible;
  if (pool.empty()) {
    d.mode = GateMode::Fallback;
    for (const auto& e : registry) pool.push_back(e.id);
  }
  d.scores = scoring == GateScoring::Raw ? score_experts(features, templates, pool)
                                         : calibrated_scores(features, templates, pool);
  d.selected = select_top_k(d.scores, k);
  std::vector<double> selected_scores;
  for (const auto& id : d.selected) selected_scores.push_back(d.scores.at(id));
  d.weights = correlation_weights(selected_scores);
  return d;
}

FusionResult fuse(std::span<const ClassPosterior> posteriors, std::span<const double> weights) {
  if (posteriors.empty()) throw InputError("fuse: no posteriors");
  if (posteriors.size() != weights.size()) throw InputError("fuse: posterior and weight counts differ");
  const std::size_t classes = posteriors.front().probs.size();
  FusionResult r;
  r.fused.probs.assign(classes, 0.0);
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    if (posteriors[i].probs.size() != classes) throw InputError("fuse: posterior lengths differ");
    for (std::size_t c = 0; c < classes; ++c) r.fused.probs[c] += weights[i] * posteriors[i].probs[c];
  }
  r.predicted = r.fused.argmax();
  return r;
}

}  // namespace isac
