#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isac/experts.hpp"
#include "isac/features.hpp"

namespace isac {

/// One detection expert: which feature it reads, which classifier it runs,
/// and the packet rate it needs. It is trained at its required rate.
struct ExpertSpec {
  std::string id;
  FeatureKind feature_kind = FeatureKind::DopplerEnergy;
  ClassifierKind classifier_kind = ClassifierKind::Knn;
  double required_rate = 0.0;  // pkts/s
  KnnParams knn;
  SvmParams svm;
  ForestParams forest;

  double nominal_rate() const { return required_rate; }
  bool operator==(const ExpertSpec&) const = default;
};

using Registry = std::vector<ExpertSpec>;

/// Eight experts over two features, three classifiers and rates 300..600.
Registry default_registry();

/// Throws ConfigError on an empty registry, duplicate ids or bad rates.
void validate_registry(const Registry& registry);

/// JSON registry config: {"experts": [{"id", "feature", "classifier",
/// "required_rate", optional "knn"/"svm"/"forest" hyperparameter objects}]}.
Registry parse_registry(std::string_view json_text);
Registry load_registry(const std::filesystem::path& path);
std::string registry_to_json(const Registry& registry);

/// One expert's template data. `centroids` holds, per class, the mean of the
/// validation features the expert classified correctly (may be empty).
/// `reference_scores` holds the sorted standardized scores of those same
/// validation samples and calibrates the gate.
struct ExpertTemplates {
  std::map<int, FeatureVector> centroids;
  std::vector<double> reference_scores;

  bool operator==(const ExpertTemplates&) const = default;
};

using TemplateLibrary = std::map<std::string, ExpertTemplates>;

using FeatureSet = std::map<FeatureKind, FeatureVector>;

enum class GateMode { Normal, Fallback };
std::string_view to_string(GateMode mode);

/// Raw: max-over-class Pearson against the centroids as stored.
/// Calibrated: Pearson after standardizing each dimension by the spread of
/// the expert's own centroids, reported as the fraction of the expert's
/// reference scores at or below it.
enum class GateScoring { Raw, Calibrated };
std::string_view to_string(GateScoring scoring);
GateScoring parse_gate_scoring(std::string_view text);

struct GatingDecision {
  std::vector<std::string> eligible;
  std::vector<std::string> selected;  // descending score
  std::vector<double> weights;        // aligned with selected
  std::map<std::string, double> scores;
  GateMode mode = GateMode::Normal;

  bool operator==(const GatingDecision&) const = default;
};

/// Score given to an expert without any template centroid.
constexpr double kNoTemplateScore = -1.0;

/// Ids (registry order) with required_rate <= current_rate.
std::vector<std::string> filter_by_rate(std::span<const ExpertSpec> registry, double current_rate);

/// score(e) = max over e's class centroids of pearson(features[kind], centroid).
std::map<std::string, double> score_experts(const FeatureSet& features, const TemplateLibrary& templates,
                                            std::span<const std::string> candidates);

/// Max over centroids of pearson after per-dimension standardization by the
/// centroid mean and population std (dimensions with no spread are left
/// as they are). With a single centroid this is plain Pearson. A constant input
/// scores 0. Throws InputError on a length mismatch.
double standardized_max_correlation(std::span<const double> x, const std::map<int, FeatureVector>& centroids);

/// Empirical CDF of `sorted_reference` at `score`; `score` itself when the
/// reference is empty.
double reference_percentile(std::span<const double> sorted_reference, double score);

/// Calibrated score per candidate; kNoTemplateScore for experts without
/// centroids. Same errors as score_experts.
std::map<std::string, double> calibrated_scores(const FeatureSet& features, const TemplateLibrary& templates,
                                                std::span<const std::string> candidates);

/// Highest scores first; equal scores in lexicographic id order.
std::vector<std::string> select_top_k(const std::map<std::string, double>& scores, int k);

/// Scores clipped at zero and normalized; uniform when all clip to zero.
std::vector<double> correlation_weights(std::span<const double> scores);

GatingDecision decide(std::span<const ExpertSpec> registry, const TemplateLibrary& templates,
                      const FeatureSet& features, double current_rate, int k = 3,
                      GateScoring scoring = GateScoring::Calibrated);

struct FusionResult {
  ClassPosterior fused;
  int predicted = 0;
};

FusionResult fuse(std::span<const ClassPosterior> posteriors, std::span<const double> weights);

}  // namespace isac
