#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "isac/dataset.hpp"
#include "isac/experts.hpp"
#include "isac/features.hpp"
#include "isac/gating.hpp"

namespace isac {

struct BundleMetadata {
  std::uint64_t seed = 0;
  std::uint64_t dataset_fingerprint = 0;
  int k_max = 0;
  DopplerConfig doppler;
  int select_k = 3;
  GateScoring gate_scoring = GateScoring::Calibrated;
  std::map<std::string, double> validation_accuracy;

  bool operator==(const BundleMetadata&) const = default;
};

/// Everything detect() needs: registry (sorted by id), one trained model and
/// one template entry per expert, and the training metadata.
struct TrainedBundle {
  static constexpr std::uint32_t kFormatVersion = 1;

  Registry registry;
  std::map<std::string, TrainedModel> models;
  TemplateLibrary templates;
  BundleMetadata meta;

  const ExpertSpec& expert(const std::string& id) const;
  int num_classes() const { return meta.k_max + 1; }
  bool operator==(const TrainedBundle&) const = default;
};

struct BuildOptions {
  DopplerConfig doppler;
  int select_k = 3;
  GateScoring gate_scoring = GateScoring::Calibrated;
};

/// Trains every expert on `train` (decimated to its nominal rate), then
/// builds per-class centroids from the validation samples it gets right and
/// records those samples' standardized scores as the gate's reference.
TrainedBundle build_bundle(const StreamSet& train, const StreamSet& val, Registry registry, std::uint64_t seed,
                           const BuildOptions& options = {});

struct DetectionReport {
  GatingDecision gating;
  std::vector<ClassPosterior> expert_posteriors;  // aligned with gating.selected
  ClassPosterior fused;
  int predicted = 0;
  double current_rate = 0.0;
  GateMode mode = GateMode::Normal;

  bool operator==(const DetectionReport&) const = default;
};

/// Rate at which expert `e` sees the input under `current_rate`.
double expert_input_rate(const ExpertSpec& e, double current_rate);

/// One feature per kind used by the registry, extracted from `stream`.
FeatureSet gating_features(const CsiStream& stream, const Registry& registry, const DopplerConfig& doppler);

/// The expert's posterior for a stream observed at `current_rate`.
ClassPosterior run_expert(const TrainedBundle& bundle, const std::string& id, const CsiStream& stream,
                          double current_rate);

/// filter -> score -> select -> per-expert predict -> fuse.
DetectionReport detect(const CsiStream& stream, double current_rate, const TrainedBundle& bundle);

std::string encode_bundle(const TrainedBundle& bundle);
TrainedBundle decode_bundle(std::string_view bytes);
void save_bundle(const TrainedBundle& bundle, const std::filesystem::path& path);
TrainedBundle load_bundle(const std::filesystem::path& path);

/// Template library as CSV rows: expert,class,<feature row>.
std::string templates_to_csv(const TemplateLibrary& templates);

}  // namespace isac
