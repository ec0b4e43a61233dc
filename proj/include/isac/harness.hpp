#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isac/csi.hpp"
#include "isac/dataset.hpp"
#include "isac/framework.hpp"

namespace isac {

/// Experiment knobs shared by the CLI and the benchmark runners.
struct ExperimentConfig {
  int k_max = 5;
  int streams_per_class = 200;        // test streams per class
  int train_streams_per_class = 100;  // before the validation holdout
  double holdout = 0.25;
  std::vector<double> rates = {100, 200, 300, 400, 500};
  std::vector<int> target_counts = {3, 4, 5};
  double target_sweep_rate = 300;
  std::uint64_t seed = 42;
  ScenarioConfig generator;  // num_targets and rng_seed are set per stream
  std::string registry_path;  // empty: built-in default registry
  std::string output_dir = "out";
  int select_k = 3;
  GateScoring gate_scoring = GateScoring::Calibrated;
};

/// Throws ConfigError on violated invariants.
void validate(const ExperimentConfig& config);

/// JSON object; absent keys keep their defaults. Generator overrides live
/// under "generator" (packet_rate, duration, num_subcarriers, snr_db,
/// doppler_min_hz, doppler_max_hz, amplitude_min, amplitude_max). snr_db null
/// disables noise.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

Registry resolve_registry(const ExperimentConfig& config);

/// Writes `set` as CSI1 files under dir/streams plus dir/manifest.csv.
std::vector<ManifestEntry> write_dataset(const StreamSet& set, const std::filesystem::path& dir);

/// cmd_generate: streams_per_class scenes per class 0..k_max at the
/// generator's base rate.
std::vector<ManifestEntry> generate_dataset(const ExperimentConfig& config, const std::filesystem::path& dir);

struct ResultRow {
  std::string condition;  // "rate" or "targets"
  double value = 0.0;
  GateMode mode = GateMode::Normal;
  std::vector<std::string> eligible;
  std::map<std::string, double> expert_accuracy;
  std::map<std::string, std::size_t> selected_count;  // how often the gate picked each expert
  double random3 = 0.0;
  double framework = 0.0;
  std::size_t samples = 0;
};

struct ResultTable {
  std::vector<std::string> expert_ids;
  std::vector<ResultRow> rows;
};

/// Header: condition,value,mode,eligible,<expert ids...>,random3,framework,samples.
/// Accuracies with 4 decimals; eligible ids joined by ';'.
std::string to_csv(const ResultTable& table);

/// Framework, every expert and the random-3 baseline at each rate. Test
/// streams must be at least as fast as every requested rate.
ResultTable eval_rate_sweep(const TrainedBundle& bundle, const StreamSet& test, std::span<const double> rates,
                            std::uint64_t seed);

/// Exact-count accuracy per requested target count at a fixed rate.
ResultTable eval_target_sweep(const TrainedBundle& bundle, const StreamSet& test, std::span<const int> counts,
                              double rate, std::uint64_t seed);

/// Trains a bundle on the synthetic training split derived from config.seed.
TrainedBundle train_synthetic_bundle(const ExperimentConfig& config);

/// Synthetic held-out test set for config.
SyntheticStreams synthetic_test_set(const ExperimentConfig& config);

/// Train + validation sets from a labelled stream set (stratified holdout).
TrainedBundle train_from_streams(const StreamSet& data, const Registry& registry, std::uint64_t seed, double holdout,
                                 const BuildOptions& options = {});

/// Fixed-width table of per-expert validation accuracy.
std::string format_validation_table(const TrainedBundle& bundle);

}  // namespace isac
