// isac_moe: dataset generation, training, sweeps and single-shot detection.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "isac/binary_io.hpp"
#include "isac/error.hpp"
#include "isac/framework.hpp"
#include "isac/harness.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kInput = 3,
  kIo = 4,
  kFormat = 5,
  kTraining = 6,
};

constexpr const char* kOutDirEnv = "ISAC_MOE_OUT_DIR";

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

isac::ExperimentConfig load_config(const Common& common) {
  auto config = common.config_path.empty() ? isac::ExperimentConfig{} : isac::load_experiment_config(common.config_path);
  if (common.seed) config.seed = *common.seed;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) config.output_dir = env;
  if (!common.out_dir.empty()) config.output_dir = common.out_dir;
  return config;
}

fs::path manifest_path(const std::string& data) {
  const fs::path p(data);
  return fs::is_directory(p) ? p / "manifest.csv" : p;
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw isac::IoError("cannot create " + dir.string() + ": " + ec.message());
}

fs::path output_file(const std::string& explicit_path, const isac::ExperimentConfig& config, const char* name) {
  fs::path p = explicit_path.empty() ? fs::path(config.output_dir) / name : fs::path(explicit_path);
  ensure_dir(p.parent_path());
  return p;
}

fs::path templates_path(const fs::path& bundle) {
  fs::path p = bundle;
  p.replace_extension(".templates.csv");
  return p;
}

void write_bundle_files(const isac::TrainedBundle& bundle, const fs::path& path) {
  isac::save_bundle(bundle, path);
  isac::write_file(templates_path(path), isac::templates_to_csv(bundle.templates));
}

void print_report(const isac::DetectionReport& r) {
  std::printf("predicted: %d\n", r.predicted);
  std::printf("mode: %s\n", std::string(isac::to_string(r.mode)).c_str());
  std::printf("rate: %.10g\n", r.current_rate);
  std::printf("eligible:");
  for (const auto& id : r.gating.eligible) std::printf(" %s", id.c_str());
  std::printf("\nselected:\n");
  for (std::size_t i = 0; i < r.gating.selected.size(); ++i) {
    const auto& id = r.gating.selected[i];
    std::printf("  %-6s weight=%.17g score=%.17g top=%d\n", id.c_str(), r.gating.weights[i], r.gating.scores.at(id),
                r.expert_posteriors[i].argmax());
  }
  std::printf("posterior:");
  for (double p : r.fused.probs) std::printf(" %.6f", p);
  std::printf("\n");
}

json report_json(const isac::DetectionReport& r) {
  json j;
  j["predicted"] = r.predicted;
  j["mode"] = std::string(isac::to_string(r.mode));
  j["rate"] = r.current_rate;
  j["eligible"] = r.gating.eligible;
  j["posterior"] = r.fused.probs;
  json selected = json::array();
  for (std::size_t i = 0; i < r.gating.selected.size(); ++i) {
    const auto& id = r.gating.selected[i];
    selected.push_back({{"id", id},
                        {"weight", r.gating.weights[i]},
                        {"score", r.gating.scores.at(id)},
                        {"posterior", r.expert_posteriors[i].probs}});
  }
  j["selected"] = selected;
  return j;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const isac::ConfigError*>(&e)) return kConfig;
  if (dynamic_cast<const isac::InputError*>(&e)) return kInput;
  if (dynamic_cast<const isac::IoError*>(&e)) return kIo;
  if (dynamic_cast<const isac::FormatError*>(&e)) return kFormat;
  if (dynamic_cast<const isac::TrainingError*>(&e)) return kTraining;
  return kOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MoE target counting over synthetic CSI"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config_path, "experiment config (JSON)");
    sub->add_option("--seed", common.seed, "override the config seed");
    sub->add_option("-o,--out-dir", common.out_dir, "output directory (default: config, then $ISAC_MOE_OUT_DIR)");
  };

  // generate
  auto* gen = app.add_subcommand("generate", "write a labelled synthetic dataset");
  add_common(gen);
  std::optional<int> gen_k_max, gen_per_class;
  gen->add_option("--k-max", gen_k_max, "largest target count");
  gen->add_option("--per-class", gen_per_class, "streams per class");

  // train
  auto* train = app.add_subcommand("train", "train every expert and build the template library");
  add_common(train);
  std::string train_data, train_registry, train_out;
  bool train_synthetic = false;
  train->add_option("-d,--data", train_data, "dataset directory or manifest");
  train->add_flag("--synthetic", train_synthetic, "train on the in-memory synthetic set from the config");
  train->add_option("-r,--registry", train_registry, "registry file (JSON)");
  train->add_option("-b,--bundle", train_out, "bundle path (default <out-dir>/bundle.ismb)");

  // eval-rate
  auto* rate = app.add_subcommand("eval-rate", "accuracy per communication rate");
  add_common(rate);
  std::string rate_bundle, rate_data, rate_out;
  std::vector<double> rate_values;
  rate->add_option("-b,--bundle", rate_bundle, "trained bundle")->required();
  rate->add_option("-d,--data", rate_data, "test dataset directory or manifest")->required();
  rate->add_option("--rates", rate_values, "rates in pkts/s (default: config)")->delimiter(',');
  rate->add_option("--csv", rate_out, "CSV path (default <out-dir>/rate_sweep.csv)");

  // eval-targets
  auto* targets = app.add_subcommand("eval-targets", "accuracy per target count");
  add_common(targets);
  std::string targets_bundle, targets_data, targets_out;
  std::vector<int> target_counts;
  std::optional<double> targets_rate;
  targets->add_option("-b,--bundle", targets_bundle, "trained bundle")->required();
  targets->add_option("-d,--data", targets_data, "test dataset directory or manifest")->required();
  targets->add_option("--counts", target_counts, "target counts (default: config)")->delimiter(',');
  targets->add_option("--rate", targets_rate, "communication rate (default: config)");
  targets->add_option("--csv", targets_out, "CSV path (default <out-dir>/target_sweep.csv)");

  // detect
  auto* det = app.add_subcommand("detect", "count targets in one stream");
  std::string det_bundle, det_stream;
  double det_rate = 0.0;
  bool det_json = false;
  det->add_option("-b,--bundle", det_bundle, "trained bundle")->required();
  det->add_option("-s,--stream", det_stream, "CSI1 stream file")->required();
  det->add_option("--rate", det_rate, "current communication rate (pkts/s)")->required();
  det->add_flag("--json", det_json, "print a JSON report");

  // bench
  auto* bench = app.add_subcommand("bench", "train and run both sweeps on in-memory synthetic data");
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) {
      auto config = load_config(common);
      if (gen_k_max) {
        config.k_max = *gen_k_max;
        std::erase_if(config.target_counts, [&](int c) { return c > config.k_max; });
      }
      if (gen_per_class) config.streams_per_class = *gen_per_class;
      const auto entries = isac::generate_dataset(config, config.output_dir);
      std::printf("wrote %zu streams to %s\n", entries.size(), config.output_dir.c_str());
    } else if (*train) {
      const auto config = load_config(common);
      if (train_data.empty() == !train_synthetic) throw isac::ConfigError("train: give exactly one of --data or --synthetic");
      isac::TrainedBundle bundle;
      if (train_synthetic) {
        auto c = config;
        if (!train_registry.empty()) c.registry_path = train_registry;
        bundle = isac::train_synthetic_bundle(c);
      } else {
        isac::BuildOptions options;
        options.select_k = config.select_k;
        options.gate_scoring = config.gate_scoring;
        const auto registry = train_registry.empty() ? isac::resolve_registry(config) : isac::load_registry(train_registry);
        isac::ManifestStreams data(manifest_path(train_data));
        bundle = isac::train_from_streams(data, registry, config.seed, config.holdout, options);
      }
      const auto path = output_file(train_out, config, "bundle.ismb");
      write_bundle_files(bundle, path);
      std::cout << isac::format_validation_table(bundle);
      std::printf("bundle: %s\n", path.string().c_str());
    } else if (*rate) {
      const auto config = load_config(common);
      const auto bundle = isac::load_bundle(rate_bundle);
      isac::ManifestStreams data(manifest_path(rate_data));
      const auto rates = rate_values.empty() ? config.rates : rate_values;
      const auto csv = isac::to_csv(isac::eval_rate_sweep(bundle, data, rates, config.seed));
      isac::write_file(output_file(rate_out, config, "rate_sweep.csv"), csv);
      std::cout << csv;
    } else if (*targets) {
      const auto config = load_config(common);
      const auto bundle = isac::load_bundle(targets_bundle);
      isac::ManifestStreams data(manifest_path(targets_data));
      const auto counts = target_counts.empty() ? config.target_counts : target_counts;
      const auto csv = isac::to_csv(isac::eval_target_sweep(bundle, data, counts,
                                                            targets_rate.value_or(config.target_sweep_rate), config.seed));
      isac::write_file(output_file(targets_out, config, "target_sweep.csv"), csv);
      std::cout << csv;
    } else if (*det) {
      const auto bundle = isac::load_bundle(det_bundle);
      const auto report = isac::detect(isac::load_stream(det_stream), det_rate, bundle);
      if (det_json) {
        std::cout << report_json(report).dump(2) << '\n';
      } else {
        print_report(report);
      }
    } else if (*bench) {
      const auto config = load_config(common);
      const auto bundle = isac::train_synthetic_bundle(config);
      std::cout << isac::format_validation_table(bundle);
      const auto test = isac::synthetic_test_set(config);
      const auto rate_csv = isac::to_csv(isac::eval_rate_sweep(bundle, test, config.rates, config.seed));
      const auto target_csv = isac::to_csv(
          isac::eval_target_sweep(bundle, test, config.target_counts, config.target_sweep_rate, config.seed));
      write_bundle_files(bundle, output_file("", config, "bundle.ismb"));
      isac::write_file(output_file("", config, "rate_sweep.csv"), rate_csv);
      isac::write_file(output_file("", config, "target_sweep.csv"), target_csv);
      std::cout << rate_csv << target_csv;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return kOk;
}
