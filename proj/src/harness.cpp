#include "isac/harness.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "isac/binary_io.hpp"
#include "isac/error.hpp"
#include "isac/rng.hpp"
#include "json.hpp"

namespace isac {

namespace {

using nlohmann::json;

// Seeds for the synthetic train and test sets hang off the experiment seed.
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;

struct StreamOutcome {
  GatingDecision decision;
  std::map<std::string, ClassPosterior> posteriors;
  int framework = 0;
  int random3 = 0;
};

/// Runs every expert once and derives the framework and random-3 answers
/// from the shared posteriors. Equivalent to detect() for the framework.
StreamOutcome evaluate_stream(const TrainedBundle& bundle, const CsiStream& stream, double rate,
                              std::uint64_t random_seed) {
  const CsiStream observed = decimate(stream, rate);
  StreamOutcome out;

  std::map<std::pair<std::size_t, FeatureKind>, FeatureVector> cache;
  for (const auto& e : bundle.registry) {
    const double input_rate = expert_input_rate(e, rate);
    const auto key = std::make_pair(decimation_stride(observed.packet_rate(), input_rate), e.feature_kind);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, extract_feature(e.feature_kind, decimate(observed, input_rate), bundle.meta.doppler))
               .first;
    out.posteriors[e.id] = predict(bundle.models.at(e.id), it->second);
  }

  out.decision = decide(bundle.registry, bundle.templates,
                        gating_features(observed, bundle.registry, bundle.meta.doppler), rate, bundle.meta.select_k,
                        bundle.meta.gate_scoring);
  std::vector<ClassPosterior> selected;
  for (const auto& id : out.decision.selected) selected.push_back(out.posteriors.at(id));
  out.framework = fuse(selected, out.decision.weights).predicted;

  std::vector<std::string> pool = out.decision.eligible;
  if (pool.empty())
    for (const auto& e : bundle.registry) pool.push_back(e.id);
  Rng rng(random_seed);
  const std::size_t take = std::min<std::size_t>(3, pool.size());
  for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
  std::vector<ClassPosterior> random_posteriors;
  for (std::size_t i = 0; i < take; ++i) random_posteriors.push_back(out.posteriors.at(pool[i]));
  const std::vector<double> uniform(take, 1.0 / static_cast<double>(take));
  out.random3 = fuse(random_posteriors, uniform).predicted;
  return out;
}

struct RowAccumulator {
  std::map<std::string, std::size_t> expert_correct;
  std::map<std::string, std::size_t> selected;
  std::size_t framework_correct = 0;
  std::size_t random_correct = 0;
  std::size_t samples = 0;
  GatingDecision first_decision;

  void add(const StreamOutcome& o, int label) {
    if (samples == 0) first_decision = o.decision;
    ++samples;
    for (const auto& [id, post] : o.posteriors) expert_correct[id] += post.argmax() == label ? 1 : 0;
    for (const auto& id : o.decision.selected) ++selected[id];
    framework_correct += o.framework == label ? 1 : 0;
    random_correct += o.random3 == label ? 1 : 0;
  }

  ResultRow finish(std::string condition, double value) const {
    ResultRow row;
    row.condition = std::move(condition);
    row.value = value;
    row.mode = first_decision.mode;
    row.eligible = first_decision.eligible;
    row.samples = samples;
    const auto n = static_cast<double>(samples);
    for (const auto& [id, c] : expert_correct) row.expert_accuracy[id] = static_cast<double>(c) / n;
    row.selected_count = selected;
    row.framework = static_cast<double>(framework_correct) / n;
    row.random3 = static_cast<double>(random_correct) / n;
    return row;
  }
};

std::vector<std::string> registry_ids(const TrainedBundle& bundle) {
  std::vector<std::string> ids;
  for (const auto& e : bundle.registry) ids.push_back(e.id);
  return ids;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
std::vector<T> get_list(const json& j, const char* key, std::vector<T> fallback) {
  return j.contains(key) ? j.at(key).get<std::vector<T>>() : fallback;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  if (c.k_max < 0) throw ConfigError("experiment: k_max must be >= 0");
  if (c.streams_per_class < 1 || c.train_streams_per_class < 1)
    throw ConfigError("experiment: stream counts must be positive");
  if (!(c.holdout > 0.0 && c.holdout < 1.0)) throw ConfigError("experiment: holdout must lie in (0, 1)");
  for (double r : c.rates)
    if (!(r > 0.0)) throw ConfigError("experiment: rates must be positive");
  for (int t : c.target_counts)
    if (t < 0 || t > c.k_max) throw ConfigError("experiment: target counts must lie in [0, k_max]");
  if (!(c.target_sweep_rate > 0.0)) throw ConfigError("experiment: target_sweep_rate must be positive");
  if (c.select_k < 1) throw ConfigError("experiment: select_k must be >= 1");
  isac::validate(c.generator);
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  ExperimentConfig c;
  try {
    const auto j = json::parse(json_text);
    c.k_max = j.value("k_max", c.k_max);
    c.streams_per_class = j.value("streams_per_class", c.streams_per_class);
    c.train_streams_per_class = j.value("train_streams_per_class", c.train_streams_per_class);
    c.holdout = j.value("holdout", c.holdout);
    c.rates = get_list(j, "rates", c.rates);
    c.target_counts = get_list(j, "target_counts", c.target_counts);
    c.target_sweep_rate = j.value("target_sweep_rate", c.target_sweep_rate);
    c.seed = j.value("seed", c.seed);
    c.registry_path = j.value("registry", c.registry_path);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.select_k = j.value("select_k", c.select_k);
    if (j.contains("gate_scoring")) c.gate_scoring = parse_gate_scoring(j.at("gate_scoring").get<std::string>());
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      auto& s = c.generator;
      s.packet_rate = g.value("packet_rate", s.packet_rate);
      s.duration = g.value("duration", s.duration);
      s.num_subcarriers = g.value("num_subcarriers", s.num_subcarriers);
      if (g.contains("snr_db")) {
        s.snr_db = g.at("snr_db").is_null() ? ScenarioConfig::kNoNoise : g.at("snr_db").get<double>();
      }
      s.doppler_min_hz = g.value("doppler_min_hz", s.doppler_min_hz);
      s.doppler_max_hz = g.value("doppler_max_hz", s.doppler_max_hz);
      s.amplitude_min = g.value("amplitude_min", s.amplitude_min);
      s.amplitude_max = g.value("amplitude_max", s.amplitude_max);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("experiment config: ") + ex.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_file(path));
}

Registry resolve_registry(const ExperimentConfig& config) {
  return config.registry_path.empty() ? default_registry() : load_registry(config.registry_path);
}

std::vector<ManifestEntry> write_dataset(const StreamSet& set, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "streams", ec);
  if (ec) throw IoError("cannot create " + (dir / "streams").string() + ": " + ec.message());
  std::vector<ManifestEntry> entries;
  std::vector<int> per_label;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const int label = set.label(i);
    if (per_label.size() <= static_cast<std::size_t>(label)) per_label.resize(static_cast<std::size_t>(label) + 1, 0);
    char name[64];
    std::snprintf(name, sizeof name, "streams/c%02d_%05d.csi", label, per_label[static_cast<std::size_t>(label)]++);
    const CsiStream s = set.load(i);
    save_stream(s, dir / name);
    entries.push_back({name, label, s.packet_rate()});
  }
  write_manifest(dir / "manifest.csv", entries);
  return entries;
}

std::vector<ManifestEntry> generate_dataset(const ExperimentConfig& config, const std::filesystem::path& dir) {
  validate(config);
  SyntheticStreams set(config.generator, config.k_max, config.streams_per_class, config.seed);
  return write_dataset(set, dir);
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream out;
  out << "condition,value,mode,eligible";
  for (const auto& id : table.expert_ids) out << ',' << id;
  out << ",random3,framework,samples\n";
  for (const auto& row : table.rows) {
    std::string eligible;
    for (const auto& id : row.eligible) eligible += (eligible.empty() ? "" : ";") + id;
    out << row.condition << ',' << number(row.value) << ',' << to_string(row.mode) << ',' << eligible;
    for (const auto& id : table.expert_ids) out << ',' << fixed4(row.expert_accuracy.at(id));
    out << ',' << fixed4(row.random3) << ',' << fixed4(row.framework) << ',' << row.samples << '\n';
  }
  return out.str();
}

ResultTable eval_rate_sweep(const TrainedBundle& bundle, const StreamSet& test, std::span<const double> rates,
                            std::uint64_t seed) {
  if (test.size() == 0) throw InputError("rate sweep: test set is empty");
  for (double r : rates)
    if (!(r > 0.0)) throw InputError("rate sweep: rates must be positive");
  std::vector<RowAccumulator> acc(rates.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const CsiStream stream = test.load(i);
    const int label = test.label(i);
    for (std::size_t r = 0; r < rates.size(); ++r) {
      if (rates[r] > stream.packet_rate() * (1.0 + 1e-12))
        throw InputError("rate sweep: rate " + number(rates[r]) + " exceeds the stream rate " +
                         number(stream.packet_rate()));
      acc[r].add(evaluate_stream(bundle, stream, rates[r], derive_seed(seed, std::bit_cast<std::uint64_t>(rates[r]), i)),
                 label);
    }
  }
  ResultTable table{registry_ids(bundle), {}};
  for (std::size_t r = 0; r < rates.size(); ++r) table.rows.push_back(acc[r].finish("rate", rates[r]));
  return table;
}

ResultTable eval_target_sweep(const TrainedBundle& bundle, const StreamSet& test, std::span<const int> counts,
                              double rate, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < test.size(); ++i) by_label[test.label(i)].push_back(i);
  for (int c : counts)
    if (!by_label.contains(c)) throw InputError("target sweep: no test streams with " + std::to_string(c) + " targets");
  ResultTable table{registry_ids(bundle), {}};
  for (int c : counts) {
    RowAccumulator acc;
    for (auto i : by_label.at(c)) {
      const CsiStream stream = test.load(i);
      if (rate > stream.packet_rate() * (1.0 + 1e-12))
        throw InputError("target sweep: rate " + number(rate) + " exceeds the stream rate");
      acc.add(evaluate_stream(bundle, stream, rate, derive_seed(seed, std::bit_cast<std::uint64_t>(rate), i)), c);
    }
    table.rows.push_back(acc.finish("targets", c));
  }
  return table;
}

TrainedBundle train_from_streams(const StreamSet& data, const Registry& registry, std::uint64_t seed, double holdout,
                                 const BuildOptions& options) {
  if (data.size() == 0) throw TrainingError("dataset is empty");
  auto [train_idx, val_idx] = split_train_val(data, holdout, seed);
  SubsetStreams train(data, std::move(train_idx));
  SubsetStreams val(data, std::move(val_idx));
  return build_bundle(train, val, registry, seed, options);
}

TrainedBundle train_synthetic_bundle(const ExperimentConfig& config) {
  validate(config);
  SyntheticStreams data(config.generator, config.k_max, config.train_streams_per_class,
                        derive_seed(config.seed, kTrainStream));
  BuildOptions options;
  options.select_k = config.select_k;
  options.gate_scoring = config.gate_scoring;
  return train_from_streams(data, resolve_registry(config), config.seed, config.holdout, options);
}

SyntheticStreams synthetic_test_set(const ExperimentConfig& config) {
  return SyntheticStreams(config.generator, config.k_max, config.streams_per_class,
                          derive_seed(config.seed, kTestStream));
}

std::string format_validation_table(const TrainedBundle& bundle) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-9s %-7s %8s %9s %8s\n", "expert", "feature", "model", "rate", "classes",
                "val_acc");
  out << line;
  for (const auto& e : bundle.registry) {
    std::snprintf(line, sizeof line, "%-8s %-9s %-7s %8.1f %9zu %8.4f\n", e.id.c_str(),
                  std::string(to_string(e.feature_kind)).c_str(), std::string(to_string(e.classifier_kind)).c_str(),
                  e.required_rate, bundle.templates.at(e.id).centroids.size(), bundle.meta.validation_accuracy.at(e.id));
    out << line;
  }
  return out.str();
}

}  // namespace isac
