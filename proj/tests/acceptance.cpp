// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance               run all criteria
//   acceptance --criterion N run criterion N only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isac/binary_io.hpp"
#include "isac/harness.hpp"
#include "isac/rng.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool sums_to_one(const ClassPosterior& p) {
  return std::abs(std::accumulate(p.probs.begin(), p.probs.end(), 0.0) - 1.0) <= 1e-9;
}

// Benchmark defaults: seed 42, K_max 5, 200 test streams per class.
Outcome fusion_dominance() {
  const auto t0 = Clock::now();
  const ExperimentConfig config;
  const auto bundle = train_synthetic_bundle(config);
  const std::vector<double> rates{500};
  const auto table = eval_rate_sweep(bundle, synthetic_test_set(config), rates, config.seed);
  const auto& row = table.rows.at(0);
  std::string best_id;
  double best = -1.0;
  for (const auto& id : row.eligible)
    if (row.expert_accuracy.at(id) > best) {
      best = row.expert_accuracy.at(id);
      best_id = id;
    }
  const double elapsed = seconds_since(t0);
  const bool pass = row.framework >= best - 0.02 && row.framework >= row.random3 - 0.02 && elapsed <= 300.0;
  return {pass, fmt("framework=%.4f best=%s:%.4f random3=%.4f runtime=%.1fs", row.framework, best_id.c_str(), best,
                    row.random3, elapsed)};
}

Outcome fallback_totality() {
  ExperimentConfig config;
  const auto bundle = train_synthetic_bundle(config);
  const auto test = synthetic_test_set(config);
  std::size_t ok = 0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    try {
      const auto r = detect(test.load(i), 50.0, bundle);
      const bool valid = r.mode == GateMode::Fallback && r.predicted >= 0 && r.predicted <= config.k_max &&
                         !r.gating.selected.empty() && sums_to_one(r.fused);
      ok += valid ? 1 : 0;
    } catch (const std::exception&) {
      ++errors;
    }
  }
  return {ok == test.size() && errors == 0,
          fmt("valid fallback predictions %zu/%zu, errors %zu", ok, test.size(), errors)};
}

Outcome robustness_trend() {
  ExperimentConfig config;
  config.k_max = 10;
  config.target_counts = {3, 10};
  const auto bundle = train_synthetic_bundle(config);
  const auto all = synthetic_test_set(config);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all.label(i) == 3 || all.label(i) == 10) idx.push_back(i);
  SubsetStreams test(all, idx);
  const auto table = eval_target_sweep(bundle, test, config.target_counts, config.target_sweep_rate, config.seed);
  const auto& lo = table.rows.at(0);
  const auto& hi = table.rows.at(1);
  const double fw_drop = lo.framework - hi.framework;
  bool pass = true;
  std::string detail = fmt("rate=%g framework %.4f->%.4f drop=%.4f;", config.target_sweep_rate, lo.framework,
                           hi.framework, fw_drop);
  for (const auto& id : lo.eligible) {
    const double drop = lo.expert_accuracy.at(id) - hi.expert_accuracy.at(id);
    pass = pass && fw_drop <= drop + 0.05;
    detail += fmt(" %s %.4f->%.4f drop=%.4f;", id.c_str(), lo.expert_accuracy.at(id), hi.expert_accuracy.at(id), drop);
  }
  return {pass, detail};
}

Outcome eligibility() {
  const auto registry = default_registry();
  const auto at500 = filter_by_rate(registry, 500);
  const auto at300 = filter_by_rate(registry, 300);
  const std::vector<std::string> want500{"E3", "E4", "E5", "E6", "E7", "E8"};
  const std::vector<std::string> want300{"E5", "E7", "E8"};
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& id : v) s += (s.empty() ? "" : ",") + id;
    return s;
  };
  return {at500 == want500 && at300 == want300, "500: {" + join(at500) + "} 300: {" + join(at300) + "}"};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::size_t knn_mismatch = 0;
  std::size_t posterior_bad = 0;
  std::size_t posteriors = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LabeledDataset d;
    d.num_classes = 3 + static_cast<int>(rng.index(4));
    const std::size_t dim = 2 + rng.index(5);
    const bool coarse = trial % 2 == 0;
    auto draw = [&] {
      std::vector<double> v(dim);
      for (double& x : v) x = coarse ? static_cast<double>(rng.index(3)) : rng.normal();
      return v;
    };
    for (int i = 0; i < 50; ++i) {
      d.features.push_back({FeatureKind::AmplitudeStats, draw(), 300.0});
      d.labels.push_back(static_cast<int>(rng.index(static_cast<std::uint64_t>(d.num_classes))));
    }
    const int k = 1 + static_cast<int>(rng.index(9));
    const auto model = train_knn(d, k);
    for (int q = 0; q < 10; ++q) {
      const auto x = draw();
      const auto p = predict_knn(model, {FeatureKind::AmplitudeStats, x, 300.0});
      knn_mismatch += p.probs == oracle::knn_posterior(d, k, x) ? 0 : 1;
      posterior_bad += sums_to_one(p) ? 0 : 1;
      ++posteriors;
    }
    if (trial % 10 == 0) {
      SvmParams sp;
      sp.epochs = 20;
      ForestParams fp;
      fp.num_trees = 10;
      const std::vector<TrainedModel> models{train_linear_svm(d, sp), train_forest(d, fp, rng.next())};
      for (const auto& m : models)
        for (const auto& f : d.features) {
          posterior_bad += sums_to_one(predict(m, f)) ? 0 : 1;
          ++posteriors;
        }
    }
  }

  double quantile_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(2 + rng.index(59));
    for (double& x : v) x = rng.uniform(-5.0, 5.0);
    const auto stats = amp_stats(v);
    quantile_err = std::max({quantile_err, std::abs(stats[3] - oracle::quantile(v, 0.5)),
                             std::abs(stats[4] - oracle::quantile(v, 0.25)),
                             std::abs(stats[5] - oracle::quantile(v, 0.75))});
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double p = rng.uniform();
    quantile_err = std::max(quantile_err, std::abs(quantile_sorted(sorted, p) - oracle::quantile(v, p)));
  }

  std::size_t pearson_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<double> a(n), b(n), lin(n), constant(n, rng.normal());
    const double slope = rng.uniform(0.1, 10.0) * (trial % 2 ? 1.0 : -1.0);
    const double offset = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      lin[i] = slope * a[i] + offset;
    }
    const double ab = pearson(a, b);
    bool ok = std::abs(ab - pearson(b, a)) <= 1e-12;
    ok = ok && std::abs(ab - oracle::pearson(a, b)) <= 1e-9;
    ok = ok && std::abs(pearson(a, lin) - (slope > 0 ? 1.0 : -1.0)) <= 1e-9;
    ok = ok && pearson(a, constant) == 0.0 && pearson(constant, b) == 0.0;
    ok = ok && ab >= -1.0 && ab <= 1.0;
    pearson_bad += ok ? 0 : 1;
  }

  const double elapsed = seconds_since(t0);
  const bool pass = knn_mismatch == 0 && quantile_err <= 1e-12 && posterior_bad == 0 && pearson_bad == 0 &&
                    elapsed <= 30.0;
  return {pass, fmt("knn mismatches %zu/1000, max quantile err %.3g, bad posteriors %zu/%zu, pearson failures "
                    "%zu/1000, runtime=%.2fs",
                    knn_mismatch, quantile_err, posterior_bad, posteriors, pearson_bad, elapsed)};
}

Outcome doppler_localization() {
  ScenarioConfig c;
  c.num_targets = 1;
  c.packet_rate = 500;
  c.snr_db = ScenarioConfig::kNoNoise;
  const DopplerConfig cfg;
  const auto band = clip_to_nyquist(cfg, c.packet_rate);
  const double width = band.max_freq_hz / band.num_bins;
  std::size_t hits = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    c.rng_seed = derive_seed(6, s);
    const double f = draw_paths(c).at(0).doppler_hz;
    const auto v = extract_doppler(synthesize_stream(c), cfg).values;
    const auto peak = std::max_element(v.begin(), v.end()) - v.begin();
    const auto truth = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(f / width), band.num_bins - 1);
    const auto off = std::abs(peak - truth);
    worst = std::max(worst, static_cast<double>(off));
    hits += off <= 1 ? 1 : 0;
  }
  return {hits == 50, fmt("%zu/50 within one bin (bin width %.2f Hz, worst offset %g bins)", hits, width, worst)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "isac_acceptance_determinism";
  fs::remove_all(root);
  ExperimentConfig config;
  config.streams_per_class = 20;
  generate_dataset(config, root / "data");
  auto run = [&](const fs::path& out) {
    fs::create_directories(out);
    ManifestStreams data(root / "data" / "manifest.csv");
    BuildOptions options;
    options.select_k = config.select_k;
    const auto bundle = train_from_streams(data, default_registry(), config.seed, config.holdout, options);
    save_bundle(bundle, out / "bundle.ismb");
    const auto loaded = load_bundle(out / "bundle.ismb");
    write_file(out / "rate_sweep.csv", to_csv(eval_rate_sweep(loaded, data, config.rates, config.seed)));
  };
  run(root / "a");
  run(root / "b");
  const bool same_bundle = read_file(root / "a" / "bundle.ismb") == read_file(root / "b" / "bundle.ismb");
  const bool same_csv = read_file(root / "a" / "rate_sweep.csv") == read_file(root / "b" / "rate_sweep.csv");
  const auto bytes = read_file(root / "a" / "bundle.ismb").size();
  fs::remove_all(root);
  return {same_bundle && same_csv, fmt("bundle identical: %s (%zu bytes), rate CSV identical: %s",
                                       same_bundle ? "yes" : "no", bytes, same_csv ? "yes" : "no")};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-7)")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"fusion dominance at 500 pkts/s", fusion_dominance},
      {"fallback totality at 50 pkts/s", fallback_totality},
      {"robustness from 3 to 10 targets", robustness_trend},
      {"eligibility reconstruction", eligibility},
      {"oracle equivalences", oracle_equivalence},
      {"Doppler localization", doppler_localization},
      {"determinism", determinism},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
