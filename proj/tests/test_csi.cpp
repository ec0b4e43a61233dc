#include <cmath>
#include <numbers>

#include "doctest.h"
#include "isac/csi.hpp"
#include "isac/error.hpp"
#include "isac/rng.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {

ScenarioConfig quiet(int targets, double rate = 500.0, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.num_targets = targets;
  c.packet_rate = rate;
  c.snr_db = ScenarioConfig::kNoNoise;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST_CASE("scenario validation") {
  ScenarioConfig c;
  CHECK_NOTHROW(validate(c));
  auto bad = [&](auto mutate) {
    ScenarioConfig b;
    mutate(b);
    CHECK_THROWS_AS(validate(b), ConfigError);
    CHECK_THROWS_AS(synthesize_stream(b), ConfigError);
  };
  bad([](ScenarioConfig& b) { b.packet_rate = 0; });
  bad([](ScenarioConfig& b) { b.packet_rate = -5; });
  bad([](ScenarioConfig& b) { b.duration = 0; });
  bad([](ScenarioConfig& b) { b.num_targets = -1; });
  bad([](ScenarioConfig& b) { b.num_subcarriers = 0; });
  bad([](ScenarioConfig& b) { b.packet_rate = 100; });  // 60 Hz max Doppler aliases
  bad([](ScenarioConfig& b) { b.doppler_min_hz = 0; });
  bad([](ScenarioConfig& b) { b.doppler_min_hz = 70; });
  bad([](ScenarioConfig& b) { b.duration = 0.001; });  // one packet
  bad([](ScenarioConfig& b) { b.snr_db = std::nan(""); });
}

TEST_CASE("stream shape and metadata") {
  auto c = quiet(3, 1000.0, 99);
  c.duration = 0.5;
  c.num_subcarriers = 12;
  const auto s = synthesize_stream(c);
  CHECK(s.packets() == 500);
  CHECK(s.subcarriers() == 12);
  CHECK(s.packet_rate() == 1000.0);
  CHECK(s.true_target_count() == 3);
  CHECK(s.seed() == 99);
  for (const auto& z : s.samples()) CHECK(std::isfinite(std::abs(z)));
}

TEST_CASE("no targets and no noise gives constant amplitude per subcarrier") {
  const auto s = synthesize_stream(quiet(0));
  const auto a = amplitude_series(s);
  for (std::size_t k = 0; k < s.subcarriers(); ++k) {
    for (std::size_t n = 0; n < s.packets(); ++n) CHECK(a.at(n, k) == doctest::Approx(a.at(0, k)).epsilon(1e-12));
    CHECK(a.at(0, k) == doctest::Approx(1.0));
  }
}

TEST_CASE("single forced 20 Hz path peaks within half a hertz") {
  auto c = quiet(1);
  const TargetPath p{20.0, 0.5, 0.3, 2.0};
  const auto s = synthesize_stream(c, std::span<const TargetPath>(&p, 1));
  CHECK(std::abs(oracle::spectral_peak_hz(s) - 20.0) <= 0.5);
}

TEST_CASE("forced Doppler paths peak within one resolution bin") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto c = quiet(1, 500.0, 1000 + i);
    const TargetPath p{rng.uniform(5.0, 60.0), rng.uniform(0.3, 1.0), rng.uniform(0.0, 6.28), rng.uniform(0.0, 10.0)};
    const auto s = synthesize_stream(c, std::span<const TargetPath>(&p, 1));
    CHECK(std::abs(oracle::spectral_peak_hz(s) - p.doppler_hz) <= 1.0 / c.duration);
  }
}

TEST_CASE("same seed is bit-identical, different seed differs") {
  ScenarioConfig c;
  c.num_targets = 4;
  c.rng_seed = 77;
  CHECK(synthesize_stream(c) == synthesize_stream(c));
  auto d = c;
  d.rng_seed = 78;
  CHECK_FALSE(synthesize_stream(c) == synthesize_stream(d));
}

TEST_CASE("drawn paths respect the configured ranges") {
  ScenarioConfig c;
  c.num_targets = 10;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    c.rng_seed = seed;
    const auto paths = draw_paths(c);
    REQUIRE(paths.size() == 10);
    for (const auto& p : paths) {
      CHECK(p.doppler_hz >= c.doppler_min_hz);
      CHECK(p.doppler_hz <= c.doppler_max_hz);
      CHECK(std::abs(p.doppler_hz) < c.packet_rate / 2);
      CHECK(p.amplitude >= c.amplitude_min);
      CHECK(p.amplitude <= c.amplitude_max);
      CHECK(p.initial_phase >= 0.0);
      CHECK(p.initial_phase < 2 * std::numbers::pi);
      CHECK(p.delay_ns >= 0.0);
    }
  }
}

TEST_CASE("drawn-path and forced-path synthesis agree") {
  ScenarioConfig c;
  c.num_targets = 3;
  c.rng_seed = 11;
  const auto paths = draw_paths(c);
  CHECK(synthesize_stream(c) == synthesize_stream(c, paths));
}

TEST_CASE("noise power matches the requested SNR against dynamic power") {
  ScenarioConfig c;
  c.num_targets = 2;
  c.rng_seed = 21;
  c.snr_db = 10.0;
  auto clean_cfg = c;
  clean_cfg.snr_db = ScenarioConfig::kNoNoise;
  const auto noisy = synthesize_stream(c);
  const auto clean = synthesize_stream(clean_cfg);
  double noise = 0.0;
  for (std::size_t i = 0; i < noisy.samples().size(); ++i) noise += std::norm(noisy.samples()[i] - clean.samples()[i]);
  noise /= static_cast<double>(noisy.samples().size());
  double dynamic = 0.0;
  for (const auto& p : draw_paths(c)) dynamic += p.amplitude * p.amplitude;
  CHECK(10.0 * std::log10(dynamic / noise) == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("aliasing forced path is rejected") {
  auto c = quiet(1, 100.0);
  c.doppler_max_hz = 40.0;
  const TargetPath p{55.0, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(synthesize_stream(c, std::span<const TargetPath>(&p, 1)), ConfigError);
}

TEST_CASE("decimate examples") {
  CsiStream s(1000, 2, 500.0, 2, 9);
  for (std::size_t n = 0; n < s.packets(); ++n) s.at(n, 0) = Complex(static_cast<double>(n), 0);
  const auto d = decimate(s, 100.0);
  CHECK(d.packets() == 200);
  CHECK(d.packet_rate() == 100.0);
  CHECK(d.true_target_count() == 2);
  CHECK(d.seed() == 9);
  for (std::size_t n = 0; n < d.packets(); ++n) CHECK(d.at(n, 0).real() == 5.0 * n);
  CHECK(decimate(s, 500.0) == s);
  CHECK_THROWS_AS(decimate(s, 600.0), RateError);
  CHECK_THROWS_AS(decimate(s, 0.0), ConfigError);
  CHECK_THROWS_AS(decimate(s, -1.0), ConfigError);
}

TEST_CASE("decimate uses floor strides and recomputes the rate") {
  CsiStream s(1000, 1, 1000.0, 0, 0);
  const auto d = decimate(s, 300.0);  // stride 3
  CHECK(decimation_stride(1000.0, 300.0) == 3);
  CHECK(d.packets() == 334);
  CHECK(d.packet_rate() == doctest::Approx(1000.0 / 3.0));
  CHECK(decimation_stride(1000.0, 1000.0 / 3.0) == 3);
}

TEST_CASE("decimation composes when strides multiply") {
  ScenarioConfig c;
  c.num_targets = 2;
  c.rng_seed = 4;
  const auto s = synthesize_stream(c);
  CHECK(decimate(decimate(s, 500.0), 100.0) == decimate(s, 100.0));
  CHECK(decimate(decimate(s, 250.0), 125.0) == decimate(s, 125.0));
}

TEST_CASE("amplitude series") {
  CsiStream s(2, 2, 10.0, 0, 0);
  s.at(0, 0) = Complex(3, 4);
  s.at(1, 1) = Complex(-6, 8);
  const auto a = amplitude_series(s);
  CHECK(a.at(0, 0) == 5.0);
  CHECK(a.at(0, 1) == 0.0);
  CHECK(a.at(1, 1) == 10.0);
  CHECK(mean_amplitude(s) == std::vector<double>{2.5, 5.0});

  CsiStream zero(3, 4, 10.0, 0, 0);
  for (double v : amplitude_series(zero).values) CHECK(v == 0.0);

  ScenarioConfig c;
  c.num_targets = 3;
  auto r = synthesize_stream(c);
  auto conj = r;
  for (auto& z : conj.samples()) z = std::conj(z);
  CHECK(amplitude_series(conj).values == amplitude_series(r).values);
}

TEST_CASE("subcarrier offsets span the band") {
  CHECK(subcarrier_offset_hz(0, 30, 20e6) == -10e6);
  CHECK(subcarrier_offset_hz(29, 30, 20e6) == doctest::Approx(10e6));
  CHECK(subcarrier_offset_hz(0, 1, 20e6) == 0.0);
}
