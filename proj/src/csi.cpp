#include "isac/csi.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "isac/error.hpp"
#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Average power of one path with amplitude uniform on [lo, hi].
double mean_path_power(double lo, double hi) {
  if (hi <= lo) return lo * lo;
  return (hi * hi * hi - lo * lo * lo) / (3.0 * (hi - lo));
}

}  // namespace

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& what) { throw ConfigError("scenario: " + what); };
  if (c.num_targets < 0) fail("num_targets must be >= 0");
  if (!(c.packet_rate > 0.0) || !std::isfinite(c.packet_rate)) fail("packet_rate must be positive");
  if (!(c.duration > 0.0) || !std::isfinite(c.duration)) fail("duration must be positive");
  if (c.num_subcarriers < 1) fail("num_subcarriers must be >= 1");
  if (c.packet_rate * c.duration < 2.0) fail("packet_rate * duration must be >= 2");
  if (std::isnan(c.snr_db) || c.snr_db == -std::numeric_limits<double>::infinity())
    fail("snr_db must be a number or +inf");
  if (!(c.doppler_min_hz > 0.0) || !(c.doppler_min_hz <= c.doppler_max_hz))
    fail("doppler range must satisfy 0 < min <= max");
  if (!(c.doppler_max_hz < c.packet_rate / 2.0)) fail("doppler max must stay below packet_rate / 2");
  if (!(c.amplitude_min >= 0.0) || !(c.amplitude_min <= c.amplitude_max))
    fail("amplitude range must satisfy 0 <= min <= max");
  if (!(c.bandwidth_hz > 0.0)) fail("bandwidth must be positive");
  if (!(c.max_static_delay_ns >= 0.0) || !(c.max_excess_delay_ns >= 0.0))
    fail("delays must be non-negative");
}

std::size_t num_packets(const ScenarioConfig& config) {
  return static_cast<std::size_t>(std::llround(config.packet_rate * config.duration));
}

CsiStream::CsiStream(std::size_t packets, std::size_t subcarriers, double packet_rate,
                     int true_target_count, std::uint64_t seed)
    : packets_(packets),
      subcarriers_(subcarriers),
      packet_rate_(packet_rate),
      true_target_count_(true_target_count),
      seed_(seed),
      samples_(packets * subcarriers) {}

double subcarrier_offset_hz(int k, int num_subcarriers, double bandwidth_hz) {
  if (num_subcarriers == 1) return 0.0;
  return -bandwidth_hz / 2.0 + bandwidth_hz * k / (num_subcarriers - 1);
}

// Random streams: 0 = static path, 1 = target paths, 2 = noise. Keeping them
// separate lets a forced-path stream share static gains and noise with the
// drawn-path stream of the same seed.
std::vector<TargetPath> draw_paths(const ScenarioConfig& config) {
  validate(config);
  Rng rng(derive_seed(config.rng_seed, 1));
  std::vector<TargetPath> paths;
  paths.reserve(static_cast<std::size_t>(config.num_targets));
  for (int p = 0; p < config.num_targets; ++p) {
    TargetPath path;
    path.doppler_hz = rng.uniform(config.doppler_min_hz, config.doppler_max_hz);
    path.amplitude = rng.uniform(config.amplitude_min, config.amplitude_max);
    path.initial_phase = rng.uniform(0.0, kTwoPi);
    path.delay_ns = rng.uniform(0.0, config.max_excess_delay_ns);
    paths.push_back(path);
  }
  return paths;
}

CsiStream synthesize_stream(const ScenarioConfig& config) {
  const auto paths = draw_paths(config);
  return synthesize_stream(config, paths);
}

CsiStream synthesize_stream(const ScenarioConfig& config, std::span<const TargetPath> paths) {
  validate(config);
  for (const auto& p : paths) {
    if (!(p.amplitude >= 0.0) || !(p.delay_ns >= 0.0))
      throw ConfigError("target path: amplitude and delay must be non-negative");
    if (!(std::abs(p.doppler_hz) < config.packet_rate / 2.0))
      throw ConfigError("target path: doppler aliases at this packet rate");
  }

  const std::size_t packets = num_packets(config);
  const auto subcarriers = static_cast<std::size_t>(config.num_subcarriers);
  CsiStream stream(packets, subcarriers, config.packet_rate, static_cast<int>(paths.size()),
                   config.rng_seed);

  // Static component: a line-of-sight path with seeded phase and delay.
  Rng static_rng(derive_seed(config.rng_seed, 0));
  const double static_phase = static_rng.uniform(0.0, kTwoPi);
  const double static_delay = static_rng.uniform(0.0, config.max_static_delay_ns) * 1e-9;

  std::vector<double> offsets(subcarriers);
  std::vector<Complex> static_gain(subcarriers);
  for (std::size_t k = 0; k < subcarriers; ++k) {
    offsets[k] = subcarrier_offset_hz(static_cast<int>(k), config.num_subcarriers, config.bandwidth_hz);
    static_gain[k] = std::polar(1.0, static_phase - kTwoPi * offsets[k] * static_delay);
  }

  // H separates into a time factor (n, p) and a frequency factor (k, p).
  const std::size_t num_paths = paths.size();
  std::vector<Complex> freq(subcarriers * num_paths);
  for (std::size_t p = 0; p < num_paths; ++p) {
    const double tau = static_delay + paths[p].delay_ns * 1e-9;
    for (std::size_t k = 0; k < subcarriers; ++k)
      freq[p * subcarriers + k] = std::polar(paths[p].amplitude, -kTwoPi * offsets[k] * tau);
  }

  double dynamic_power = 0.0;
  for (const auto& p : paths) dynamic_power += p.amplitude * p.amplitude;
  if (num_paths == 0) dynamic_power = mean_path_power(config.amplitude_min, config.amplitude_max);
  const bool noisy = std::isfinite(config.snr_db);
  const double noise_sigma =
      noisy ? std::sqrt(dynamic_power / std::pow(10.0, config.snr_db / 10.0) / 2.0) : 0.0;
  Rng noise_rng(derive_seed(config.rng_seed, 2));

  std::vector<Complex> time_factor(num_paths);
  for (std::size_t n = 0; n < packets; ++n) {
    const double t = static_cast<double>(n) / config.packet_rate;
    for (std::size_t p = 0; p < num_paths; ++p)
      time_factor[p] = std::polar(1.0, kTwoPi * paths[p].doppler_hz * t + paths[p].initial_phase);
    for (std::size_t k = 0; k < subcarriers; ++k) {
      Complex h = static_gain[k];
      for (std::size_t p = 0; p < num_paths; ++p) h += time_factor[p] * freq[p * subcarriers + k];
      if (noisy) {
        const double re = noise_rng.normal();
        const double im = noise_rng.normal();
        h += Complex(noise_sigma * re, noise_sigma * im);
      }
      stream.at(n, k) = h;
    }
  }
  return stream;
}

std::size_t decimation_stride(double source_rate, double target_rate) {
  if (!(target_rate > 0.0) || !std::isfinite(target_rate))
    throw ConfigError("decimate: target rate must be positive");
  if (target_rate > source_rate * (1.0 + 1e-12))
    throw RateError("decimate: target rate " + std::to_string(target_rate) +
                    " exceeds stream rate " + std::to_string(source_rate));
  // The epsilon absorbs rounding in rates that were themselves produced by
  // an integer division (e.g. 1000/3).
  const auto stride = static_cast<std::size_t>(std::floor(source_rate / target_rate + 1e-9));
  return stride < 1 ? 1 : stride;
}

CsiStream decimate(const CsiStream& stream, double target_rate) {
  const std::size_t stride = decimation_stride(stream.packet_rate(), target_rate);
  if (stride == 1) return stream;
  const std::size_t out_packets = (stream.packets() + stride - 1) / stride;
  CsiStream out(out_packets, stream.subcarriers(), stream.packet_rate() / static_cast<double>(stride),
                stream.true_target_count(), stream.seed());
  for (std::size_t n = 0; n < out_packets; ++n) {
    const auto src = stream.row(n * stride);
    for (std::size_t k = 0; k < stream.subcarriers(); ++k) out.at(n, k) = src[k];
  }
  return out;
}

AmplitudeMatrix amplitude_series(const CsiStream& stream) {
  AmplitudeMatrix m{stream.packets(), stream.subcarriers(), {}};
  m.values.reserve(stream.samples().size());
  for (const auto& z : stream.samples()) m.values.push_back(std::abs(z));
  return m;
}

std::vector<double> mean_amplitude(const CsiStream& stream) {
  std::vector<double> series(stream.packets(), 0.0);
  if (stream.subcarriers() == 0) return series;
  for (std::size_t n = 0; n < stream.packets(); ++n) {
    double sum = 0.0;
    for (const auto& z : stream.row(n)) sum += std::abs(z);
    series[n] = sum / static_cast<double>(stream.subcarriers());
  }
  return series;
}

}  // namespace isac
