#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace isac {

using Complex = std::complex<double>;

/// Parameters of one synthetic sensing scene.
struct ScenarioConfig {
  int num_targets = 0;
  double packet_rate = 1000.0;  // pkts/s
  double duration = 2.0;        // s
  int num_subcarriers = 30;
  double snr_db = 15.0;  // +inf disables noise
  double doppler_min_hz = 5.0;
  double doppler_max_hz = 60.0;
  std::uint64_t rng_seed = 0;

  // Channel constants. Not part of the scene description proper, but kept
  // here so every generator knob travels with the config.
  double bandwidth_hz = 20e6;
  double amplitude_min = 0.3;
  double amplitude_max = 1.0;
  double max_static_delay_ns = 50.0;
  double max_excess_delay_ns = 10.0;

  static constexpr double kNoNoise = std::numeric_limits<double>::infinity();
};

/// Throws ConfigError when the config violates its invariants.
void validate(const ScenarioConfig& config);

std::size_t num_packets(const ScenarioConfig& config);

/// One Doppler-shifted reflection, one per moving target.
struct TargetPath {
  double doppler_hz = 0.0;
  double amplitude = 0.0;
  double initial_phase = 0.0;  // rad, [0, 2pi)
  double delay_ns = 0.0;
};

/// Row-major complex CSI matrix (packets x subcarriers) plus scene metadata.
class CsiStream {
 public:
  CsiStream() = default;
  CsiStream(std::size_t packets, std::size_t subcarriers, double packet_rate,
            int true_target_count, std::uint64_t seed);

  std::size_t packets() const { return packets_; }
  std::size_t subcarriers() const { return subcarriers_; }
  double packet_rate() const { return packet_rate_; }
  int true_target_count() const { return true_target_count_; }
  std::uint64_t seed() const { return seed_; }

  Complex& at(std::size_t n, std::size_t k) { return samples_[n * subcarriers_ + k]; }
  const Complex& at(std::size_t n, std::size_t k) const { return samples_[n * subcarriers_ + k]; }

  std::span<const Complex> row(std::size_t n) const {
    return {samples_.data() + n * subcarriers_, subcarriers_};
  }
  std::span<const Complex> samples() const { return samples_; }
  std::span<Complex> samples() { return samples_; }

  bool operator==(const CsiStream&) const = default;

 private:
  std::size_t packets_ = 0;
  std::size_t subcarriers_ = 0;
  double packet_rate_ = 0.0;
  int true_target_count_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Complex> samples_;
};

/// Real matrix in the same layout as CsiStream.
struct AmplitudeMatrix {
  std::size_t packets = 0;
  std::size_t subcarriers = 0;
  std::vector<double> values;

  double at(std::size_t n, std::size_t k) const { return values[n * subcarriers + k]; }
};

/// Draws the per-target paths for a scene from its seed. The same draws are
/// consumed by synthesize_stream(config).
std::vector<TargetPath> draw_paths(const ScenarioConfig& config);

/// H[n][k] = S_k + sum_p a_p exp(j(2 pi f_p t_n + phi_p)) exp(-j 2 pi f_k tau_p) + w[n][k]
CsiStream synthesize_stream(const ScenarioConfig& config);

/// Same channel model with caller-supplied dynamic paths; the static gains
/// and noise still come from the config seed. true_target_count = paths.size().
CsiStream synthesize_stream(const ScenarioConfig& config, std::span<const TargetPath> paths);

/// Keeps every floor(rate / target_rate)-th packet starting at 0.
CsiStream decimate(const CsiStream& stream, double target_rate);

/// Integer stride decimate() would use.
std::size_t decimation_stride(double source_rate, double target_rate);

AmplitudeMatrix amplitude_series(const CsiStream& stream);

/// |H| averaged over subcarriers, one value per packet.
std::vector<double> mean_amplitude(const CsiStream& stream);

/// Baseband offset of subcarrier k for a band of the given width.
double subcarrier_offset_hz(int k, int num_subcarriers, double bandwidth_hz);

}  // namespace isac
