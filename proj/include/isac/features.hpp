#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isac/csi.hpp"

namespace isac {

enum class FeatureKind { DopplerEnergy, AmplitudeStats };

std::string_view to_string(FeatureKind kind);
/// Accepts "doppler" / "ampstats" (the serialized tags); throws ConfigError otherwise.
FeatureKind parse_feature_kind(std::string_view tag);

struct FeatureVector {
  FeatureKind kind = FeatureKind::DopplerEnergy;
  std::vector<double> values;
  double source_rate = 0.0;

  bool operator==(const FeatureVector&) const = default;
};

/// Doppler energy histogram layout: num_bins uniform bins over [0, max_freq_hz].
struct DopplerConfig {
  int num_bins = 25;
  double max_freq_hz = 125.0;

  bool operator==(const DopplerConfig&) const = default;
};

/// The configured band clipped to the Nyquist limit of `packet_rate`, so the
/// feature length stays fixed across rates.
DopplerConfig clip_to_nyquist(const DopplerConfig& cfg, double packet_rate);

constexpr std::size_t kAmpStatsLength = 6;

/// Normalized spectral energy of the mean-removed, subcarrier-averaged
/// amplitude series. All zero when the series carries no dynamic energy.
FeatureVector extract_doppler(const CsiStream& stream, const DopplerConfig& cfg);

/// [mean, variance, mean absolute deviation, median, Q1, Q3] of the
/// subcarrier-averaged amplitude series.
FeatureVector extract_amp_stats(const CsiStream& stream);

/// Dispatches on kind. Doppler uses clip_to_nyquist(cfg, stream rate).
FeatureVector extract_feature(FeatureKind kind, const CsiStream& stream, const DopplerConfig& cfg);

// Lower-level pieces, exposed for reuse and testing.

/// |X_m|^2 for m = 0..N/2 of the real series.
std::vector<double> power_spectrum(std::span<const double> series);
std::vector<double> doppler_histogram(std::span<const double> series, double sample_rate,
                                      const DopplerConfig& cfg);
std::vector<double> amp_stats(std::span<const double> series);
/// Linear interpolation between closest order statistics; `sorted` ascending.
double quantile_sorted(std::span<const double> sorted, double p);

/// Pearson correlation; 0 when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Comma-separated row: kind tag, source rate, values.
std::string to_csv_row(const FeatureVector& v);
FeatureVector from_csv_row(std::string_view row);

}  // namespace isac
