#include "isac/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numeric>

#include "isac/error.hpp"

namespace isac {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kZeroEnergy = 1e-15;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  // from_chars for double is available in libstdc++ >= 11.
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw InputError("bad number in feature row: '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::DopplerEnergy:
      return "doppler";
    case FeatureKind::AmplitudeStats:
      return "ampstats";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view tag) {
  if (tag == "doppler") return FeatureKind::DopplerEnergy;
  if (tag == "ampstats") return FeatureKind::AmplitudeStats;
  throw ConfigError("unknown feature kind '" + std::string(tag) + "'");
}

DopplerConfig clip_to_nyquist(const DopplerConfig& cfg, double packet_rate) {
  DopplerConfig out = cfg;
  out.max_freq_hz = std::min(cfg.max_freq_hz, packet_rate / 2.0);
  return out;
}

std::vector<double> power_spectrum(std::span<const double> series) {
  const int n = static_cast<int>(series.size());
  std::vector<double> in(series.begin(), series.end());
  std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
  }
  std::unique_ptr<fftw_plan_s, void (*)(fftw_plan)> guard(plan, [](fftw_plan p) {
    std::lock_guard lock(fftw_plan_mutex());
    fftw_destroy_plan(p);
  });
  fftw_execute(plan);
  std::vector<double> power(out.size());
  for (std::size_t m = 0; m < out.size(); ++m) power[m] = out[m][0] * out[m][0] + out[m][1] * out[m][1];
  return power;
}

std::vector<double> doppler_histogram(std::span<const double> series, double sample_rate,
                                      const DopplerConfig& cfg) {
  if (cfg.num_bins < 2) throw ConfigError("doppler: num_bins must be >= 2");
  if (!(cfg.max_freq_hz > 0.0)) throw ConfigError("doppler: max_freq_hz must be positive");
  if (cfg.max_freq_hz > sample_rate / 2.0 * (1.0 + 1e-12))
    throw ConfigError("doppler: max_freq_hz above Nyquist");

  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  std::vector<double> centered(series.size());
  std::transform(series.begin(), series.end(), centered.begin(), [mean](double x) { return x - mean; });
  const auto power = power_spectrum(centered);

  const auto bins = static_cast<std::size_t>(cfg.num_bins);
  const double resolution = sample_rate / static_cast<double>(series.size());
  const double bin_width = cfg.max_freq_hz / cfg.num_bins;
  std::vector<double> hist(bins, 0.0);
  for (std::size_t m = 0; m < power.size(); ++m) {
    const double f = static_cast<double>(m) * resolution;
    if (f > cfg.max_freq_hz * (1.0 + 1e-12)) break;
    const auto b = std::min(bins - 1, static_cast<std::size_t>(f / bin_width));
    hist[b] += power[m];
  }
  const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
  if (total < kZeroEnergy) {
    std::fill(hist.begin(), hist.end(), 0.0);
  } else {
    for (double& h : hist) h /= total;
  }
  return hist;
}

FeatureVector extract_doppler(const CsiStream& stream, const DopplerConfig& cfg) {
  if (stream.packets() < 8) throw InputError("doppler: stream needs at least 8 packets");
  const auto series = mean_amplitude(stream);
  return {FeatureKind::DopplerEnergy, doppler_histogram(series, stream.packet_rate(), cfg),
          stream.packet_rate()};
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of empty series");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> amp_stats(std::span<const double> series) {
  if (series.size() < 2) throw InputError("amplitude statistics need at least 2 packets");
  const auto n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double var = 0.0;
  double mad = 0.0;
  for (double x : series) {
    var += (x - mean) * (x - mean);
    mad += std::abs(x - mean);
  }
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  return {mean,
          var / n,
          mad / n,
          quantile_sorted(sorted, 0.5),
          quantile_sorted(sorted, 0.25),
          quantile_sorted(sorted, 0.75)};
}

FeatureVector extract_amp_stats(const CsiStream& stream) {
  if (stream.packets() < 2) throw InputError("amplitude statistics need at least 2 packets");
  return {FeatureKind::AmplitudeStats, amp_stats(mean_amplitude(stream)), stream.packet_rate()};
}

FeatureVector extract_feature(FeatureKind kind, const CsiStream& stream, const DopplerConfig& cfg) {
  switch (kind) {
    case FeatureKind::DopplerEnergy:
      return extract_doppler(stream, clip_to_nyquist(cfg, stream.packet_rate()));
    case FeatureKind::AmplitudeStats:
      return extract_amp_stats(stream);
  }
  throw ConfigError("unknown feature kind");
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("pearson: length mismatch");
  if (a.size() < 2) throw InputError("pearson: need at least 2 values");
  // Checked exactly: a rounded mean can leave a constant side with tiny variance.
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(a) || constant(b)) return 0.0;
  const auto n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::string to_csv_row(const FeatureVector& v) {
  std::string row(to_string(v.kind));
  row += ',';
  row += format_double(v.source_rate);
  for (double x : v.values) {
    row += ',';
    row += format_double(x);
  }
  return row;
}

FeatureVector from_csv_row(std::string_view row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = row.find(',', start);
    fields.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() < 3) throw InputError("feature row needs kind, rate and at least one value");
  FeatureVector v;
  v.kind = parse_feature_kind(fields[0]);
  v.source_rate = parse_double(fields[1]);
  for (std::size_t i = 2; i < fields.size(); ++i) v.values.push_back(parse_double(fields[i]));
  return v;
}

}  // namespace isac
