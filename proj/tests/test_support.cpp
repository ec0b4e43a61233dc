#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "oracles.hpp"

namespace oracle {

std::vector<double> knn_posterior(const isac::LabeledDataset& data, int k, const std::vector<double>& query) {
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      const double diff = data.features[i].values[j] - query[j];
      d2 += diff * diff;
    }
    order.emplace_back(std::sqrt(d2), i);
  }
  std::sort(order.begin(), order.end());
  std::vector<double> probs(static_cast<std::size_t>(data.num_classes), 0.0);
  for (int i = 0; i < k; ++i) probs[static_cast<std::size_t>(data.labels[order[static_cast<std::size_t>(i)].second])] += 1.0;
  for (double& p : probs) p /= k;
  return probs;
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double num = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0 || vb == 0) return 0.0;
  return static_cast<double>(num / std::sqrt(va * vb));
}

double max_class_pearson(const std::vector<double>& x, const std::map<int, std::vector<double>>& centroids) {
  double best = -2.0;
  for (const auto& [c, v] : centroids) best = std::max(best, pearson(x, v));
  return best;
}

std::vector<double> dft_power(std::span<const double> series) {
  const std::size_t n = series.size();
  std::vector<double> out(n / 2 + 1);
  for (std::size_t m = 0; m < out.size(); ++m) {
    long double re = 0, im = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * m * t / n;
      re += series[t] * std::cos(ang);
      im += series[t] * std::sin(ang);
    }
    out[m] = static_cast<double>(re * re + im * im);
  }
  return out;
}

std::vector<double> mean_amplitude(const isac::CsiStream& s) {
  std::vector<double> out(s.packets(), 0.0);
  for (std::size_t n = 0; n < s.packets(); ++n) {
    for (std::size_t k = 0; k < s.subcarriers(); ++k) out[n] += std::abs(s.at(n, k));
    out[n] /= static_cast<double>(s.subcarriers());
  }
  return out;
}

double spectral_peak_hz(const isac::CsiStream& s) {
  auto series = oracle::mean_amplitude(s);
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  for (double& v : series) v -= mean;
  const auto power = dft_power(series);
  const auto peak = std::max_element(power.begin() + 1, power.end()) - power.begin();
  return static_cast<double>(peak) * s.packet_rate() / static_cast<double>(series.size());
}

}  // namespace oracle
