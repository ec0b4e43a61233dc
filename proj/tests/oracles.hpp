#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They trade speed for obviousness and share no code with the library.

#include <map>
#include <span>
#include <vector>

#include "isac/csi.hpp"
#include "isac/experts.hpp"
#include "isac/features.hpp"

namespace oracle {

/// Sort every (distance, index) pair, take the first k, count votes.
std::vector<double> knn_posterior(const isac::LabeledDataset& data, int k, const std::vector<double>& query);

/// Sorts a copy, then interpolates at h = (n - 1) p.
double quantile(std::vector<double> values, double p);

/// Textbook definition in long double; 0 for a constant side.
double pearson(std::span<const double> a, std::span<const double> b);

double max_class_pearson(const std::vector<double>& x, const std::map<int, std::vector<double>>& centroids);

/// O(N^2) DFT power |X_m|^2 for m = 0..N/2.
std::vector<double> dft_power(std::span<const double> series);

/// Subcarrier-averaged |H| computed directly from the samples.
std::vector<double> mean_amplitude(const isac::CsiStream& s);

/// Frequency (Hz) of the largest DFT bin above DC of the mean-removed series.
double spectral_peak_hz(const isac::CsiStream& s);

}  // namespace oracle
