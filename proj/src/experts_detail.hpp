#pragma once

#include "isac/experts.hpp"

namespace isac::detail {

struct DatasetShape {
  FeatureKind kind;
  std::size_t dim;
  int num_classes;
};

/// Validates uniform kind/length and label range; throws TrainingError.
DatasetShape check_dataset(const LabeledDataset& data);

/// Throws InputError on kind or length mismatch.
void check_query(FeatureKind kind, std::size_t dim, const FeatureVector& x);

}  // namespace isac::detail
