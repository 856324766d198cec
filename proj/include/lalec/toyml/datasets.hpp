#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lalec/operator.hpp"

namespace lalec::toyml {

/// kind is "blobs", "xor" or "moonsApprox"; n >= 8. Deterministic per
/// (kind, n, seed).
LabeledDataset synth_dataset(const std::string& kind, std::size_t n, std::uint64_t seed);

/// Header row required; all columns except `label_column` must be numeric.
/// Labels map to class ids in sorted order of their distinct text values.
/// Throws Error(BadCsv) or Error(LabelColumnMissing).
LabeledDataset load_csv(const std::string& path, const std::string& label_column);
LabeledDataset parse_csv(const std::string& text, const std::string& label_column);

/// Stratified: the train part holds round(fraction * n) rows, and each
/// class within one row of its proportional share.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& ds,
                                                           double fraction,
                                                           std::uint64_t seed);

/// Seeded stratified partition of row indices into k folds.
std::vector<std::vector<std::size_t>> stratified_folds(const LabeledDataset& ds, std::size_t k,
                                                       std::uint64_t seed);

/// Correct predictions over all held-out rows divided by n. A trained,
/// frozen operator is scored as is on every fold.
double cross_val_score(const Operator& op, const LabeledDataset& ds, std::size_t k,
                       std::uint64_t seed);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace lalec::toyml
