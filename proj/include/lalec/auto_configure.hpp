#pragma once

#include "lalec/optimizer.hpp"

namespace lalec {

struct AutoConfigureOptions {
  OptimizerSpec search;
  std::size_t folds = 5;
  CompileOptions compile;
  std::size_t cont_samples = 1;  // grid strategy only
};

struct AutoConfigureResult {
  Operator best;     // trainable: the decoded best point
  Operator trained;  // `best` fit on all of the data
  History history;
};

/// Compiles `planned`, searches it with k-fold CV loss, and refits the best
/// point on the whole dataset. Throws Error(NoValidTrial).
AutoConfigureResult auto_configure(const Operator& planned, const LabeledDataset& data,
                                   const AutoConfigureOptions& options = {});

}  // namespace lalec
