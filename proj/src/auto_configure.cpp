#include "lalec/auto_configure.hpp"

#include "lalec/error.hpp"

namespace lalec {

AutoConfigureResult auto_configure(const Operator& planned, const LabeledDataset& data,
                                   const AutoConfigureOptions& options) {
  auto ir = combine(planned, options.compile);
  auto objective = make_cv_objective(ir, data, options.folds, options.search.seed);
  History h = run_search(*ir, objective, options.search, options.cont_samples);
  if (!h.best) {
    throw Error(ErrorCode::NoValidTrial,
                "none of the " + std::to_string(h.trials.size()) + " trials succeeded");
  }
  Operator best = decode(*ir, h.trials[*h.best].point);
  Operator trained = fit(best, data, {options.search.seed});
  return {std::move(best), std::move(trained), std::move(h)};
}

}  // namespace lalec
