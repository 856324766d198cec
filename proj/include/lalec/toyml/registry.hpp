#pragma once

#include <string>

#include "lalec/operator.hpp"

namespace lalec::toyml {

/// Loads every `<Name>.schema.json` in `dir` as a planned operator bound to
/// its built-in implementation (if any). Also registers the aliases Scaler
/// (StandardScaler) and ConcatFeatures (Concat).
Registry load_registry(const std::string& dir);

/// `explicit_dir` if non-empty, else $LALEC_SCHEMA_PATH, else "schemas".
std::string schema_dir(const std::string& explicit_dir = {});

}  // namespace lalec::toyml
