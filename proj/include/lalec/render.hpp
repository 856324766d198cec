#pragma once

#include <string>

#include "lalec/operator.hpp"

namespace lalec {

/// Graphviz digraph of an operator. Individuals are boxes whose `class`
/// attribute names the lifecycle state (planned, trainable, trained) with a
/// matching fillcolor (white, lightblue, palegreen). Choices become dashed
/// clusters; edges into or out of a composite step attach to every entry or
/// exit node inside it.
std::string render_dot(const Operator& op);

}  // namespace lalec
