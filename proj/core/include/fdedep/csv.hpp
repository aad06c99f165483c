#pragma once

#include "fdedep/sampled_fn.hpp"

#include <iosfwd>
#include <string>

namespace fdedep {

/// Writes `t, x1, ..., xN` followed by one row per node, 17 significant digits.
void write_csv(std::ostream& out, const SampledFn& fn);
std::string to_csv(const SampledFn& fn);

/// Inverse of write_csv. Throws InvalidArgument on malformed input or a non-uniform grid.
SampledFn read_csv(std::istream& in);
SampledFn from_csv(const std::string& text);

} // namespace fdedep
