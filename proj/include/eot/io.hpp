#pragma once

#include <string>

#include "eot/measure.hpp"

namespace eot {

// Parses a discrete measure from text: one atom per line as
//   weight x_1 ... x_d
// with whitespace separation, '#' starting a comment, and a constant column
// count. Weights are normalized by make_measure. Errors carry line numbers.
Measure measure_from_text(const std::string& text, const std::string& origin = "<input>");

// File wrapper around measure_from_text; throws parse_error if unreadable.
Measure read_measure(const std::string& path);

}  // namespace eot
