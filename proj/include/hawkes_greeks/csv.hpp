#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hawkes_greeks {

/// Shortest round-trip decimal text, so output bytes depend only on the value.
std::string format_double(double v);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace hawkes_greeks
