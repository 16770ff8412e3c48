#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace ssgm {

/// 17-significant-digit scientific notation, e.g. "1.0000000000000000e+00".
std::string format_sci17(double value);

/// Writes values separated by commas, terminated by '\n'.
void write_csv_row(std::ostream& os, std::span<const double> values);

}  // namespace ssgm
