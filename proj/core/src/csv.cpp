#include "ssgm/csv.hpp"

#include <cstdio>
#include <ostream>

namespace ssgm {

std::string format_sci17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

void write_csv_row(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << format_sci17(values[i]);
  }
  os << '\n';
}

}  // namespace ssgm
