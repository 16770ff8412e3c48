#include "ssgm/extended_real.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "ssgm/error.hpp"

namespace ssgm {

double ExtendedReal::value() const {
  if (!finite_) throw DomainError("value() called on -inf");
  return value_;
}

std::string ExtendedReal::to_string() const {
  return finite_ ? format_double(value_) : std::string("-inf");
}

ExtendedReal ExtendedReal::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "-inf" || lower == "-infinity") return negative_infinity();
  return ExtendedReal(parse_double(text));
}

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw DomainError("not a number: '" + std::string(text) + "'");
  }
  if (!std::isfinite(out)) throw DomainError("non-finite number: '" + std::string(text) + "'");
  return out;
}

}  // namespace ssgm
