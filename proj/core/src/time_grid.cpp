#include "ssgm/time_grid.hpp"

#include <cmath>
#include <string>

#include "ssgm/error.hpp"
#include "ssgm/extended_real.hpp"

namespace ssgm {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw DomainError("time grid must contain at least one time");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = times_[i];
    if (!std::isfinite(t) || t < 0.0) {
      throw DomainError("time grid: time " + format_double(t) + " at index " + std::to_string(i) +
                        " is not finite and >= 0");
    }
    if (i > 0 && !(t > times_[i - 1])) {
      throw DomainError("time grid must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

TimeGrid TimeGrid::geometric(double start, double stop, std::size_t points) {
  if (!(start > 0.0 && stop > start) || points < 2) {
    throw DomainError("geometric grid requires 0 < start < stop and >= 2 points");
  }
  std::vector<double> t(points);
  const double ratio = std::log(stop / start) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) t[i] = start * std::exp(ratio * static_cast<double>(i));
  t.front() = start;
  t.back() = stop;
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::linear(double start, double stop, std::size_t points) {
  if (!(start >= 0.0 && stop > start) || points < 2) {
    throw DomainError("linear grid requires 0 <= start < stop and >= 2 points");
  }
  std::vector<double> t(points);
  const double step = (stop - start) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) t[i] = start + step * static_cast<double>(i);
  t.back() = stop;
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::dyadic(std::size_t n) {
  if (n == 0 || (n & (n - 1)) != 0) throw DomainError("dyadic grid requires n a power of two");
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = static_cast<double>(k) / static_cast<double>(n);
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::integers(std::size_t n) {
  if (n == 0) throw DomainError("integer grid requires n >= 1");
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = static_cast<double>(k);
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::parse(std::string_view text) {
  std::vector<std::string> parts;
  auto split = [&](char sep) {
    parts.clear();
    std::size_t pos = 0;
    while (true) {
      const auto next = text.find(sep, pos);
      parts.emplace_back(text.substr(pos, next == std::string_view::npos ? std::string_view::npos
                                                                          : next - pos));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
  };
  auto count = [](const std::string& s) {
    const double v = parse_double(s);
    if (v < 1.0 || v != std::floor(v)) throw DomainError("grid: point count must be a positive integer");
    return static_cast<std::size_t>(v);
  };
  if (text.starts_with("geom:") || text.starts_with("lin:")) {
    split(':');
    if (parts.size() != 4) throw DomainError("grid: expected KIND:START:STOP:POINTS");
    const double a = parse_double(parts[1]);
    const double b = parse_double(parts[2]);
    const std::size_t n = count(parts[3]);
    return parts[0] == "geom" ? geometric(a, b, n) : linear(a, b, n);
  }
  if (text.starts_with("dyadic:")) {
    split(':');
    if (parts.size() != 2) throw DomainError("grid: expected dyadic:N");
    return dyadic(count(parts[1]));
  }
  split(',');
  std::vector<double> t;
  for (const auto& p : parts) t.push_back(parse_double(p));
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::scaled(double a) const {
  if (!(a > 0.0 && std::isfinite(a))) throw DomainError("grid scale must be > 0");
  std::vector<double> t(times_);
  for (double& x : t) x *= a;
  return TimeGrid(std::move(t));
}

}  // namespace ssgm
