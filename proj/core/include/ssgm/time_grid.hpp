#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ssgm {

/// Strictly increasing, non-negative, non-empty sequence of sample times.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  /// `points` geometrically spaced times from start to stop inclusive.
  static TimeGrid geometric(double start, double stop, std::size_t points);
  /// `points` equally spaced times from start to stop inclusive.
  static TimeGrid linear(double start, double stop, std::size_t points);
  /// {k/n : k = 0..n}.
  static TimeGrid dyadic(std::size_t n);
  /// {0, 1, ..., n}.
  static TimeGrid integers(std::size_t n);

  /// "geom:START:STOP:POINTS", "lin:START:STOP:POINTS", "dyadic:N" or a
  /// comma separated list of times.
  static TimeGrid parse(std::string_view text);

  std::span<const double> times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  bool has_zero() const { return times_.front() == 0.0; }

  TimeGrid scaled(double a) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

}  // namespace ssgm
