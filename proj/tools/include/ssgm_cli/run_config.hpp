#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssgm/markov.hpp"
#include "ssgm/process_spec.hpp"
#include "ssgm/samplers.hpp"
#include "ssgm/time_grid.hpp"

namespace ssgm::cli {

/// Grid block: an explicit list or one of the generated grids.
struct GridConfig {
  enum class Kind { List, Geometric, Linear, Dyadic };
  Kind kind = Kind::List;
  std::vector<double> times;
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 0;  // Geometric, Linear; n for Dyadic

  TimeGrid build() const;
  /// Accepts the TimeGrid::parse syntax.
  static GridConfig parse(std::string_view text);

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct RunConfig {
  // [process]
  std::optional<ProcessSpec> process;
  // [grid]
  std::optional<GridConfig> grid;
  // [mc]
  std::optional<std::uint64_t> seed;
  std::size_t n_paths = 1000;
  int inner_steps = 0;
  std::optional<Scheme> scheme;
  // [tolerances]
  double psd_tol = 1e-10;
  MarkovThresholds markov;
  // [variation]
  double p = 2.0;
  std::vector<std::size_t> n_list;
  // [minor]
  std::optional<double> alpha;
  std::optional<double> beta;
  // [asym]
  double asym_alpha = 0.5;
  std::optional<GridConfig> u_grid;
  // [output]
  std::string csv;
  std::string json;
  std::string bin;

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

/// Named-block text format:
///
///   [process]
///   family = canonical
///   H = 0.7
///   c = -inf
///
/// Blank lines and lines starting with '#' are ignored. Unknown blocks or
/// keys raise DomainError naming the offending line.
RunConfig parse_config(std::string_view text);
std::string serialize_config(const RunConfig& config);
RunConfig load_config(const std::string& path);

/// "2^10..2^16" or a comma separated list of integers.
std::vector<std::size_t> parse_n_list(std::string_view text);

}  // namespace ssgm::cli
