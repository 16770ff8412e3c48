#pragma once

#include <string>

#include "ssgm/csv.hpp"
#include "ssgm/error.hpp"
#include "ssgm/extended_real.hpp"
#include "ssgm/fitting.hpp"
#include "ssgm/gram.hpp"
#include "ssgm/kernels.hpp"
#include "ssgm/markov.hpp"
#include "ssgm/parallel.hpp"
#include "ssgm/process_spec.hpp"
#include "ssgm/quadrature.hpp"
#include "ssgm/samplers.hpp"
#include "ssgm/time_grid.hpp"
#include "ssgm/variation.hpp"

namespace ssgm {

/// Version string embedded in every JSON report.
inline constexpr const char* kReportSchemaVersion = "1";

inline std::string report_schema_version() { return kReportSchemaVersion; }

}  // namespace ssgm
