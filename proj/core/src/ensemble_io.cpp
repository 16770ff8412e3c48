#include <bit>
#include <cstring>
#include <ostream>
#include <vector>

#include "json.hpp"

#include "ssgm/csv.hpp"
#include "ssgm/samplers.hpp"
#include "ssgm/ssgm.hpp"

namespace ssgm {

void write_ensemble_binary(std::ostream& os, const PathEnsemble& ensemble) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  const Eigen::MatrixXd& v = ensemble.values;  // Eigen default storage is column-major
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * static_cast<Eigen::Index>(sizeof(double))));
}

std::string ensemble_sidecar_json(const PathEnsemble& ensemble) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "ensemble";
  j["spec"] = ensemble.spec.to_inline();
  j["family"] = std::string(family_name(ensemble.spec.family()));
  j["parameters"] = ensemble.spec.parameters();
  std::vector<double> times(ensemble.grid.times().begin(), ensemble.grid.times().end());
  j["grid"] = times;
  j["seed"] = ensemble.seed;
  j["scheme"] = std::string(scheme_name(ensemble.scheme));
  j["inner_steps"] = ensemble.inner_steps;
  j["jitter"] = ensemble.jitter;
  j["proven_regime"] = ensemble.proven_regime;
  j["n_paths"] = ensemble.n_paths();
  j["n_times"] = ensemble.values.cols();
  j["dtype"] = "float64-le";
  j["layout"] = "column-major";
  return j.dump(2);
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble) {
  write_csv_row(os, ensemble.grid.times());
  std::vector<double> row(static_cast<std::size_t>(ensemble.values.cols()));
  for (Eigen::Index p = 0; p < ensemble.n_paths(); ++p) {
    for (Eigen::Index j = 0; j < ensemble.values.cols(); ++j)
      row[static_cast<std::size_t>(j)] = ensemble.values(p, j);
    write_csv_row(os, row);
  }
}

}  // namespace ssgm
