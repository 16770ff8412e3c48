#include <cmath>
#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "oracles.hpp"
#include "ssgm/error.hpp"
#include "ssgm/parallel.hpp"
#include "ssgm/samplers.hpp"

using namespace ssgm;

namespace {

/// Number of upper-triangle entries whose deviation from `ref` exceeds
/// `k` standard errors.
int count_outside(const EmpiricalCov& emp, const std::function<double(double, double)>& ref, double k,
                  double bias = 0.0) {
  int bad = 0;
  const auto& g = emp.grid;
  for (Eigen::Index i = 0; i < emp.cov.rows(); ++i)
    for (Eigen::Index j = i; j < emp.cov.cols(); ++j) {
      const double r = ref(g[i], g[j]);
      if (std::abs(emp.cov(i, j) - r) > k * emp.se(i, j) + bias * std::abs(r)) ++bad;
    }
  return bad;
}

class ThreadGuard {
 public:
  ThreadGuard() : saved_(thread_count()) {}
  ~ThreadGuard() { set_thread_count(saved_); }

 private:
  std::size_t saved_;
};

}  // namespace

TEST(TimeChange, BrownianCovariance) {
  const auto e = sample_timechange(0.5, -1.0, TimeGrid({0.25, 0.5, 1.0, 2.0}), 20000, 1);
  EXPECT_EQ(e.scheme, Scheme::TimeChange);
  EXPECT_EQ(count_outside(empirical_cov(e), [](double s, double t) { return std::min(s, t); }, 4.0), 0);
}

TEST(TimeChange, DegenerateRankOne) {
  const auto grid = TimeGrid({0.3, 1.0, 2.5, 4.0});
  const auto e = sample_timechange(0.7, -0.7, grid, 100, 2);
  for (Eigen::Index p = 0; p < e.n_paths(); ++p) {
    const double w = e.values(p, 0) / std::pow(grid[0], 0.7);
    for (Eigen::Index j = 1; j < 4; ++j) {
      EXPECT_NEAR(e.values(p, j), std::pow(grid[j], 0.7) * w, 1e-14 * std::abs(e.values(p, j)));
    }
  }
  const auto emp = empirical_cov(e);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      EXPECT_NEAR(emp.cov(i, j) / std::sqrt(emp.cov(i, i) * emp.cov(j, j)), 1.0, 1e-12);
}

TEST(TimeChange, CanonicalCovariance) {
  const double h = 0.7, c = -1.5;
  const auto e = sample_timechange(h, c, TimeGrid::geometric(0.1, 2.0, 16), 20000, 3);
  const int bad = count_outside(empirical_cov(e), [&](double s, double t) {
    return eval_canonical(h, ExtendedReal(c), s, t);
  }, 4.0);
  EXPECT_LE(bad, 2);
}

TEST(TimeChange, RejectsInvalidC) {
  EXPECT_THROW(sample_timechange(0.5, -0.4, TimeGrid({1.0}), 10, 1), DomainError);
  EXPECT_THROW(sample_timechange(0.5, -INFINITY, TimeGrid({1.0}), 10, 1), DomainError);
}

TEST(WhiteNoise, VariancesAndIndependence) {
  const double h = 0.6;
  const auto grid = TimeGrid({0.0, 0.5, 1.0, 3.0});
  const auto e = sample_whitenoise(h, grid, 20000, 4);
  EXPECT_TRUE((e.values.col(0).array() == 0.0).all());
  const auto emp = empirical_cov(e);
  EXPECT_LE(count_outside(emp, [&](double s, double t) {
    return s == t ? std::pow(s, 2 * h) : 0.0;
  }, 4.0), 0);
}

TEST(Cholesky, AgreesWithTimeChange) {
  const double h = 0.7, c = -1.5;
  const auto grid = TimeGrid::geometric(0.2, 2.0, 6);
  const auto a = empirical_cov(sample_timechange(h, c, grid, 20000, 5));
  const auto b = empirical_cov(
      sample_cholesky(CovKernel(ProcessSpec::canonical(h, ExtendedReal(c))), grid, 20000, 6));
  int bad = 0;
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = i; j < 6; ++j)
      if (std::abs(a.cov(i, j) - b.cov(i, j)) > 4.0 * std::hypot(a.se(i, j), b.se(i, j))) ++bad;
  EXPECT_LE(bad, 1);
}

TEST(Cholesky, BrownianMatchesMinKernel) {
  const auto e = sample_cholesky(CovKernel(ProcessSpec::fbm(0.5)), TimeGrid({0.0, 0.5, 1.0, 2.0}), 20000, 7);
  EXPECT_TRUE((e.values.col(0).array() == 0.0).all());
  EXPECT_EQ(e.jitter, 0.0);
  EXPECT_EQ(count_outside(empirical_cov(e), [](double s, double t) { return std::min(s, t); }, 4.0), 0);
}

TEST(Cholesky, SubFBmUnitVariance) {
  const auto e = sample_cholesky(CovKernel(ProcessSpec::sub_fbm(0.25)), TimeGrid({0.5, 1.0, 1.5}), 20000, 8);
  const auto emp = empirical_cov(e);
  EXPECT_LE(std::abs(emp.cov(1, 1) - (2.0 - std::pow(2.0, -0.5))), 4.0 * emp.se(1, 1));
}

TEST(Cholesky, DegenerateRankOne) {
  const auto grid = TimeGrid({0.5, 1.0, 2.0, 3.0});
  const auto e = sample_cholesky(CovKernel(ProcessSpec::canonical(0.7, ExtendedReal(-0.7))), grid, 50, 9);
  EXPECT_EQ(e.jitter, 0.0);
  for (Eigen::Index p = 0; p < e.n_paths(); ++p) {
    const double w = e.values(p, 0) / std::pow(grid[0], 0.7);
    for (Eigen::Index j = 1; j < 4; ++j)
      EXPECT_NEAR(e.values(p, j), std::pow(grid[j], 0.7) * w, 1e-10 * (1 + std::abs(e.values(p, j))));
  }
}

TEST(Cholesky, RejectsOversizedGrid) {
  EXPECT_THROW(sample_cholesky(CovKernel(ProcessSpec::fbm(0.5)), TimeGrid::linear(0.001, 1, 5000), 2, 1),
               DomainError);
}

TEST(VolterraZg, BrownianSpecialization) {
  const auto e = sample_volterra_zg(0.5, 0.0, GFunction::constant(1.0), TimeGrid({0.0, 0.5, 1.0, 2.0}),
                                    64, 20000, 10);
  EXPECT_EQ(e.scheme, Scheme::VolterraDiscrete);
  EXPECT_TRUE((e.values.col(0).array() == 0.0).all());
  EXPECT_EQ(count_outside(empirical_cov(e), [](double s, double t) { return std::min(s, t); }, 4.0), 0);
}

TEST(VolterraZg, LinearWeightUnitVariance) {
  const auto e = sample_volterra_zg(0.25, 1.0, GFunction::constant(1.0), TimeGrid({1.0}), 256, 40000, 11);
  const auto emp = empirical_cov(e);
  EXPECT_LE(std::abs(emp.cov(0, 0) - 1.0 / 3.0), 4.0 * emp.se(0, 0));
}

TEST(VolterraZg, LogWeightUnitVarianceMatchesQuadrature) {
  const double target = static_cast<double>(oracle::weight_energy(0.5, 1));
  const int steps = auto_inner_steps(0.5, GFunction::log_pow(1));
  const auto e = sample_volterra_zg(0.3, 0.5, GFunction::log_pow(1), TimeGrid({1.0}), steps, 40000, 12);
  const auto emp = empirical_cov(e);
  EXPECT_LE(std::abs(emp.cov(0, 0) - target), 4.0 * emp.se(0, 0) + 0.01 * target);
}

TEST(VolterraZg, AutoInnerSteps) {
  const int smooth = auto_inner_steps(1.0, GFunction::constant(1.0));
  const int rough = auto_inner_steps(-0.4, GFunction::constant(1.0));
  EXPECT_GE(smooth, 256);
  EXPECT_GE(rough, smooth);
  EXPECT_LE(rough, 1 << 16);
}

TEST(VolterraZg, RejectsTooFewSteps) {
  EXPECT_THROW(sample_volterra_zg(0.3, 1.0, GFunction::constant(1.0), TimeGrid({1.0}), 32, 10, 1),
               DomainError);
}

TEST(VolterraCanonical, MatchesKernel) {
  const double h = 0.6, c = -1.0;
  const auto e = sample_volterra_canonical(h, c, TimeGrid({0.0, 0.3, 1.0, 2.0}), 256, 20000, 13);
  EXPECT_TRUE((e.values.col(0).array() == 0.0).all());
  EXPECT_LE(count_outside(empirical_cov(e), [&](double s, double t) {
    return eval_canonical(h, ExtendedReal(c), s, t);
  }, 4.0, 1e-3), 0);
  EXPECT_THROW(sample_volterra_canonical(h, -h, TimeGrid({1.0}), 256, 10, 1), DomainError);
}

TEST(SampleAuto, ChoosesFamilyScheme) {
  const TimeGrid g({0.5, 1.0});
  EXPECT_EQ(sample_auto(ProcessSpec::canonical(0.5, ExtendedReal(-1)), g, 4, 1).scheme, Scheme::TimeChange);
  EXPECT_EQ(sample_auto(ProcessSpec::white_noise(0.5), g, 4, 1).scheme, Scheme::WhiteNoise);
  EXPECT_EQ(sample_auto(ProcessSpec::fbm(0.3), g, 4, 1).scheme, Scheme::Cholesky);
  const auto v = sample_auto(ProcessSpec::volterra_g(0.3, -0.2, GFunction::constant(1)), g, 4, 1);
  EXPECT_EQ(v.scheme, Scheme::VolterraDiscrete);
  EXPECT_FALSE(v.proven_regime);
}

TEST(EmpiricalCov, SymmetricWithNonNegativeSe) {
  const auto emp = empirical_cov(sample_cholesky(CovKernel(ProcessSpec::riemann_liouville(0.3)),
                                                 TimeGrid::geometric(0.1, 2, 7), 500, 14));
  EXPECT_EQ(emp.cov, emp.cov.transpose());
  EXPECT_TRUE((emp.se.array() >= 0.0).all());
  EXPECT_EQ(emp.n_paths, 500);
  EXPECT_THROW(empirical_cov(sample_whitenoise(0.5, TimeGrid({1.0}), 1, 1)), DomainError);
}

TEST(SelfSimilarity, Checks) {
  const auto grid = TimeGrid::geometric(0.2, 2.0, 6);
  EXPECT_LE(selfsim_check(ProcessSpec::canonical(0.6, ExtendedReal(-1.0)), 1.0, grid, 20000, 15).max_deviation, 1.0);
  EXPECT_LE(selfsim_check(ProcessSpec::canonical(0.6, ExtendedReal(-1.0)), 2.0, grid, 20000, 16).max_deviation, 1.0);
  EXPECT_LE(selfsim_check(ProcessSpec::fbm(0.75), 3.0, grid, 20000, 17).max_deviation, 1.0);
  EXPECT_THROW(selfsim_check(ProcessSpec::fbm(0.75), 0.0, grid, 10, 1), DomainError);
}

TEST(Determinism, IndependentOfWorkerCount) {
  ThreadGuard guard;
  const auto grid = TimeGrid({0.0, 0.25, 0.5, 1.0});
  auto run_all = [&] {
    return std::vector<Eigen::MatrixXd>{
        sample_timechange(0.7, -1.5, grid, 300, 21).values,
        sample_whitenoise(0.4, grid, 300, 21).values,
        sample_cholesky(CovKernel(ProcessSpec::fbm(0.3)), grid, 300, 21).values,
        sample_volterra_zg(0.25, 1.0, GFunction::log_pow(1), grid, 64, 300, 21).values,
        sample_volterra_canonical(0.6, -1.0, grid, 64, 300, 21).values,
    };
  };
  set_thread_count(1);
  const auto ref = run_all();
  for (std::size_t threads : {4u, 8u}) {
    set_thread_count(threads);
    const auto got = run_all();
    for (std::size_t k = 0; k < ref.size(); ++k) {
      ASSERT_EQ(got[k].size(), ref[k].size());
      EXPECT_EQ(std::memcmp(got[k].data(), ref[k].data(), sizeof(double) * ref[k].size()), 0)
          << "scheme " << k << " threads " << threads;
    }
  }
}

TEST(Determinism, SeedsDiffer) {
  const auto a = sample_timechange(0.5, -1, TimeGrid({1.0}), 10, 1).values;
  const auto b = sample_timechange(0.5, -1, TimeGrid({1.0}), 10, 2).values;
  EXPECT_NE(a, b);
}

TEST(EnsembleIo, BinaryLayout) {
  const auto e = sample_whitenoise(0.5, TimeGrid({1.0, 2.0, 3.0}), 4, 30);
  std::ostringstream os;
  write_ensemble_binary(os, e);
  const std::string bytes = os.str();
  ASSERT_EQ(bytes.size(), 4u * 3u * sizeof(double));
  for (Eigen::Index j = 0; j < 3; ++j)
    for (Eigen::Index p = 0; p < 4; ++p) {
      double v;
      std::memcpy(&v, bytes.data() + sizeof(double) * static_cast<std::size_t>(j * 4 + p), sizeof v);
      EXPECT_EQ(v, e.values(p, j));
    }
}

TEST(EnsembleIo, SidecarJson) {
  const auto e = sample_volterra_zg(0.25, 1.0, GFunction::constant(1.0), TimeGrid({0.5, 1.0}), 64, 3, 31);
  const auto j = nlohmann::json::parse(ensemble_sidecar_json(e));
  EXPECT_EQ(j.at("schema_version"), "1");
  EXPECT_EQ(j.at("scheme"), "volterra");
  EXPECT_EQ(j.at("seed"), 31u);
  EXPECT_EQ(j.at("n_paths"), 3);
  EXPECT_EQ(j.at("n_times"), 2);
  EXPECT_EQ(j.at("inner_steps"), 64);
  EXPECT_EQ(j.at("family"), "volterra-g");
  EXPECT_EQ(j.at("layout"), "column-major");
  EXPECT_EQ(j.at("grid").size(), 2u);
}

TEST(EnsembleIo, Csv) {
  const auto e = sample_whitenoise(0.5, TimeGrid({0.0, 1.0}), 2, 32);
  std::ostringstream os;
  write_ensemble_csv(os, e);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("0.0000000000000000e+00,1.0000000000000000e+00\n0.0000000000000000e+00,", 0), 0u) << s;
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}
