// Acceptance suite: one PASS/FAIL line per criterion.
//
//   ssgm_acceptance                 run every criterion
//   ssgm_acceptance --criterion N   run criterion N only
//
// Exit status is 0 iff every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ssgm/ssgm.hpp"
#include "ssgm_cli/app.hpp"

using namespace ssgm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome with_runtime(Outcome o, double seconds, double limit) {
  if (limit > 0 && seconds >= limit) {
    o.pass = false;
    o.detail += "; runtime " + fmt(seconds) + " s exceeds " + fmt(limit) + " s";
  }
  return o;
}

// 1 -------------------------------------------------------------------------
Outcome criterion_forward_suite() {
  Outcome o;
  const auto grid = TimeGrid::geometric(0.05, 5.0, 20);
  const auto fit_grid = TimeGrid::geometric(0.05, 1.0, 20);
  std::vector<double> xs;
  for (int i = 0; i <= 12; ++i) xs.push_back(0.25 * i);
  double doob = 0, mult = 0, gf = 0, dc = 0, dr = 0;
  int cases = 0;
  for (double h : {0.3, 0.5, 0.75, 1.2}) {
    for (double c : {-h, -1.5 * h, -3 * h, -5.0}) {
      const CovKernel k(ProcessSpec::canonical(h, ExtendedReal(c)));
      doob = std::max(doob, doob_residual(k, grid).max);
      mult = std::max(mult, multiplicative_check(k, xs, xs));
      gf = std::max(gf, gf_factorize(k, grid).max_residual);
      const CanonicalFit fit = fit_canonical(k, fit_grid);
      dc = std::max(dc, fit.c.is_finite() ? std::abs(fit.c.value() - c) : INFINITY);
      dr = std::max(dr, std::abs(fit.r11 - k.r11()));
      ++cases;
    }
  }
  o.pass = doob <= 1e-10 && mult <= 1e-10 && gf <= 1e-10 && dc <= 1e-8 && dr <= 1e-10;
  o.detail = std::to_string(cases) + " specs; doob " + fmt(doob) + ", mult " + fmt(mult) + ", gf " + fmt(gf) +
             ", |dc| " + fmt(dc) + ", |dr11| " + fmt(dr);
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome criterion_non_markov() {
  Outcome o;
  const std::vector<ProcessSpec> specs{
      ProcessSpec::fbm(0.25),          ProcessSpec::fbm(0.75),          ProcessSpec::sub_fbm(0.25),
      ProcessSpec::sub_fbm(0.75),      ProcessSpec::bi_fbm(0.25, 0.5),  ProcessSpec::bi_fbm(0.5, 0.5),
      ProcessSpec::bi_fbm(0.75, 0.5),  ProcessSpec::riemann_liouville(0.25),
      ProcessSpec::riemann_liouville(0.75)};
  double weakest = INFINITY;
  std::string weakest_id;
  for (const auto& s : specs) {
    const double r = doob_residual(CovKernel(s), standard_grid()).max;
    if (r < weakest) {
      weakest = r;
      weakest_id = s.to_inline();
    }
  }
  auto r = [](long double s, long double t) { return oracle::fbm(0.75L, s, t); };
  const double ref = static_cast<double>(r(1, 3) * r(2, 2) - r(1, 2) * r(2, 3));
  const double ours = doob_numerator(CovKernel(ProcessSpec::fbm(0.75)), 1, 2, 3);
  const double diff = std::abs(std::abs(ours) - std::abs(ref));
  o.pass = weakest > 1e-3 && diff <= 1e-6 && std::abs(std::abs(ref) - 0.2044) < 1e-4;
  o.detail = "min doob " + fmt(weakest) + " (" + weakest_id + "); fBm(0.75) triple numerator " + fmt(ours) +
             " vs oracle " + fmt(ref) + " (|diff| " + fmt(diff) + ")";
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome criterion_lindstrom() {
  Outcome o;
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> alpha(-2.0, 2.0), sum(-3.0, 0.0), start(0.2, 3.0), ratio(1.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 8);
  double worst = 0;
  for (int draw = 0; draw < 200; ++draw) {
    const int d = dim(gen);
    std::vector<double> t{start(gen)};
    while (static_cast<int>(t.size()) < d) {
      double r = ratio(gen);
      if (r <= 1.0) r = 1.5;
      t.push_back(t.back() * r);
    }
    const double a = alpha(gen);
    const double b = sum(gen) - a;
    worst = std::max(worst, minor_residual(MinorQuery(a, b, TimeGrid(t))));
  }
  bool zero_ok = true;
  for (int d = 2; d <= 8; ++d) {
    zero_ok &= lindstrom_minor(MinorQuery(0.8, -0.8, TimeGrid::geometric(0.5, 0.5 * std::pow(2.0, d - 1), d))) == 0.0;
    zero_ok &= lindstrom_minor(MinorQuery(-1.3, 1.3, TimeGrid::geometric(1.0, 1.5 * d, d))) == 0.0;
  }
  const TimeGrid two({1.0, 2.0});
  const auto rep = psd_check(
      build_gram([](double s, double t) { return alpha_beta_kernel(0.3, 0.2, s, t); }, two));
  bool witness_ok = !rep.psd && rep.witness.has_value();
  if (witness_ok) {
    std::vector<std::vector<oracle::Real>> m(2, std::vector<oracle::Real>(2));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m[i][j] = alpha_beta_kernel(0.3, 0.2, two[i], two[j]);
    const std::vector<oracle::Real> w{(*rep.witness)(0), (*rep.witness)(1)};
    witness_ok = oracle::quadratic_form(m, w) < 0;
  }
  o.pass = worst <= 1e-8 && zero_ok && witness_ok;
  o.detail = "200 draws, worst relative residual " + fmt(worst) + "; alpha+beta=0 exact zero " +
             (zero_ok ? "yes" : "no") + "; alpha+beta=0.5 witness form " + fmt(rep.witness_form);
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome criterion_isometry() {
  Outcome o;
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> t(0.05, 5.0);
  double worst = 0;
  int cases = 0;
  for (int i = 1; i <= 15; ++i) {
    const double h = 0.1 * i;
    for (double c : {-h - 0.01, -2 * h, -5.0}) {
      for (int k = 0; k < 5; ++k) {
        worst = std::max(worst, isometry_residual(h, c, t(gen), t(gen), 1e-12));
        ++cases;
      }
    }
  }
  double brownian = 0;
  for (int k = 0; k < 20; ++k) brownian = std::max(brownian, isometry_residual(0.5, -1.0, t(gen), t(gen), 1e-13));
  o.pass = worst <= 1e-8 && brownian <= 1e-12;
  o.detail = std::to_string(cases) + " cases, worst residual " + fmt(worst) + "; Brownian worst " + fmt(brownian);
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome criterion_sampler_fidelity() {
  Outcome o;
  const double h = 0.7, c = -1.5;
  const auto grid = TimeGrid::geometric(0.1, 2.0, 16);
  const auto emp = empirical_cov(sample_timechange(h, c, grid, 50000, 5150));
  int bad = 0;
  double worst = 0;
  for (Eigen::Index i = 0; i < 16; ++i)
    for (Eigen::Index j = i; j < 16; ++j) {
      const double ref = eval_canonical(h, ExtendedReal(c), grid[i], grid[j]);
      const double z = std::abs(emp.cov(i, j) - ref) / emp.se(i, j);
      worst = std::max(worst, z);
      if (z > 4.0) ++bad;
    }
  const auto ss = selfsim_check(ProcessSpec::canonical(h, ExtendedReal(c)), 2.0, grid, 50000, 5151);
  o.pass = bad <= 2 && ss.max_deviation <= 1.0;
  o.detail = std::to_string(bad) + "/136 entries beyond 4 SE (worst " + fmt(worst) + " SE); self-similarity a=2 " +
             fmt(ss.max_deviation) + " (bound 1)";
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome criterion_asymptotics() {
  Outcome o;
  const auto ug = TimeGrid::geometric(1e3, 1e6, 31);
  const std::vector<double> u(ug.times().begin(), ug.times().end());
  Detail d;
  bool pass = true;
  for (double h : {0.25, 0.4}) {
    const auto r = asym_coeff_estimate(ProcessSpec::riemann_liouville(h), u);
    const double coef = 4 * h / (2 * h + 1), expo = h - 0.5;
    const bool ok = r.fit_ok && std::abs(r.coefficient - coef) <= 0.01 * coef && std::abs(r.exponent - expo) <= 0.02;
    pass &= ok;
    d << "RL(" << h << ") " << fmt(r.coefficient) << "/" << fmt(r.exponent) << (ok ? "" : " [off]") << "; ";
  }
  {
    const auto r = asym_coeff_estimate(ProcessSpec::bi_fbm(0.5, 0.5), u);
    const double coef = std::pow(2.0, -0.5);
    const bool ok = r.fit_ok && std::abs(r.coefficient - coef) <= 0.01 * coef && std::abs(r.exponent + 0.5) <= 0.02;
    pass &= ok;
    d << "bfBm(.5,.5) " << fmt(r.coefficient) << "/" << fmt(r.exponent) << (ok ? "" : " [off]") << "; ";
  }
  {
    const auto r = asym_coeff_estimate(ProcessSpec::sub_fbm(0.25), u);
    const bool ok = r.fit_ok && std::abs(r.exponent + 1.5) <= 0.05;
    pass &= ok;
    d << "sfBm(.25) constant " << fmt(r.constant_term) << ", coefficient " << fmt(r.coefficient) << ", exponent "
      << fmt(r.exponent) << (ok ? "" : " [off]");
  }
  o.pass = pass;
  o.detail = d.str();
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome criterion_trichotomy() {
  Outcome o;
  std::vector<std::size_t> bm_n, fbm_n;
  for (int k = 10; k <= 16; ++k) bm_n.push_back(std::size_t{1} << k);
  for (int k = 6; k <= 11; ++k) fbm_n.push_back(std::size_t{1} << k);
  const auto bm = pvariation_trichotomy(ProcessSpec::canonical(0.5, ExtendedReal(-1.0)), 2.0, bm_n, 64, 7001);
  const auto up = pvariation_trichotomy(ProcessSpec::fbm(0.75), 2.0, fbm_n, 64, 7002);
  const auto down = pvariation_trichotomy(ProcessSpec::fbm(0.25), 2.0, fbm_n, 64, 7003);
  const bool bm_ok = bm.limit_estimate >= 0.95 && bm.limit_estimate <= 1.05 &&
                     bm.verdict == VariationVerdict::FiniteLimit;
  const bool up_ok = up.slope_estimate >= -0.55 && up.slope_estimate <= -0.45 &&
                     up.verdict == VariationVerdict::VanishingTo0;
  const bool down_ok = down.slope_estimate >= 0.45 && down.slope_estimate <= 0.55 &&
                       down.verdict == VariationVerdict::Diverging;
  o.pass = bm_ok && up_ok && down_ok;
  o.detail = "BM mean S_2^16 " + fmt(bm.limit_estimate) + " " + std::string(variation_verdict_name(bm.verdict)) +
             "; fBm(0.75) slope " + fmt(up.slope_estimate) + " " + std::string(variation_verdict_name(up.verdict)) +
             "; fBm(0.25) slope " + fmt(down.slope_estimate) + " " +
             std::string(variation_verdict_name(down.verdict));
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome criterion_quadrature_limits() {
  Outcome o;
  const double h = 0.25;
  const GFunction one = GFunction::constant(1.0);
  const double limit = 1.0 / 3.0;
  std::vector<double> values;
  for (double t : {1e1, 1e2, 1e3, 1e4}) values.push_back(increment_variance(h, 1.0, one, t).value.value);
  bool monotone = true;
  for (std::size_t i = 1; i < values.size(); ++i)
    monotone &= std::abs(values[i] - limit) < std::abs(values[i - 1] - limit);
  const double gap = std::abs(values.back() - limit);
  const double residual = int_limit_residual(1.0, one, 1e4);
  const bool iv_ok = gap <= 0.005 * limit && monotone;
  const bool ilr_ok = std::abs(residual) <= 0.01 / 6.0;
  o.pass = iv_ok && ilr_ok;
  o.detail = "increment_variance(t=10..1e4) = " + fmt(values[0]) + ", " + fmt(values[1]) + ", " + fmt(values[2]) +
             ", " + fmt(values[3]) + " vs limit " + fmt(limit) + " (gap " + fmt(gap) + ", monotone approach " +
             (monotone ? "yes" : "no") + ") " + (iv_ok ? "ok" : "FAILS") + "; int_limit_residual(1e4) = " +
             fmt(residual) + " " + (ilr_ok ? "ok" : "FAILS");
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome criterion_ergodic() {
  Outcome o;
  const auto spec = ProcessSpec::volterra_g(0.25, 1.0, GFunction::constant(1.0));
  const auto r = ergodic_average(spec, ErgodicFunction::square(), 2000, 20, 9001);
  const double target = 1.0 / 3.0;
  o.pass = std::abs(r.average - target) <= 0.1 * target;
  o.detail = "average " + fmt(r.average) + " (SE " + fmt(r.standard_error) + ") vs target " + fmt(target) +
             ", bound " + fmt(0.1 * target);
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome criterion_reproducibility() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ssgm_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> runs{
      {"sample", "--kernel", "canonical:H=0.7,c=-1.5", "--grid", "geom:0.1:2:16", "--paths", "2000", "--seed", "10"},
      {"sample", "--kernel", "fbm:H=0.3", "--grid", "lin:0:1:33", "--paths", "2000", "--seed", "10"},
      {"sample", "--kernel", "volterra-g:H=0.25,beta=1,g=logpow:1", "--grid", "lin:0:4:9", "--paths", "500",
       "--seed", "10"},
      {"variation", "--kernel", "fbm:H=0.75", "--n", "2^6..2^9", "--paths", "64", "--seed", "10"},
      {"kernel-eval", "--kernel", "rl:H=0.25", "--grid", "geom:0.05:5:20"},
  };
  int identical = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::string ref;
    bool same = true;
    for (const char* threads : {"1", "4", "8"}) {
      auto args = runs[k];
      const fs::path out = dir / ("run" + std::to_string(k) + "_" + threads + ".csv");
      args.insert(args.end(), {"--threads", threads, "--csv", out.string()});
      std::ostringstream sink_out, sink_err;
      if (cli::run(args, sink_out, sink_err) != 0) {
        o.pass = false;
        o.detail = "run failed: " + sink_err.str();
        return o;
      }
      std::ifstream in(out, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      if (ref.empty()) ref = ss.str();
      same &= ss.str() == ref && !ref.empty();
    }
    identical += same ? 1 : 0;
  }
  fs::remove_all(dir);
  o.pass = identical == static_cast<int>(runs.size());
  o.detail = std::to_string(identical) + "/" + std::to_string(runs.size()) +
             " CLI runs byte-identical across 1, 4 and 8 workers";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double runtime_limit;  // seconds, 0 = none
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "canonical forward suite", 2.0, criterion_forward_suite},
      {2, "non-Markov suite", 0.0, criterion_non_markov},
      {3, "Lindstrom identity", 1.0, criterion_lindstrom},
      {4, "Volterra isometry", 0.0, criterion_isometry},
      {5, "sampler fidelity", 60.0, criterion_sampler_fidelity},
      {6, "asymptotic coefficients", 0.0, criterion_asymptotics},
      {7, "p-variation trichotomy", 300.0, criterion_trichotomy},
      {8, "increment-variance limits by quadrature", 10.0, criterion_quadrature_limits},
      {9, "ergodic average", 120.0, criterion_ergodic},
      {10, "reproducibility across workers", 0.0, criterion_reproducibility},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  int failures = 0;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o = with_runtime(o, secs, c.runtime_limit);
    std::printf("[%s] criterion %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
