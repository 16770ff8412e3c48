#include "ssgm_cli/app.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssgm/ssgm.hpp"
#include "ssgm_cli/run_config.hpp"

namespace ssgm::cli {
namespace {

using Json = nlohmann::ordered_json;

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json extended(const ExtendedReal& x) {
  return x.is_finite() ? Json(x.value()) : Json(x.to_string());
}

Json times_json(const TimeGrid& g) {
  Json a = Json::array();
  for (double t : g.times()) a.push_back(number(t));
  return a;
}

Json with_header(const std::string& kind) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = kind;
  return j;
}

std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
  if (!os) throw DomainError("cannot open output file '" + path + "'");
  return os;
}

void write_json(const std::string& path, const Json& j) {
  if (path.empty()) return;
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

struct Flags {
  std::string config, kernel, grid, seed, scheme, n, u, csv, json, bin, dump_config;
  std::size_t paths = 0, threads = 0;
  int inner_steps = 0;
  double p = 0, alpha = 0, beta = 0, asym_alpha = 0, psd_tol = 0;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Run configuration file");
  sub->add_option("--kernel,--spec", f.kernel, "Process spec, e.g. canonical:H=0.7,c=-0.9");
  sub->add_option("--grid", f.grid, "geom:A:B:N, lin:A:B:N, dyadic:N or t1,t2,...");
  sub->add_option("--seed", f.seed, "64-bit seed (required for stochastic runs)");
  sub->add_option("--paths", f.paths, "Number of sample paths");
  sub->add_option("--inner-steps", f.inner_steps, "Volterra cells per unit time (0 = auto)");
  sub->add_option("--scheme", f.scheme, "timechange, cholesky, volterra or whitenoise");
  sub->add_option("--p", f.p, "Variation exponent");
  sub->add_option("--n", f.n, "Dyadic levels, e.g. 2^10..2^16");
  sub->add_option("--alpha", f.alpha, "alpha of the (alpha, beta) kernel");
  sub->add_option("--beta", f.beta, "beta of the (alpha, beta) kernel");
  sub->add_option("--asym-alpha", f.asym_alpha, "Exponent alpha in (0,1) of l(t^{1-alpha} - 1)");
  sub->add_option("--u", f.u, "u grid for asym, e.g. geom:1e3:1e6:31");
  sub->add_option("--psd-tol", f.psd_tol, "Relative pivot tolerance for posdef");
  sub->add_option("--csv", f.csv, "CSV output path");
  sub->add_option("--json", f.json, "JSON report path");
  sub->add_option("--bin", f.bin, "Binary ensemble path (sidecar at PATH.json)");
  sub->add_option("--threads", f.threads, "Worker cap (falls back to SSGM_THREADS)");
  sub->add_option("--dump-config", f.dump_config, "Write the effective configuration");
}

RunConfig effective_config(CLI::App* sub, const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  auto given = [&](const char* name) { return sub->get_option(name)->count() > 0; };
  if (given("--kernel")) c.process = ProcessSpec::parse_inline(f.kernel);
  if (given("--grid")) c.grid = GridConfig::parse(f.grid);
  if (given("--seed")) {
    RunConfig tmp = parse_config("[mc]\nseed = " + f.seed + "\n");
    c.seed = tmp.seed;
  }
  if (given("--paths")) c.n_paths = f.paths;
  if (given("--inner-steps")) c.inner_steps = f.inner_steps;
  if (given("--scheme")) c.scheme = parse_scheme(f.scheme);
  if (given("--p")) c.p = f.p;
  if (given("--n")) c.n_list = parse_n_list(f.n);
  if (given("--alpha")) c.alpha = f.alpha;
  if (given("--beta")) c.beta = f.beta;
  if (given("--asym-alpha")) c.asym_alpha = f.asym_alpha;
  if (given("--u")) c.u_grid = GridConfig::parse(f.u);
  if (given("--psd-tol")) c.psd_tol = f.psd_tol;
  if (given("--csv")) c.csv = f.csv;
  if (given("--json")) c.json = f.json;
  if (given("--bin")) c.bin = f.bin;
  return c;
}

const ProcessSpec& require_process(const RunConfig& c) {
  if (!c.process) throw DomainError("a process is required (--kernel or [process])");
  return *c.process;
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw DomainError("a seed is required for stochastic runs (--seed or [mc] seed)");
  return *c.seed;
}

TimeGrid grid_or(const RunConfig& c, const TimeGrid& fallback) {
  return c.grid ? c.grid->build() : fallback;
}

Json asym_json(const AsymReport& r) {
  Json j;
  j["kernel"] = r.kernel;
  j["alpha"] = r.alpha;
  j["constant_term"] = number(r.constant_term);
  j["coefficient"] = number(r.coefficient);
  j["exponent"] = number(r.exponent);
  j["fit_residual"] = number(r.fit_residual);
  j["fit_ok"] = r.fit_ok;
  if (!r.note.empty()) j["note"] = r.note;
  if (r.two_term_residual) {
    j["two_term_residual"] = number(*r.two_term_residual);
    j["two_power_flag"] = r.two_power_flag;
  }
  if (r.zero_profile) j["zero_profile"] = true;
  if (r.implied_c) j["implied_c"] = number(*r.implied_c);
  if (r.predicted_coefficient) {
    j["predicted"] = {{"constant", number(*r.predicted_constant)},
                      {"coefficient", number(*r.predicted_coefficient)},
                      {"exponent", number(*r.predicted_exponent)}};
  }
  if (r.t_exponent) j["t_exponent"] = number(*r.t_exponent);
  if (r.power_law_consistent) j["power_law_consistent"] = *r.power_law_consistent;
  return j;
}

int cmd_kernel_eval(const RunConfig& c, std::ostream& out) {
  const CovKernel kernel(require_process(c));
  const GramMatrix gram = build_gram(kernel, grid_or(c, standard_grid()));
  if (!c.csv.empty()) {
    auto os = open_output(c.csv);
    write_gram_csv(os, gram);
  }
  Json j = with_header("kernel-eval");
  j["kernel"] = kernel.id();
  j["r11"] = number(kernel.r11());
  j["grid"] = times_json(gram.grid);
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < gram.entries.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < gram.entries.cols(); ++k) row.push_back(number(gram.entries(i, k)));
    rows.push_back(row);
  }
  j["gram"] = rows;
  write_json(c.json, j);
  out << "kernel-eval " << kernel.id() << " d=" << gram.grid.size()
      << " R(1,1)=" << format_double(kernel.r11()) << '\n';
  return kExitOk;
}

int cmd_posdef(const RunConfig& c, std::ostream& out) {
  const TimeGrid grid = grid_or(c, standard_grid());
  std::string id;
  GramMatrix gram{grid, {}};
  Json minor;
  if (c.alpha || c.beta) {
    if (!(c.alpha && c.beta)) throw DomainError("posdef: --alpha and --beta go together");
    const MinorQuery q(*c.alpha, *c.beta, grid);
    id = "minor:alpha=" + format_double(*c.alpha) + ",beta=" + format_double(*c.beta);
    gram = build_gram([&](double s, double t) { return alpha_beta_kernel(q.alpha(), q.beta(), s, t); },
                      grid);
    minor["lindstrom"] = number(lindstrom_minor(q));
    minor["direct"] = number(direct_determinant(gram.entries));
    if (grid.size() <= 12) minor["residual"] = number(minor_residual(q));
  } else {
    const CovKernel kernel(require_process(c));
    id = kernel.id();
    gram = build_gram(kernel, grid);
  }
  const PosDefReport rep = psd_check(gram, c.psd_tol);
  if (!c.csv.empty()) {
    auto os = open_output(c.csv);
    write_gram_csv(os, gram);
  }
  Json j = with_header("posdef");
  j["kernel"] = id;
  j["grid"] = times_json(grid);
  j["tol"] = c.psd_tol;
  j["verdict"] = rep.psd ? "PSD" : "NotPSD";
  j["min_eigenvalue"] = number(rep.min_eigenvalue);
  j["min_pivot"] = number(rep.min_pivot);
  if (rep.witness) {
    Json w = Json::array();
    for (Eigen::Index i = 0; i < rep.witness->size(); ++i) w.push_back(number((*rep.witness)(i)));
    j["witness"] = w;
    j["witness_form"] = number(rep.witness_form);
  } else {
    j["witness"] = nullptr;
  }
  if (!minor.is_null()) j["minor"] = minor;
  write_json(c.json, j);
  out << "posdef " << id << " verdict=" << (rep.psd ? "PSD" : "NotPSD")
      << " min_eigenvalue=" << format_double(rep.min_eigenvalue);
  if (rep.witness) out << " witness_form=" << format_double(rep.witness_form);
  out << '\n';
  return kExitOk;
}

int cmd_markov(const RunConfig& c, std::ostream& out) {
  const CovKernel kernel(require_process(c));
  const TimeGrid grid = grid_or(c, standard_grid());
  const MarkovReport rep = markov_test(kernel, grid, c.markov);
  Json j = with_header("markov-test");
  j["kernel"] = rep.kernel;
  j["verdict"] = verdict_name(rep.verdict);
  j["grid"] = times_json(grid);
  j["thresholds"] = {{"markov", c.markov.markov},
                     {"not_markov", c.markov.not_markov},
                     {"c_slack", c.markov.c_slack}};
  j["doob"] = {{"max", number(rep.doob.max)}, {"mean", number(rep.doob.mean)},
               {"triples", rep.doob.triples}};
  if (rep.fit) {
    j["fit"] = {{"r11", number(rep.fit->r11)}, {"c", extended(rep.fit->c)},
                {"residual", number(rep.fit->regression_residual)}};
  } else {
    j["fit"] = {{"error", rep.fit_error}};
  }
  j["mult_residual"] = number(rep.mult_residual);
  if (rep.factorization) {
    j["factorization"] = {{"residual", number(rep.factorization->max_residual)},
                          {"ratio_nondecreasing", rep.factorization->ratio_nondecreasing}};
  } else {
    j["factorization"] = {{"error", rep.factorization_error}};
  }
  j["asym"] = rep.profile ? asym_json(*rep.profile) : Json(nullptr);
  j["seed"] = "n/a";
  write_json(c.json, j);
  if (!c.csv.empty() && rep.factorization) {
    auto os = open_output(c.csv);
    os << "t,G,F\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double row[] = {grid[i], rep.factorization->g_values[i], rep.factorization->f_values[i]};
      write_csv_row(os, row);
    }
  }
  out << "markov-test " << rep.kernel << " verdict=" << verdict_name(rep.verdict)
      << " doob_max=" << format_double(rep.doob.max) << '\n';
  return kExitOk;
}

PathEnsemble draw(const RunConfig& c, const ProcessSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(c.n_paths);
  const ProcessSpec s = spec.normalized();
  if (!c.scheme) return sample_auto(s, grid, n, seed, c.inner_steps);
  switch (*c.scheme) {
    case Scheme::TimeChange:
      if (s.family() != Family::CanonicalMarkov) throw DomainError("timechange needs a canonical spec");
      return sample_timechange(s.hurst(), s.c().value(), grid, n, seed);
    case Scheme::WhiteNoise:
      if (s.family() != Family::WhiteNoise) throw DomainError("whitenoise needs c = -inf");
      return sample_whitenoise(s.hurst(), grid, n, seed);
    case Scheme::VolterraDiscrete:
      if (s.family() == Family::VolterraG) {
        return sample_volterra_zg(s.hurst(), s.beta(), s.g(), grid, c.inner_steps, n, seed);
      }
      if (s.family() == Family::CanonicalMarkov) {
        return sample_volterra_canonical(s.hurst(), s.c().value(), grid, c.inner_steps, n, seed);
      }
      throw DomainError("volterra scheme needs a canonical or volterra-g spec");
    case Scheme::Cholesky:
      return sample_cholesky(CovKernel(s), grid, n, seed);
  }
  throw DomainError("unknown scheme");
}

int cmd_sample(const RunConfig& c, std::ostream& out) {
  const ProcessSpec& spec = require_process(c);
  const std::uint64_t seed = require_seed(c);
  if (!c.grid) throw DomainError("sample: a grid is required (--grid or [grid])");
  const PathEnsemble ens = draw(c, spec, c.grid->build(), seed);
  if (!c.csv.empty()) {
    auto os = open_output(c.csv);
    write_ensemble_csv(os, ens);
  }
  if (!c.bin.empty()) {
    auto os = open_output(c.bin, true);
    write_ensemble_binary(os, ens);
    auto side = open_output(c.bin + ".json");
    side << ensemble_sidecar_json(ens) << '\n';
  }
  if (!c.json.empty()) {
    Json j = Json::parse(ensemble_sidecar_json(ens));
    j["kind"] = "sample";
    if (ens.n_paths() >= 2) {
      const EmpiricalCov ec = empirical_cov(ens);
      Json var = Json::array(), se = Json::array();
      for (Eigen::Index i = 0; i < ec.cov.rows(); ++i) {
        var.push_back(number(ec.cov(i, i)));
        se.push_back(number(ec.se(i, i)));
      }
      j["empirical_variance"] = var;
      j["empirical_variance_se"] = se;
    }
    write_json(c.json, j);
  }
  out << "sample " << ens.spec.to_inline() << " scheme=" << scheme_name(ens.scheme)
      << " paths=" << ens.n_paths() << " d=" << ens.grid.size()
      << " jitter=" << format_double(ens.jitter)
      << (ens.proven_regime ? "" : " regime=unproven") << '\n';
  return kExitOk;
}

int cmd_variation(const RunConfig& c, std::ostream& out) {
  const ProcessSpec& spec = require_process(c);
  const std::uint64_t seed = require_seed(c);
  const std::vector<std::size_t> n_list = c.n_list.empty() ? parse_n_list("2^8..2^12") : c.n_list;
  const VariationReport rep = pvariation_trichotomy(spec, c.p, n_list, c.n_paths, seed);
  if (!c.csv.empty()) {
    auto os = open_output(c.csv);
    os << "n,mean_S_n,se_S_n\n";
    for (std::size_t i = 0; i < rep.n_values.size(); ++i) {
      os << rep.n_values[i] << ',' << format_sci17(rep.mean_sums[i]) << ','
         << format_sci17(rep.se_sums[i]) << '\n';
    }
  }
  Json j = with_header("variation");
  j["spec"] = rep.spec.to_inline();
  j["p"] = rep.p;
  j["n_values"] = rep.n_values;
  Json means = Json::array(), ses = Json::array();
  for (std::size_t i = 0; i < rep.mean_sums.size(); ++i) {
    means.push_back(number(rep.mean_sums[i]));
    ses.push_back(number(rep.se_sums[i]));
  }
  j["mean_sums"] = means;
  j["se_sums"] = ses;
  j["slope_estimate"] = number(rep.slope_estimate);
  j["theoretical_slope"] = number(rep.theoretical_slope);
  j["verdict"] = variation_verdict_name(rep.verdict);
  j["limit_estimate"] = number(rep.limit_estimate);
  j["sigma_j_sq"] = rep.sigma_j_sq ? number(*rep.sigma_j_sq) : Json(nullptr);
  j["seed"] = rep.seed;
  j["n_paths"] = rep.n_paths;
  j["proven_regime"] = spec.proven_regime();
  write_json(c.json, j);
  out << "variation " << rep.spec.to_inline() << " p=" << format_double(rep.p)
      << " slope=" << format_double(rep.slope_estimate)
      << " verdict=" << variation_verdict_name(rep.verdict) << '\n';
  return kExitOk;
}

int cmd_asym(const RunConfig& c, std::ostream& out) {
  const ProcessSpec& spec = require_process(c);
  const TimeGrid u = c.u_grid ? c.u_grid->build() : TimeGrid::geometric(1e3, 1e6, 31);
  const std::vector<double> uv(u.times().begin(), u.times().end());
  const AsymReport rep = asym_coeff_estimate(spec, uv, c.asym_alpha);
  if (!c.csv.empty()) {
    auto os = open_output(c.csv);
    os << "u,l\n";
    for (double x : uv) {
      const double row[] = {x, eval_l(spec, x)};
      write_csv_row(os, row);
    }
  }
  Json j = with_header("asym");
  j["report"] = asym_json(rep);
  j["u"] = times_json(u);
  write_json(c.json, j);
  out << "asym " << rep.kernel << " constant=" << format_double(rep.constant_term)
      << " coefficient=" << format_double(rep.coefficient)
      << " exponent=" << format_double(rep.exponent) << '\n';
  return kExitOk;
}

class ThreadScope {
 public:
  ThreadScope() : saved_(thread_count()) {}
  ~ThreadScope() { set_thread_count(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  std::size_t saved_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-similar Gaussian Markov toolkit", "ssgm"};
  app.require_subcommand(1);
  Flags flags;
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Entry entries[] = {
      {"kernel-eval", "Evaluate a covariance kernel on a grid", cmd_kernel_eval},
      {"posdef", "Positive semidefiniteness check with witness", cmd_posdef},
      {"markov-test", "Doob criterion, canonical fit and factorization", cmd_markov},
      {"sample", "Draw sample paths", cmd_sample},
      {"variation", "p-variation trichotomy by Monte Carlo", cmd_variation},
      {"asym", "Tail expansion of l(u)", cmd_asym},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_flags(sub, flags);
    subs.push_back(sub);
  }

  ThreadScope scope;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      const RunConfig cfg = effective_config(subs[i], flags);
      if (subs[i]->get_option("--threads")->count() > 0) set_thread_count(flags.threads);
      if (!flags.dump_config.empty()) {
        auto os = open_output(flags.dump_config);
        os << serialize_config(cfg);
      }
      return entries[i].fn(cfg, out);
    } catch (const DomainError& e) {
      err << "error: " << e.what() << '\n';
      return kExitDomain;
    } catch (const NumericalError& e) {
      err << "numerical failure: " << e.what() << '\n';
      return kExitNumerical;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitNumerical;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitNumerical;
    }
  }
  err << "error: no subcommand\n";
  return kExitDomain;
}

}  // namespace ssgm::cli
