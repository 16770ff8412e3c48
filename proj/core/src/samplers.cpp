#include "ssgm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "ssgm/error.hpp"
#include "ssgm/gram.hpp"
#include "ssgm/parallel.hpp"
#include "ssgm/pivoted_ldlt.hpp"
#include "ssgm/rng.hpp"
#include "weight.hpp"

namespace ssgm {
namespace {

constexpr Eigen::Index kPathBlock = 128;

void require_paths(Eigen::Index n_paths) {
  if (n_paths < 1) throw DomainError("n_paths must be >= 1");
}

std::size_t path_index(Eigen::Index p) { return static_cast<std::size_t>(p); }

// Runs fill(path, stream) for every path in parallel.
template <class Fill>
void for_each_path(Eigen::Index n_paths, std::uint64_t seed, const Fill& fill) {
  parallel_for(path_index(n_paths), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      NormalStream stream(seed, p);
      fill(static_cast<Eigen::Index>(p), stream);
    }
  });
}

PathEnsemble make_ensemble(const ProcessSpec& spec, const TimeGrid& grid, Eigen::Index n_paths,
                           std::uint64_t seed, Scheme scheme) {
  PathEnsemble e{spec, grid, Eigen::MatrixXd::Zero(n_paths, static_cast<Eigen::Index>(grid.size())),
                 seed, scheme};
  e.proven_regime = spec.proven_regime();
  return e;
}

// Cells of [0, T]: union of the uniform mesh k / inner_steps and the grid times.
std::vector<double> cell_breaks(const TimeGrid& grid, int inner_steps) {
  const double horizon = grid.back();
  std::vector<double> b;
  const double mesh_cells = std::ceil(horizon * inner_steps);
  if (mesh_cells > 5e7) throw DomainError("volterra sampler: too many cells (reduce inner_steps)");
  const auto n = static_cast<std::size_t>(mesh_cells);
  b.reserve(n + grid.size() + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double x = static_cast<double>(k) / inner_steps;
    if (x < horizon) b.push_back(x);
  }
  for (double t : grid.times()) b.push_back(t);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (b.front() != 0.0) b.insert(b.begin(), 0.0);
  return b;
}

// Z_t = sum_k w(t, a_k, b_k) dB_k over the cells of [0, t]. Block shapes
// depend only on the problem size, so results do not depend on the worker
// count.
template <class Weight>
PathEnsemble volterra_engine(PathEnsemble e, int inner_steps, const Weight& weight) {
  const TimeGrid& grid = e.grid;
  const std::vector<double> b = cell_breaks(grid, inner_steps);
  const auto cells = static_cast<Eigen::Index>(b.size() - 1);
  const auto d = static_cast<Eigen::Index>(grid.size());

  Eigen::VectorXd width(cells);
  for (Eigen::Index k = 0; k < cells; ++k)
    width(k) = std::sqrt(b[static_cast<std::size_t>(k) + 1] - b[static_cast<std::size_t>(k)]);
  // Number of cells inside [0, t_j].
  std::vector<Eigen::Index> reach(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    reach[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(
        std::lower_bound(b.begin(), b.end(), grid[static_cast<std::size_t>(j)]) - b.begin());
  }

  // Transposed weights for columns [j0, j1): rows are cells.
  auto fill_weights = [&](Eigen::MatrixXd& w, Eigen::Index j0, Eigen::Index j1) {
    const Eigen::Index rows = reach[static_cast<std::size_t>(j1 - 1)];
    w.setZero(rows, j1 - j0);
    for (Eigen::Index j = j0; j < j1; ++j) {
      const double t = grid[static_cast<std::size_t>(j)];
      if (t == 0.0) continue;
      for (Eigen::Index k = 0; k < reach[static_cast<std::size_t>(j)]; ++k) {
        w(k, j - j0) = weight(t, b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k) + 1]);
      }
    }
  };

  constexpr Eigen::Index kBudget = Eigen::Index{1} << 22;  // doubles per work matrix
  const Eigen::Index path_block = std::clamp<Eigen::Index>(kBudget / cells, 1, kPathBlock);
  const bool whole = d * cells <= 4 * kBudget;
  const Eigen::Index col_block = whole ? d : std::max<Eigen::Index>(1, kBudget / cells);

  Eigen::MatrixXd shared;
  if (whole) fill_weights(shared, 0, d);

  const Eigen::Index n = e.n_paths();
  const Eigen::Index blocks = (n + path_block - 1) / path_block;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd db, local;
    for (auto blk = static_cast<Eigen::Index>(begin); blk < static_cast<Eigen::Index>(end); ++blk) {
      const Eigen::Index p0 = blk * path_block;
      const Eigen::Index rows = std::min(path_block, n - p0);
      db.resize(rows, cells);
      for (Eigen::Index r = 0; r < rows; ++r) {
        NormalStream stream(e.seed, path_index(p0 + r));
        for (Eigen::Index k = 0; k < cells; ++k) db(r, k) = width(k) * stream.next();
      }
      for (Eigen::Index j0 = 0; j0 < d; j0 += col_block) {
        const Eigen::Index j1 = std::min(d, j0 + col_block);
        if (!whole) fill_weights(local, j0, j1);
        const Eigen::MatrixXd& w = whole ? shared : local;
        e.values.block(p0, j0, rows, j1 - j0).noalias() = db.leftCols(w.rows()) * w;
      }
    }
  });
  e.inner_steps = inner_steps;
  return e;
}

double midpoint_variance(const detail::WeightFunction& f, int n) {
  // Var of the discretized Z_1: sum_k F(m_k)^2 / n.
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = f.at_complement((n - k - 0.5) / n);
    sum += v * v;
  }
  return sum / n;
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::TimeChange: return "timechange";
    case Scheme::Cholesky: return "cholesky";
    case Scheme::VolterraDiscrete: return "volterra";
    case Scheme::WhiteNoise: return "whitenoise";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::TimeChange, Scheme::Cholesky, Scheme::VolterraDiscrete, Scheme::WhiteNoise}) {
    if (scheme_name(s) == name) return s;
  }
  throw DomainError("unknown sampling scheme '" + std::string(name) + "'");
}

PathEnsemble sample_timechange(double hurst, double c, const TimeGrid& grid, Eigen::Index n_paths,
                               std::uint64_t seed) {
  require_paths(n_paths);
  if (!std::isfinite(c)) throw DomainError("sample_timechange: c must be finite");
  const ProcessSpec spec = ProcessSpec::canonical(hurst, ExtendedReal(c));
  PathEnsemble e = make_ensemble(spec, grid, n_paths, seed, Scheme::TimeChange);
  const std::size_t d = grid.size();
  const double e_tau = -2.0 * hurst - 2.0 * c;
  const bool degenerate = c == -hurst;

  std::vector<double> scale(d), step(d);
  double prev_tau = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double t = grid[j];
    if (t == 0.0) continue;
    if (degenerate) {
      scale[j] = std::pow(t, hurst);
      continue;
    }
    scale[j] = std::pow(t, 2.0 * hurst + c);
    const double tau = std::pow(t, e_tau);
    step[j] = std::sqrt(tau - prev_tau);
    prev_tau = tau;
  }

  for_each_path(n_paths, seed, [&](Eigen::Index p, NormalStream& stream) {
    if (degenerate) {
      const double w1 = stream.next();
      for (std::size_t j = 0; j < d; ++j)
        e.values(p, static_cast<Eigen::Index>(j)) = grid[j] == 0.0 ? 0.0 : scale[j] * w1;
      return;
    }
    double w = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (grid[j] == 0.0) continue;
      w += step[j] * stream.next();
      e.values(p, static_cast<Eigen::Index>(j)) = scale[j] * w;
    }
  });
  return e;
}

PathEnsemble sample_whitenoise(double hurst, const TimeGrid& grid, Eigen::Index n_paths,
                               std::uint64_t seed) {
  require_paths(n_paths);
  const ProcessSpec spec = ProcessSpec::white_noise(hurst);
  PathEnsemble e = make_ensemble(spec, grid, n_paths, seed, Scheme::WhiteNoise);
  const std::size_t d = grid.size();
  std::vector<double> sd(d);
  for (std::size_t j = 0; j < d; ++j) sd[j] = grid[j] == 0.0 ? 0.0 : std::pow(grid[j], hurst);
  for_each_path(n_paths, seed, [&](Eigen::Index p, NormalStream& stream) {
    for (std::size_t j = 0; j < d; ++j) {
      if (grid[j] == 0.0) continue;
      e.values(p, static_cast<Eigen::Index>(j)) = sd[j] * stream.next();
    }
  });
  return e;
}

PathEnsemble sample_cholesky(const CovKernel& kernel, const TimeGrid& grid, Eigen::Index n_paths,
                             std::uint64_t seed) {
  require_paths(n_paths);
  if (grid.size() > kMaxCholeskyPoints) {
    throw DomainError("sample_cholesky: grid has " + std::to_string(grid.size()) +
                      " points, limit is " + std::to_string(kMaxCholeskyPoints));
  }
  PathEnsemble e = make_ensemble(kernel.spec(), grid, n_paths, seed, Scheme::Cholesky);

  // Factor only the t > 0 block; t = 0 columns stay exactly zero.
  std::vector<Eigen::Index> active;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (grid[j] > 0.0) active.push_back(static_cast<Eigen::Index>(j));
  const auto m = static_cast<Eigen::Index>(active.size());
  if (m == 0) return e;
  std::vector<double> active_times;
  for (Eigen::Index j : active) active_times.push_back(grid[static_cast<std::size_t>(j)]);
  const Eigen::MatrixXd gram = build_gram(kernel, TimeGrid(active_times)).entries;

  const double mean_diag = gram.trace() / static_cast<double>(m);
  if (!(mean_diag > 0.0)) throw NumericalError("sample_cholesky: Gram matrix has zero trace");
  const double small = 1e-14 * mean_diag;

  // Loading matrix (rank x d): X = z^T load. Plain Cholesky when the matrix
  // is comfortably positive definite, the pivoted factorization otherwise.
  Eigen::MatrixXd load;
  auto load_from_llt = [&](const Eigen::MatrixXd& a) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd l = llt.matrixL();
    if (!(l.diagonal().array().square().minCoeff() >= 1e-12 * mean_diag)) return false;
    load = Eigen::MatrixXd::Zero(m, e.values.cols());
    for (Eigen::Index k = 0; k < m; ++k) load.col(active[static_cast<std::size_t>(k)]) = l.row(k).transpose();
    return true;
  };
  auto load_from_ldlt = [&](const Eigen::MatrixXd& a) {
    const PivotedLdlt f = pivoted_ldlt(a, small);
    if (f.negative_pivot) return false;
    if (f.schur.size() != 0 && f.schur.cwiseAbs().maxCoeff() > 10.0 * small) return false;
    const Eigen::Index r = f.rank;
    load = Eigen::MatrixXd::Zero(r, e.values.cols());
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index col = active[static_cast<std::size_t>(f.order[static_cast<std::size_t>(k)])];
      for (Eigen::Index q = 0; q < std::min(k + 1, r); ++q)
        load(q, col) = f.lower(k, q) * std::sqrt(f.pivots(q));
    }
    return true;
  };

  double delta = 0.0;
  bool ok = load_from_llt(gram) || load_from_ldlt(gram);
  while (!ok) {
    delta = delta == 0.0 ? 1e-12 : delta * 10.0;
    if (delta > 1.5e-6) {
      throw NumericalError("sample_cholesky: factorization of the " + std::to_string(m) + "x" +
                           std::to_string(m) + " Gram matrix of " + kernel.id() +
                           " failed with jitter up to 1e-6 of the mean diagonal");
    }
    Eigen::MatrixXd jittered = gram;
    jittered.diagonal().array() += delta * mean_diag;
    ok = load_from_llt(jittered) || load_from_ldlt(jittered);
  }
  e.jitter = delta;
  const Eigen::Index r = load.rows();

  const Eigen::Index blocks = (n_paths + kPathBlock - 1) / kPathBlock;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd z;
    for (auto blk = static_cast<Eigen::Index>(begin); blk < static_cast<Eigen::Index>(end); ++blk) {
      const Eigen::Index p0 = blk * kPathBlock;
      const Eigen::Index rows = std::min(kPathBlock, n_paths - p0);
      z.resize(rows, r);
      for (Eigen::Index i = 0; i < rows; ++i) {
        NormalStream stream(seed, path_index(p0 + i));
        for (Eigen::Index q = 0; q < r; ++q) z(i, q) = stream.next();
      }
      e.values.middleRows(p0, rows).noalias() = z * load;
    }
  });
  return e;
}

int auto_inner_steps(double beta, const GFunction& g) {
  const detail::WeightFunction f{beta, g};
  int n = 256;
  while (n < (1 << 16)) {
    const double coarse = midpoint_variance(f, n);
    const double fine = midpoint_variance(f, 2 * n);
    if (std::abs(coarse - fine) <= 0.01 * std::abs(fine)) break;
    n *= 2;
  }
  return n;
}

PathEnsemble sample_volterra_zg(double hurst, double beta, const GFunction& g,
                                const TimeGrid& grid, int inner_steps, Eigen::Index n_paths,
                                std::uint64_t seed) {
  require_paths(n_paths);
  const ProcessSpec spec = ProcessSpec::volterra_g(hurst, beta, g);
  if (inner_steps == 0) inner_steps = auto_inner_steps(beta, g);
  if (inner_steps < 64) throw DomainError("sample_volterra_zg: inner_steps must be >= 64");
  const detail::WeightFunction f{beta, g};
  return volterra_engine(make_ensemble(spec, grid, n_paths, seed, Scheme::VolterraDiscrete),
                         inner_steps, [&](double t, double a, double b) {
                           const double mid = 0.5 * (a + b);
                           return std::pow(t, hurst - 0.5) * f.at_complement((t - mid) / t);
                         });
}

PathEnsemble sample_volterra_canonical(double hurst, double c, const TimeGrid& grid,
                                       int inner_steps, Eigen::Index n_paths,
                                       std::uint64_t seed) {
  require_paths(n_paths);
  if (!std::isfinite(c) || !(c < -hurst)) {
    throw DomainError("sample_volterra_canonical: requires finite c < -H");
  }
  const ProcessSpec spec = ProcessSpec::canonical(hurst, ExtendedReal(c));
  if (inner_steps == 0) inner_steps = 256;
  if (inner_steps < 64) throw DomainError("sample_volterra_canonical: inner_steps must be >= 64");
  const double ex = -c - hurst - 0.5;  // kernel is coef * t^{H-1/2-ex} u^ex
  const double coef = std::sqrt(-2.0 * (c + hurst));
  PathEnsemble e = volterra_engine(
      make_ensemble(spec, grid, n_paths, seed, Scheme::VolterraDiscrete), inner_steps,
      [&](double t, double a, double b) {
        const double cell = (std::pow(b, ex + 1.0) - std::pow(a, ex + 1.0)) / (ex + 1.0);
        return coef * std::pow(t, hurst - 0.5 - ex) * cell / (b - a);
      });
  return e;
}

PathEnsemble sample_auto(const ProcessSpec& spec, const TimeGrid& grid, Eigen::Index n_paths,
                         std::uint64_t seed, int inner_steps) {
  const ProcessSpec s = spec.normalized();
  switch (s.family()) {
    case Family::CanonicalMarkov:
      return sample_timechange(s.hurst(), s.c().value(), grid, n_paths, seed);
    case Family::WhiteNoise:
      return sample_whitenoise(s.hurst(), grid, n_paths, seed);
    case Family::VolterraG:
      return sample_volterra_zg(s.hurst(), s.beta(), s.g(), grid, inner_steps, n_paths, seed);
    default:
      return sample_cholesky(CovKernel(s), grid, n_paths, seed);
  }
}

EmpiricalCov empirical_cov(const PathEnsemble& ensemble) {
  const Eigen::Index n = ensemble.n_paths();
  if (n < 2) throw DomainError("empirical_cov: need at least 2 paths");
  const Eigen::Index d = ensemble.values.cols();
  EmpiricalCov out{ensemble.grid, Eigen::VectorXd(d), Eigen::MatrixXd(d, d), Eigen::MatrixXd(d, d), n};
  const auto nd = static_cast<double>(n);
  Eigen::MatrixXd centered = ensemble.values;
  for (Eigen::Index j = 0; j < d; ++j) {
    out.mean(j) = pairwise_sum(centered.col(j).data(), static_cast<std::size_t>(n)) / nd;
    centered.col(j).array() -= out.mean(j);
  }
  const Eigen::Index pairs = d * (d + 1) / 2;
  parallel_for(static_cast<std::size_t>(pairs), [&](std::size_t begin, std::size_t end) {
    std::vector<double> prod(static_cast<std::size_t>(n)), sq(static_cast<std::size_t>(n));
    for (std::size_t idx = begin; idx < end; ++idx) {
      // idx -> (i, j) with i <= j, row-major over the upper triangle.
      Eigen::Index i = 0;
      auto rem = static_cast<Eigen::Index>(idx);
      while (rem >= d - i) {
        rem -= d - i;
        ++i;
      }
      const Eigen::Index j = i + rem;
      for (Eigen::Index p = 0; p < n; ++p) {
        const double v = centered(p, i) * centered(p, j);
        prod[static_cast<std::size_t>(p)] = v;
        sq[static_cast<std::size_t>(p)] = v * v;
      }
      const double sum = pairwise_sum(prod.data(), prod.size());
      const double m4 = pairwise_sum(sq.data(), sq.size()) / nd;
      const double biased = sum / nd;
      const double cov = sum / (nd - 1.0);
      const double se = std::sqrt(std::max(0.0, m4 - biased * biased) / nd);
      out.cov(i, j) = out.cov(j, i) = cov;
      out.se(i, j) = out.se(j, i) = se;
    }
  });
  return out;
}

SelfSimReport selfsim_check(const ProcessSpec& spec, double a, const TimeGrid& grid,
                            Eigen::Index n_paths, std::uint64_t seed) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("selfsim_check: a must be > 0");
  const EmpiricalCov base = empirical_cov(sample_auto(spec, grid, n_paths, seed));
  const EmpiricalCov scaled =
      empirical_cov(sample_auto(spec, grid.scaled(a), n_paths, mix_seed(seed)));
  const double factor = std::pow(a, 2.0 * spec.hurst());
  SelfSimReport report;
  report.a = a;
  const Eigen::Index d = base.cov.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double diff = std::abs(scaled.cov(i, j) - factor * base.cov(i, j));
      const double se = std::hypot(scaled.se(i, j), factor * base.se(i, j));
      if (se == 0.0) {
        if (diff == 0.0) continue;
      }
      const double dev = se == 0.0 ? INFINITY : diff / (4.0 * se);
      if (dev > report.max_deviation) {
        report.max_deviation = dev;
        report.worst_i = i;
        report.worst_j = j;
      }
    }
  }
  return report;
}

}  // namespace ssgm
