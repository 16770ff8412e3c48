#include "ssgm_cli/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ssgm/error.hpp"
#include "ssgm/extended_real.hpp"

namespace ssgm::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  const double v = parse_double(s);
  if (v < 0.0 || v != std::floor(v) || v > 1e15) {
    throw DomainError(what + ": '" + s + "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-') {
    throw DomainError(what + ": '" + s + "' is not an unsigned 64-bit integer");
  }
  return v;
}

std::string grid_kind_name(GridConfig::Kind k) {
  switch (k) {
    case GridConfig::Kind::List: return "list";
    case GridConfig::Kind::Geometric: return "geometric";
    case GridConfig::Kind::Linear: return "linear";
    case GridConfig::Kind::Dyadic: return "dyadic";
  }
  return "list";
}

std::string grid_text(const GridConfig& g) {
  switch (g.kind) {
    case GridConfig::Kind::Geometric:
      return "geom:" + format_double(g.start) + ":" + format_double(g.stop) + ":" + std::to_string(g.points);
    case GridConfig::Kind::Linear:
      return "lin:" + format_double(g.start) + ":" + format_double(g.stop) + ":" + std::to_string(g.points);
    case GridConfig::Kind::Dyadic:
      return "dyadic:" + std::to_string(g.points);
    case GridConfig::Kind::List: {
      std::string s;
      for (std::size_t i = 0; i < g.times.size(); ++i) s += (i ? "," : "") + format_double(g.times[i]);
      return s;
    }
  }
  return {};
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

using Block = std::map<std::string, std::string>;

GridConfig grid_from_block(const Block& b) {
  auto get = [&](const char* key) {
    const auto it = b.find(key);
    if (it == b.end()) throw DomainError(std::string("[grid]: missing key '") + key + "'");
    return it->second;
  };
  const std::string kind = b.count("kind") ? b.at("kind") : "list";
  GridConfig g;
  if (kind == "list") {
    g.kind = GridConfig::Kind::List;
    for (const auto& s : split(get("times"), ',')) g.times.push_back(parse_double(s));
  } else if (kind == "geometric" || kind == "linear") {
    g.kind = kind == "geometric" ? GridConfig::Kind::Geometric : GridConfig::Kind::Linear;
    g.start = parse_double(get("start"));
    g.stop = parse_double(get("stop"));
    g.points = parse_count(get("points"), "[grid] points");
  } else if (kind == "dyadic") {
    g.kind = GridConfig::Kind::Dyadic;
    g.points = parse_count(get("n"), "[grid] n");
  } else {
    throw DomainError("[grid]: unknown kind '" + kind + "'");
  }
  static const std::map<std::string, std::vector<std::string>> allowed{
      {"list", {"kind", "times"}},
      {"geometric", {"kind", "start", "stop", "points"}},
      {"linear", {"kind", "start", "stop", "points"}},
      {"dyadic", {"kind", "n"}}};
  for (const auto& [key, value] : b) {
    const auto& ok = allowed.at(kind);
    if (std::find(ok.begin(), ok.end(), key) == ok.end()) {
      throw DomainError("[grid]: key '" + key + "' does not apply to kind " + kind);
    }
  }
  g.build();  // validate
  return g;
}

}  // namespace

TimeGrid GridConfig::build() const {
  switch (kind) {
    case Kind::List: return TimeGrid(times);
    case Kind::Geometric: return TimeGrid::geometric(start, stop, points);
    case Kind::Linear: return TimeGrid::linear(start, stop, points);
    case Kind::Dyadic: return TimeGrid::dyadic(points);
  }
  throw DomainError("grid: unknown kind");
}

GridConfig GridConfig::parse(std::string_view text) {
  const std::string t = trim(text);
  GridConfig g;
  if (t.rfind("geom:", 0) == 0 || t.rfind("lin:", 0) == 0) {
    const auto parts = split(t, ':');
    if (parts.size() != 4) throw DomainError("grid: expected KIND:START:STOP:POINTS, got '" + t + "'");
    g.kind = parts[0] == "geom" ? Kind::Geometric : Kind::Linear;
    g.start = parse_double(parts[1]);
    g.stop = parse_double(parts[2]);
    g.points = parse_count(parts[3], "grid points");
  } else if (t.rfind("dyadic:", 0) == 0) {
    g.kind = Kind::Dyadic;
    g.points = parse_count(t.substr(7), "dyadic n");
  } else {
    g.kind = Kind::List;
    for (const auto& s : split(t, ',')) g.times.push_back(parse_double(s));
  }
  g.build();
  return g;
}

std::vector<std::size_t> parse_n_list(std::string_view text) {
  const std::string t = trim(text);
  std::vector<std::size_t> out;
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    auto exponent = [&](const std::string& s) {
      if (s.rfind("2^", 0) != 0) throw DomainError("n list: expected 2^a..2^b, got '" + t + "'");
      return parse_count(s.substr(2), "n list exponent");
    };
    const std::size_t a = exponent(trim(t.substr(0, dots)));
    const std::size_t b = exponent(trim(t.substr(dots + 2)));
    if (a > b || b > 40) throw DomainError("n list: bad exponent range in '" + t + "'");
    for (std::size_t e = a; e <= b; ++e) out.push_back(std::size_t{1} << e);
    return out;
  }
  for (const auto& s : split(t, ',')) out.push_back(parse_count(s, "n list"));
  return out;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.process == b.process && a.grid == b.grid && a.seed == b.seed && a.n_paths == b.n_paths &&
         a.inner_steps == b.inner_steps && a.scheme == b.scheme && a.psd_tol == b.psd_tol &&
         a.markov.markov == b.markov.markov && a.markov.not_markov == b.markov.not_markov &&
         a.markov.c_slack == b.markov.c_slack && a.p == b.p && a.n_list == b.n_list &&
         a.alpha == b.alpha && a.beta == b.beta && a.asym_alpha == b.asym_alpha &&
         a.u_grid == b.u_grid && a.csv == b.csv && a.json == b.json && a.bin == b.bin;
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Block> blocks;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw DomainError(where + ": malformed block header");
      current = trim(line.substr(1, line.size() - 2));
      static const std::vector<std::string> known{"process", "grid", "mc", "tolerances",
                                                  "variation", "minor", "asym", "output"};
      if (std::find(known.begin(), known.end(), current) == known.end()) {
        throw DomainError(where + ": unknown block [" + current + "]");
      }
      if (blocks.count(current)) throw DomainError(where + ": duplicate block [" + current + "]");
      blocks[current];
      continue;
    }
    if (current.empty()) throw DomainError(where + ": key outside of any block");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw DomainError(where + ": empty key");
    if (!blocks[current].emplace(key, value).second) {
      throw DomainError(where + ": duplicate key '" + key + "'");
    }
  }

  RunConfig cfg;
  auto take = [](Block& b, const char* key) -> std::optional<std::string> {
    const auto it = b.find(key);
    if (it == b.end()) return std::nullopt;
    std::string v = it->second;
    b.erase(it);
    return v;
  };
  auto no_leftovers = [](const Block& b, const std::string& name) {
    if (!b.empty()) throw DomainError("[" + name + "]: unknown key '" + b.begin()->first + "'");
  };

  if (blocks.count("process")) {
    Block b = blocks["process"];
    const auto family = take(b, "family");
    if (!family) throw DomainError("[process]: missing key 'family'");
    cfg.process = ProcessSpec::from_parameters(parse_family(*family), b);
  }
  if (blocks.count("grid")) cfg.grid = grid_from_block(blocks["grid"]);
  if (blocks.count("mc")) {
    Block b = blocks["mc"];
    if (auto v = take(b, "seed")) cfg.seed = parse_u64(*v, "[mc] seed");
    if (auto v = take(b, "paths")) cfg.n_paths = parse_count(*v, "[mc] paths");
    if (auto v = take(b, "inner_steps")) cfg.inner_steps = static_cast<int>(parse_count(*v, "[mc] inner_steps"));
    if (auto v = take(b, "scheme")) cfg.scheme = parse_scheme(*v);
    no_leftovers(b, "mc");
  }
  if (blocks.count("tolerances")) {
    Block b = blocks["tolerances"];
    if (auto v = take(b, "psd")) cfg.psd_tol = parse_double(*v);
    if (auto v = take(b, "markov")) cfg.markov.markov = parse_double(*v);
    if (auto v = take(b, "not_markov")) cfg.markov.not_markov = parse_double(*v);
    if (auto v = take(b, "c_slack")) cfg.markov.c_slack = parse_double(*v);
    no_leftovers(b, "tolerances");
  }
  if (blocks.count("variation")) {
    Block b = blocks["variation"];
    if (auto v = take(b, "p")) cfg.p = parse_double(*v);
    if (auto v = take(b, "n")) cfg.n_list = parse_n_list(*v);
    no_leftovers(b, "variation");
  }
  if (blocks.count("minor")) {
    Block b = blocks["minor"];
    if (auto v = take(b, "alpha")) cfg.alpha = parse_double(*v);
    if (auto v = take(b, "beta")) cfg.beta = parse_double(*v);
    no_leftovers(b, "minor");
  }
  if (blocks.count("asym")) {
    Block b = blocks["asym"];
    if (auto v = take(b, "alpha")) cfg.asym_alpha = parse_double(*v);
    if (auto v = take(b, "u")) cfg.u_grid = GridConfig::parse(*v);
    no_leftovers(b, "asym");
  }
  if (blocks.count("output")) {
    Block b = blocks["output"];
    if (auto v = take(b, "csv")) cfg.csv = *v;
    if (auto v = take(b, "json")) cfg.json = *v;
    if (auto v = take(b, "bin")) cfg.bin = *v;
    no_leftovers(b, "output");
  }
  return cfg;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  if (c.process) os << c.process->to_config_block() << '\n';
  if (c.grid) {
    os << "[grid]\nkind = " << grid_kind_name(c.grid->kind) << '\n';
    switch (c.grid->kind) {
      case GridConfig::Kind::List:
        os << "times = " << grid_text(*c.grid) << '\n';
        break;
      case GridConfig::Kind::Geometric:
      case GridConfig::Kind::Linear:
        os << "start = " << format_double(c.grid->start) << "\nstop = " << format_double(c.grid->stop)
           << "\npoints = " << c.grid->points << '\n';
        break;
      case GridConfig::Kind::Dyadic:
        os << "n = " << c.grid->points << '\n';
        break;
    }
    os << '\n';
  }
  os << "[mc]\n";
  if (c.seed) os << "seed = " << *c.seed << '\n';
  os << "paths = " << c.n_paths << "\ninner_steps = " << c.inner_steps << '\n';
  if (c.scheme) os << "scheme = " << scheme_name(*c.scheme) << '\n';
  os << "\n[tolerances]\npsd = " << format_double(c.psd_tol)
     << "\nmarkov = " << format_double(c.markov.markov)
     << "\nnot_markov = " << format_double(c.markov.not_markov)
     << "\nc_slack = " << format_double(c.markov.c_slack) << '\n';
  os << "\n[variation]\np = " << format_double(c.p) << '\n';
  if (!c.n_list.empty()) os << "n = " << join_counts(c.n_list) << '\n';
  if (c.alpha || c.beta) {
    os << "\n[minor]\n";
    if (c.alpha) os << "alpha = " << format_double(*c.alpha) << '\n';
    if (c.beta) os << "beta = " << format_double(*c.beta) << '\n';
  }
  os << "\n[asym]\nalpha = " << format_double(c.asym_alpha) << '\n';
  if (c.u_grid) os << "u = " << grid_text(*c.u_grid) << '\n';
  if (!c.csv.empty() || !c.json.empty() || !c.bin.empty()) {
    os << "\n[output]\n";
    if (!c.csv.empty()) os << "csv = " << c.csv << '\n';
    if (!c.json.empty()) os << "json = " << c.json << '\n';
    if (!c.bin.empty()) os << "bin = " << c.bin << '\n';
  }
  return os.str();
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace ssgm::cli
