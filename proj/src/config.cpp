#include "brt/config.hpp"

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "brt/errors.hpp"

namespace brt {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"grid", {"L1", "L2", "delta1", "delta2"}},
      {"phantom", {"kind", "max_mu", "scatter"}},
      {"geometry", {"scatter_pairs_deg", "transmission_deg"}},
      {"source", {"I0", "beta"}},
      {"simulation", {"seed", "noise_free"}},
      {"solver",
       {"lambda_alpha", "lambda_mu", "delta", "max_iters", "stop_tol", "newton_tol", "mu_max",
        "alpha0", "mu0", "operator", "extra_padding", "workers"}},
      {"benchmark", {"sizes", "pair_counts", "repetitions", "memory_budget_mb"}},
  };
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Line number of every "section.key", so value errors can point at the text.
std::map<std::string, int> key_lines(std::string_view text) {
  std::map<std::string, int> out;
  std::istringstream in{std::string(text)};
  std::string line, section;
  for (int n = 1; std::getline(in, line); ++n) {
    boost::algorithm::trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = boost::algorithm::trim_copy(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[section + "." + boost::algorithm::trim_copy(line.substr(0, eq))] = n;
  }
  return out;
}

class Fields {
 public:
  Fields(const pt::ptree& tree, std::map<std::string, int> lines)
      : tree_(tree), lines_(std::move(lines)) {}

  const std::string* raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return &it->second;
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return nullptr;
    return &(values_[key] = boost::algorithm::trim_copy(*v));
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto it = lines_.find(key);
    const std::string where = it != lines_.end() ? "line " + std::to_string(it->second) + ": " : "";
    throw ConfigError(where + key + ": " + msg);
  }

  void number(const std::string& key, double& out) const {
    if (const auto* s = raw(key)) out = to_double(key, *s);
  }
  template <class Int>
  void integer(const std::string& key, Int& out) const {
    if (const auto* s = raw(key)) out = to_int<Int>(key, *s);
  }
  void boolean(const std::string& key, bool& out) const {
    if (const auto* s = raw(key)) {
      if (*s == "true") out = true;
      else if (*s == "false") out = false;
      else fail(key, "expected true or false, got '" + *s + "'");
    }
  }

  double to_double(const std::string& key, std::string_view s) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      fail(key, "expected a finite number, got '" + std::string(s) + "'");
    return v;
  }
  template <class Int>
  Int to_int(const std::string& key, std::string_view s) const {
    Int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      fail(key, "expected an integer, got '" + std::string(s) + "'");
    return v;
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
  mutable std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    boost::algorithm::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v, auto&& show) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + show(v[i]);
  return s;
}

}  // namespace

std::string to_string(OperatorChoice c) {
  switch (c) {
    case OperatorChoice::Direct: return "direct";
    case OperatorChoice::Fourier: return "fourier";
    case OperatorChoice::Auto: return "auto";
  }
  return "auto";
}

OperatorChoice parse_operator_choice(std::string_view s) {
  if (s == "direct") return OperatorChoice::Direct;
  if (s == "fourier") return OperatorChoice::Fourier;
  if (s == "auto") return OperatorChoice::Auto;
  throw ConfigError("operator must be direct, fourier or auto, got '" + std::string(s) + "'");
}

ImageGrid ExperimentConfig::grid() const {
  try {
    return ImageGrid(L1, L2, delta1, delta2);
  } catch (const Error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

std::vector<SourceDetectorPair> ExperimentConfig::geometry() const {
  std::vector<SourceDetectorPair> out;
  for (const auto& p : pairs) {
    const double s = p.source_deg * kPi / 180.0;
    const double d = p.transmission ? s + kPi : p.detector_deg * kPi / 180.0;
    out.push_back(make_pair(s, d));
  }
  return out;
}

SolverConfig ExperimentConfig::solver() const {
  SolverConfig s;
  s.lambda_alpha = lambda_alpha;
  s.lambda_mu = lambda_mu;
  s.delta = delta;
  s.max_outer_iters = max_iters;
  s.stop_tol = stop_tol;
  s.newton_tol = newton_tol;
  s.mu_max = mu_max;
  return s;
}

void ExperimentConfig::validate() const {
  grid();
  if (!(max_mu > 0.0)) throw ConfigError("phantom.max_mu must be positive");
  if (pairs.empty()) throw ConfigError("geometry: at least one pair is required");
  std::vector<SourceDetectorPair> geo;
  try {
    geo = geometry();
  } catch (const Error& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (!pairs[i].transmission && geo[i].is_transmission)
      throw ConfigError("geometry.scatter_pairs_deg: a scatter pair cannot be antipodal");
  if (!(I0 > 0.0)) throw ConfigError("source.I0 must be positive");
  if (!(beta >= 0.0)) throw ConfigError("source.beta must be nonnegative");
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0)) throw ConfigError("solver.alpha0 must lie in [0, 1]");
  if (!(mu0 >= 0.0)) throw ConfigError("solver.mu0 must be nonnegative");
  if (workers < 0) throw ConfigError("solver.workers must be nonnegative");
  try {
    solver().validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (bench_sizes.empty() || bench_pair_counts.empty())
    throw ConfigError("benchmark: sizes and pair_counts must be non-empty");
  for (auto s : bench_sizes)
    if (s < 4) throw ConfigError("benchmark.sizes: each size must be at least 4 pixels");
  for (auto c : bench_pair_counts)
    if (c < 1 || c > 8) throw ConfigError("benchmark.pair_counts: each count must be in [1, 8]");
  if (bench_repetitions < 5) throw ConfigError("benchmark.repetitions must be at least 5");
  if (!(bench_memory_mb >= 0.0)) throw ConfigError("benchmark.memory_budget_mb must be nonnegative");
}

ExperimentConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  auto lines = key_lines(text);
  for (const auto& [section, body] : tree) {
    auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) throw ConfigError("key outside any section: " + section);
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto& [key, _] : body)
      if (!it->second.count(key)) {
        auto l = lines.find(section + "." + key);
        throw ConfigError((l != lines.end() ? "line " + std::to_string(l->second) + ": " : "") +
                          "unknown key " + section + "." + key);
      }
  }

  Fields f(tree, std::move(lines));
  ExperimentConfig c;
  f.integer("grid.L1", c.L1);
  f.integer("grid.L2", c.L2);
  f.number("grid.delta1", c.delta1);
  f.number("grid.delta2", c.delta2);

  if (const auto* s = f.raw("phantom.kind")) {
    if (*s == "shepp") c.phantom = PhantomKind::SheppLogan;
    else if (*s == "rectangle") c.phantom = PhantomKind::Rectangle;
    else f.fail("phantom.kind", "expected shepp or rectangle, got '" + *s + "'");
  }
  f.number("phantom.max_mu", c.max_mu);
  if (const auto* s = f.raw("phantom.scatter")) {
    if (*s == "positive") c.scatter = ScatterVariant::Positive;
    else if (*s == "nonneg") c.scatter = ScatterVariant::Nonneg;
    else f.fail("phantom.scatter", "expected positive or nonneg, got '" + *s + "'");
  }

  const auto* sp = f.raw("geometry.scatter_pairs_deg");
  const auto* tp = f.raw("geometry.transmission_deg");
  if (sp || tp) {
    c.pairs.clear();
    if (sp)
      for (const auto& item : split_list(*sp)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
          f.fail("geometry.scatter_pairs_deg", "expected source:detector, got '" + item + "'");
        PairSpec p;
        p.source_deg = f.to_double("geometry.scatter_pairs_deg",
                                   boost::algorithm::trim_copy(item.substr(0, colon)));
        p.detector_deg = f.to_double("geometry.scatter_pairs_deg",
                                     boost::algorithm::trim_copy(item.substr(colon + 1)));
        c.pairs.push_back(p);
      }
    if (tp)
      for (const auto& item : split_list(*tp)) {
        PairSpec p;
        p.source_deg = f.to_double("geometry.transmission_deg", item);
        p.detector_deg = 0.0;
        p.transmission = true;
        c.pairs.push_back(p);
      }
  }

  f.number("source.I0", c.I0);
  f.number("source.beta", c.beta);
  f.integer("simulation.seed", c.seed);
  f.boolean("simulation.noise_free", c.noise_free);

  f.number("solver.lambda_alpha", c.lambda_alpha);
  f.number("solver.lambda_mu", c.lambda_mu);
  f.number("solver.delta", c.delta);
  f.integer("solver.max_iters", c.max_iters);
  f.number("solver.stop_tol", c.stop_tol);
  f.number("solver.newton_tol", c.newton_tol);
  f.number("solver.mu_max", c.mu_max);
  f.number("solver.alpha0", c.alpha0);
  f.number("solver.mu0", c.mu0);
  if (const auto* s = f.raw("solver.operator")) {
    try {
      c.op = parse_operator_choice(*s);
    } catch (const ConfigError& e) {
      f.fail("solver.operator", e.what());
    }
  }
  f.integer("solver.extra_padding", c.extra_padding);
  f.integer("solver.workers", c.workers);

  if (const auto* s = f.raw("benchmark.sizes")) {
    c.bench_sizes.clear();
    for (const auto& item : split_list(*s))
      c.bench_sizes.push_back(f.to_int<std::size_t>("benchmark.sizes", item));
  }
  if (const auto* s = f.raw("benchmark.pair_counts")) {
    c.bench_pair_counts.clear();
    for (const auto& item : split_list(*s))
      c.bench_pair_counts.push_back(f.to_int<std::size_t>("benchmark.pair_counts", item));
  }
  f.integer("benchmark.repetitions", c.bench_repetitions);
  f.number("benchmark.memory_budget_mb", c.bench_memory_mb);

  // Validation messages name the field; add the line where we know it.
  try {
    c.validate();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& [key, line] : key_lines(text)) {
      const auto dot = key.find('.');
      const std::string field = key.substr(dot + 1);
      if (msg.find(key) != std::string::npos ||
          (msg.rfind(key.substr(0, dot) + ":", 0) == 0 && msg.find(field) != std::string::npos))
        throw ConfigError("line " + std::to_string(line) + ": " + msg);
    }
    throw;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::vector<PairSpec> scatter, trans;
  for (const auto& p : c.pairs) (p.transmission ? trans : scatter).push_back(p);
  auto num = [](auto v) { return std::to_string(v); };

  std::ostringstream o;
  o << "[grid]\n"
    << "L1 = " << c.L1 << "\n"
    << "L2 = " << c.L2 << "\n"
    << "delta1 = " << fmt(c.delta1) << "\n"
    << "delta2 = " << fmt(c.delta2) << "\n\n";
  o << "[phantom]\n"
    << "kind = " << (c.phantom == PhantomKind::SheppLogan ? "shepp" : "rectangle") << "\n"
    << "max_mu = " << fmt(c.max_mu) << "\n"
    << "scatter = " << (c.scatter == ScatterVariant::Positive ? "positive" : "nonneg") << "\n\n";
  o << "[geometry]\n"
    << "scatter_pairs_deg = "
    << join(scatter, [](const PairSpec& p) { return fmt(p.source_deg) + ":" + fmt(p.detector_deg); })
    << "\n"
    << "transmission_deg = " << join(trans, [](const PairSpec& p) { return fmt(p.source_deg); })
    << "\n\n";
  o << "[source]\n"
    << "I0 = " << fmt(c.I0) << "\n"
    << "beta = " << fmt(c.beta) << "\n\n";
  o << "[simulation]\n"
    << "seed = " << c.seed << "\n"
    << "noise_free = " << (c.noise_free ? "true" : "false") << "\n\n";
  o << "[solver]\n"
    << "lambda_alpha = " << fmt(c.lambda_alpha) << "\n"
    << "lambda_mu = " << fmt(c.lambda_mu) << "\n"
    << "delta = " << fmt(c.delta) << "\n"
    << "max_iters = " << c.max_iters << "\n"
    << "stop_tol = " << fmt(c.stop_tol) << "\n"
    << "newton_tol = " << fmt(c.newton_tol) << "\n"
    << "mu_max = " << fmt(c.mu_max) << "\n"
    << "alpha0 = " << fmt(c.alpha0) << "\n"
    << "mu0 = " << fmt(c.mu0) << "\n"
    << "operator = " << to_string(c.op) << "\n"
    << "extra_padding = " << c.extra_padding << "\n"
    << "workers = " << c.workers << "\n\n";
  o << "[benchmark]\n"
    << "sizes = " << join(c.bench_sizes, num) << "\n"
    << "pair_counts = " << join(c.bench_pair_counts, num) << "\n"
    << "repetitions = " << c.bench_repetitions << "\n"
    << "memory_budget_mb = " << fmt(c.bench_memory_mb) << "\n";
  return o.str();
}

}  // namespace brt
