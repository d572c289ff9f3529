#include "srd/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "srd/csv.hpp"

namespace srd::config {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"", {"command", "output", "threads", "seed", "sweep_key", "sweep_values"}},
      {"triplet", {"drift", "gaussian", "measure", "alpha", "scale", "rate", "atoms", "weights", "file"}},
      {"kernel", {"name", "dim", "lo", "hi", "width", "rate", "amplitude", "beta", "file"}},
      {"numerics",
       {"rel_tol", "abs_tol", "max_intervals", "window", "t_step", "s_min", "s_max", "s_points",
        "search_s_min", "search_s_max", "search_points", "refine_rounds", "candidates",
        "s_independent", "force_search", "negdef_pairs", "lemma3_draws", "lemma3_t_max"}},
      {"simulate", {"h", "window", "samples", "seed", "lags", "rho_bar", "measures"}},
  };
  return keys;
}

// Typed access to one section; every error names the line.
class Section {
 public:
  Section(const RawConfig& raw, const std::string& name) : raw_(raw), name_(name) {
    const auto it = raw.sections.find(name);
    if (it != raw.sections.end()) entries_ = &it->second;
  }

  bool has(const std::string& key) const { return entries_ && entries_->count(key); }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? entries_->at(key).value : fallback;
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return to_number(key, entries_->at(key).value);
  }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key, 0.0);
    if (v != std::floor(v)) fail(key, "expected an integer");
    return static_cast<long>(v);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const long v = integer(key, static_cast<long>(fallback));
    if (v < 0) fail(key, "expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = entries_->at(key).value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(key, "expected true or false");
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = entries_->at(key).value;
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
      out = std::stoull(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size() || v.front() == '-') fail(key, "expected a 64-bit unsigned integer");
    return out;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : split(entries_->at(key).value, ',')) out.push_back(to_number(key, item));
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const int line = has(key) ? entries_->at(key).line : 0;
    throw ConfigError(fmt::format("{}:{}: [{}] {}: {}", raw_.source, line, name_, key, what));
  }

 private:
  double to_number(const std::string& key, const std::string& v) const {
    try {
      return csv::parse_number(v);
    } catch (const std::exception&) {
      fail(key, fmt::format("'{}' is not a number", v));
    }
  }

  const RawConfig& raw_;
  std::string name_;
  const std::map<std::string, Entry>* entries_ = nullptr;
};

std::filesystem::path resolve(const RawConfig& raw, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : raw.base_dir / path;
}

levy::LevyMeasure read_levy_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Rejection(fmt::format("cannot open Levy density file '{}'", path.string()));
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    double y = 0.0;
    double d = 0.0;
    if (!(ls >> y >> d)) {
      throw Rejection(fmt::format("{}:{}: expected 'y density'", path.string(), lineno));
    }
    rows.emplace_back(y, d);
  }
  return levy::LevyMeasure::tabulated(std::move(rows));
}

levy::LevyTriplet build_triplet(const RawConfig& raw) {
  const Section s(raw, "triplet");
  const std::string kind = s.text("measure", "none");
  levy::LevyMeasure nu;
  if (kind == "none") {
    nu = levy::LevyMeasure();
  } else if (kind == "stable") {
    const double alpha = s.number("alpha", 1.0);
    if (!(alpha > 0.0 && alpha < 2.0)) s.fail("alpha", "alpha must lie in (0, 2)");
    const std::string scale = s.text("scale", "calibrated");
    levy::SymmetricStable st = levy::calibrated_stable(alpha);
    if (scale != "calibrated") st.scale = s.number("scale", 1.0);
    nu = levy::LevyMeasure(st);
  } else if (kind == "compound_poisson") {
    levy::CompoundPoisson cp;
    cp.rate = s.number("rate", 1.0);
    cp.atoms = s.numbers("atoms", {});
    cp.weights = s.numbers("weights", std::vector<double>(cp.atoms.size(), 1.0 / std::max<std::size_t>(1, cp.atoms.size())));
    nu = levy::LevyMeasure(cp);
  } else if (kind == "tabulated") {
    if (!s.has("file")) s.fail("measure", "tabulated measure needs a file key");
    nu = read_levy_table(resolve(raw, s.text("file", "")));
  } else {
    s.fail("measure", "expected none, stable, compound_poisson or tabulated");
  }
  return levy::LevyTriplet(s.number("drift", 0.0), s.number("gaussian", 0.0), std::move(nu));
}

kernels::Kernel build_kernel(const RawConfig& raw) {
  const Section s(raw, "kernel");
  const std::string name = s.text("name", "box");
  const int dim = static_cast<int>(s.integer("dim", 1));
  const double amp = s.number("amplitude", 1.0);
  if (name == "box") {
    auto lo = s.numbers("lo", std::vector<double>(dim, 0.0));
    auto hi = s.numbers("hi", std::vector<double>(dim, 1.0));
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) {
      s.fail(s.has("lo") ? "lo" : "hi", "needs one value per dimension");
    }
    return kernels::box(std::move(lo), std::move(hi), amp);
  }
  if (name == "tent") return kernels::tent(dim, s.number("width", 1.0), amp);
  if (name == "gaussian") return kernels::gaussian_bump(dim, s.number("rate", 1.0), amp);
  if (name == "power") {
    if (!s.has("beta")) s.fail("name", "power kernel needs beta");
    return kernels::power_law(dim, s.number("beta", 0.0), amp);
  }
  if (name == "tabulated") {
    if (!s.has("file")) s.fail("name", "tabulated kernel needs a file key");
    return kernels::load_tabulated(resolve(raw, s.text("file", "")), dim);
  }
  s.fail("name", "expected box, tent, gaussian, power or tabulated");
}

std::vector<simulate::TestMeasure> parse_measures(const Section& s) {
  std::vector<simulate::TestMeasure> out;
  const std::string text = s.text("measures", "point:0; discrete:-1,0,1; gaussian:0,1");
  for (const auto& item : split(text, ';')) {
    const auto colon = item.find(':');
    const std::string kind = trim(item.substr(0, colon));
    std::vector<double> args;
    if (colon != std::string::npos) {
      for (const auto& a : split(item.substr(colon + 1), ',')) {
        try {
          args.push_back(csv::parse_number(a));
        } catch (const std::exception&) {
          s.fail("measures", fmt::format("'{}' is not a number", a));
        }
      }
    }
    if (kind == "point" && args.size() == 1) {
      out.emplace_back(simulate::PointMass{args[0]});
    } else if (kind == "discrete" && !args.empty()) {
      out.emplace_back(simulate::Discrete{args, std::vector<double>(args.size(), 1.0 / args.size())});
    } else if (kind == "gaussian" && args.size() == 2) {
      out.emplace_back(simulate::GaussianQuantiles{args[0], args[1]});
    } else {
      s.fail("measures", fmt::format("cannot read test measure '{}'", item));
    }
  }
  return out;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Certify: return "certify";
    case Command::Simulate: return "simulate";
    case Command::Validate: return "validate";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

void RawConfig::set(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  const std::string section = dot == std::string::npos ? "" : dotted_key.substr(0, dot);
  const std::string key = dot == std::string::npos ? dotted_key : dotted_key.substr(dot + 1);
  const auto& known = known_keys();
  const auto sec = known.find(section);
  if (sec == known.end() || !sec->second.count(key)) {
    throw ConfigError(fmt::format("{}: unknown key '{}'", source, dotted_key));
  }
  auto& e = sections[section][key];
  e.value = value;
}

RawConfig parse(std::istream& is, const std::string& source) {
  RawConfig raw;
  raw.source = source;
  std::string section;
  std::string line;
  int lineno = 0;
  const auto& known = known_keys();
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("{}:{}: unterminated section header", source, lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty() || !known.count(section)) {
        throw ConfigError(fmt::format("{}:{}: unknown section [{}]", source, lineno, section));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, lineno));
    }
    if (!known.at(section).count(key)) {
      throw ConfigError(fmt::format("{}:{}: unknown key '{}' in [{}]", source, lineno, key, section));
    }
    if (raw.sections[section].count(key)) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", source, lineno, key));
    }
    raw.sections[section][key] = Entry{value, lineno};
  }
  return raw;
}

RawConfig read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  RawConfig raw = parse(in, path.string());
  raw.base_dir = path.parent_path();
  return raw;
}

RunConfig build(const RawConfig& raw) {
  RunConfig rc;
  const Section top(raw, "");
  const std::string cmd = top.text("command", "certify");
  if (cmd == "certify") rc.command = Command::Certify;
  else if (cmd == "simulate") rc.command = Command::Simulate;
  else if (cmd == "validate") rc.command = Command::Validate;
  else if (cmd == "sweep") rc.command = Command::Sweep;
  else top.fail("command", "expected certify, simulate, validate or sweep");
  rc.output = top.text("output", rc.output.string());
  rc.threads = static_cast<unsigned>(top.count("threads", 0));
  rc.seed = top.seed("seed", 1);
  rc.sweep_key = top.text("sweep_key", "");
  if (top.has("sweep_values")) rc.sweep_values = split(top.text("sweep_values", ""), ',');
  if (rc.command == Command::Sweep && (rc.sweep_key.empty() || rc.sweep_values.empty())) {
    top.fail("command", "sweep needs sweep_key and sweep_values");
  }

  rc.triplet = build_triplet(raw);
  rc.kernel = build_kernel(raw);

  const Section num(raw, "numerics");
  auto& q = rc.certify.profile.quad;
  q.rel_tol = num.number("rel_tol", q.rel_tol);
  q.abs_tol = num.number("abs_tol", q.abs_tol);
  q.max_intervals = static_cast<int>(num.count("max_intervals", q.max_intervals));
  if (!(q.rel_tol > 0.0)) num.fail("rel_tol", "tolerances must be positive");
  if (!(q.abs_tol > 0.0)) num.fail("abs_tol", "tolerances must be positive");
  auto& p = rc.certify.profile;
  p.window = num.number("window", p.window);
  p.t_step = num.number("t_step", p.t_step);
  p.s_min = num.number("s_min", p.s_min);
  p.s_max = num.number("s_max", p.s_max);
  p.s_points = static_cast<int>(num.count("s_points", p.s_points));
  p.search.s_min = num.number("search_s_min", p.search.s_min);
  p.search.s_max = num.number("search_s_max", p.search.s_max);
  p.search.points = static_cast<int>(num.count("search_points", p.search.points));
  p.search.refine_rounds = static_cast<int>(num.count("refine_rounds", p.search.refine_rounds));
  p.search.declared_s_independent = num.flag("s_independent", false);
  p.search.force_search = num.flag("force_search", false);
  p.threads = rc.threads;
  rc.certify.candidates = num.numbers("candidates", rc.certify.candidates);
  rc.negdef_pairs = num.count("negdef_pairs", rc.negdef_pairs);
  rc.lemma3_draws = num.count("lemma3_draws", rc.lemma3_draws);
  rc.lemma3_t_max = num.number("lemma3_t_max", rc.lemma3_t_max);

  if (raw.sections.count("simulate")) {
    const Section sim(raw, "simulate");
    simulate::SimConfig sc;
    sc.h = sim.number("h", sc.h);
    sc.window = sim.number("window", sc.window);
    sc.samples = sim.count("samples", sc.samples);
    sc.seed = sim.seed("seed", rc.seed);
    sc.threads = rc.threads;
    for (const auto& pt : split(sim.text("lags", ""), ';')) {
      std::vector<double> t;
      for (const auto& c : split(pt, ',')) {
        try {
          t.push_back(csv::parse_number(c));
        } catch (const std::exception&) {
          sim.fail("lags", fmt::format("'{}' is not a number", c));
        }
      }
      if (static_cast<int>(t.size()) != rc.kernel->dim()) {
        sim.fail("lags", "each lag needs one coordinate per kernel dimension");
      }
      sc.lags.push_back(std::move(t));
    }
    rc.simulation = sc;
    rc.sim_rho_bar = sim.number("rho_bar", rc.sim_rho_bar);
    rc.measures = parse_measures(sim);
  }
  return rc;
}

}  // namespace srd::config
