#include "gplab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gplab/io.hpp"

namespace gplab::config {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) return std::nullopt;
  return v;
}

template <class T>
std::optional<std::vector<T>> parse_list(const std::string& raw) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = parse_number<T>(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

std::string format(int v) { return std::to_string(v); }
std::string format(std::uint64_t v) { return std::to_string(v); }
std::string format(double v) { return io::format_double(v); }
template <class T>
std::string format(const std::vector<T>& v) {
  std::vector<std::string> s;
  for (const auto& x : v) s.push_back(format(x));
  return join(s, ", ");
}

const char* type_name(int) { return "an integer"; }
const char* type_name(std::uint64_t) { return "a non-negative integer"; }
const char* type_name(double) { return "a finite number"; }
template <class T>
const char* type_name(const std::vector<T>&) { return "a comma-separated list of numbers"; }

struct Key {
  std::string section, name;
  // Returns an error message on failure.
  std::function<std::optional<std::string>(RunConfig&, const std::string&, const fs::path&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key key(const char* sec, const char* name, T RunConfig::*m) {
  Key k{sec, name, {}, {}};
  k.get = [m](const RunConfig& c) { return format(c.*m); };
  k.set = [m, sec, name](RunConfig& c, const std::string& raw, const fs::path&) -> std::optional<std::string> {
    std::optional<T> v;
    if constexpr (std::is_same_v<T, std::vector<int>>) v = parse_list<int>(raw);
    else if constexpr (std::is_same_v<T, std::vector<double>>) v = parse_list<double>(raw);
    else v = parse_number<T>(raw);
    if (!v) return std::string(sec) + "." + name + " must be " + type_name(T{}) + ", got '" + trim(raw) + "'";
    c.*m = *v;
    return std::nullopt;
  };
  return k;
}

Key key(const char* sec, const char* name, std::string RunConfig::*m, bool is_path = false) {
  Key k{sec, name, {}, {}};
  k.get = [m](const RunConfig& c) { return c.*m; };
  k.set = [m, is_path](RunConfig& c, const std::string& raw, const fs::path& base) -> std::optional<std::string> {
    std::string v = trim(raw);
    // Relative paths are anchored at the config file so the config serializes unambiguously.
    const bool keyword = v == "gaussian" || v == "constant" || v == "plane_wave";
    if (is_path && !v.empty() && !keyword && fs::path(v).is_relative())
      v = (fs::absolute(base) / v).lexically_normal().string();
    c.*m = v;
    return std::nullopt;
  };
  return k;
}

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(key("run", "command", &RunConfig::command));
    k.push_back(key("run", "seed", &RunConfig::seed));
    k.push_back(key("run", "output_dir", &RunConfig::output_dir));
    k.push_back(key("grid", "dim", &RunConfig::dim));
    k.push_back(key("grid", "points", &RunConfig::points));
    k.push_back(key("grid", "length", &RunConfig::length));
    k.push_back(key("potential", "kind", &RunConfig::potential));
    k.push_back(key("potential", "depth", &RunConfig::depth));
    k.push_back(key("potential", "radius", &RunConfig::radius));
    k.push_back(key("potential", "dr", &RunConfig::dr));
    k.push_back(key("potential", "table", &RunConfig::table, true));
    k.push_back(key("scatter", "r_max", &RunConfig::r_max));
    k.push_back(key("scatter", "tol", &RunConfig::scatter_tol));
    k.push_back(key("scatter", "trial_family_size", &RunConfig::trial_family_size));
    k.push_back(key("scatter", "scaling_factors", &RunConfig::scaling_factors));
    k.push_back(key("gp", "coupling", &RunConfig::coupling));
    k.push_back(key("gp", "trap_strength", &RunConfig::trap_strength));
    k.push_back(key("gp", "initial", &RunConfig::initial, true));
    k.push_back(key("gp", "width", &RunConfig::width));
    k.push_back(key("gp", "wave_vector", &RunConfig::wave_vector));
    k.push_back(key("gp", "dtau", &RunConfig::dtau));
    k.push_back(key("gp", "tol", &RunConfig::gp_tol));
    k.push_back(key("gp", "max_iterations", &RunConfig::max_iterations));
    k.push_back(key("gp", "dt", &RunConfig::dt));
    k.push_back(key("gp", "steps", &RunConfig::steps));
    k.push_back(key("gp", "sample_every", &RunConfig::sample_every));
    k.push_back(key("gp", "scheme", &RunConfig::scheme));
    k.push_back(key("manybody", "particles", &RunConfig::particles));
    k.push_back(key("manybody", "interaction", &RunConfig::interaction));
    k.push_back(key("manybody", "interaction_scale", &RunConfig::interaction_scale));
    k.push_back(key("manybody", "state", &RunConfig::state));
    k.push_back(key("manybody", "dt", &RunConfig::mb_dt));
    k.push_back(key("manybody", "steps", &RunConfig::mb_steps));
    k.push_back(key("manybody", "sample_every", &RunConfig::mb_sample_every));
    k.push_back(key("manybody", "gp_substeps", &RunConfig::gp_substeps));
    k.push_back(key("manybody", "krylov_dim", &RunConfig::krylov_dim));
    k.push_back(key("manybody", "krylov_tol", &RunConfig::krylov_tol));
    k.push_back(key("manybody", "eig_tol", &RunConfig::eig_tol));
    k.push_back(key("manybody", "dimension_cap", &RunConfig::dimension_cap));
    k.push_back(key("renorm", "cutoff", &RunConfig::cutoff));
    k.push_back(key("renorm", "identity_tol", &RunConfig::identity_tol));
    k.push_back(key("renorm", "random_draws", &RunConfig::random_draws));
    k.push_back(key("renorm", "fd_dt", &RunConfig::fd_dt));
    k.push_back(key("experiment", "particles", &RunConfig::experiment_particles));
    k.push_back(key("experiment", "depths", &RunConfig::experiment_depths));
    k.push_back(key("experiment", "trap_strength", &RunConfig::experiment_trap));
    k.push_back(key("experiment", "interaction", &RunConfig::experiment_interaction));
    k.push_back(key("experiment", "label", &RunConfig::label));
    return k;
  }();
  return keys;
}

bool one_of(const std::string& v, std::initializer_list<const char*> opts) {
  return std::any_of(opts.begin(), opts.end(), [&](const char* o) { return v == o; });
}

bool power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

void validate(const RunConfig& c, std::vector<std::string>& err) {
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) err.push_back(msg);
  };
  const auto& cmds = commands();
  need(std::find(cmds.begin(), cmds.end(), c.command) != cmds.end(),
       "run.command must be one of " + join(cmds, ", ") + ", got '" + c.command + "'");
  need(!c.output_dir.empty(), "run.output_dir must not be empty");

  need(c.dim >= 1 && c.dim <= 3, "grid.dim must be 1, 2 or 3");
  need(power_of_two(c.points) && c.points >= 2, "grid.points must be a power of two >= 2");
  need(c.length > 0, "grid.length must be positive");

  need(one_of(c.potential, {"zero", "square_well", "smooth_bump", "table"}),
       "potential.kind must be zero, square_well, smooth_bump or table");
  need(c.depth >= 0, "potential.depth must be >= 0 (V is non-negative)");
  need(c.radius > 0, "potential.radius must be positive");
  need(c.dr > 0, "potential.dr must be positive");
  if (c.potential == "square_well" && c.dr > 0) {
    const double q = c.radius / c.dr;
    need(std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q), "potential.radius must be a multiple of potential.dr");
  }
  if (c.potential == "table") need(!c.table.empty() && fs::is_regular_file(c.table), "potential.table file '" + c.table + "' does not exist");
  if (c.potential != "table") need(c.r_max > 2 * c.radius, "scatter.r_max must exceed 2 * potential.radius");
  need(c.scatter_tol > 0, "scatter.tol must be positive");
  need(c.trial_family_size >= 1, "scatter.trial_family_size must be >= 1");
  need(std::all_of(c.scaling_factors.begin(), c.scaling_factors.end(), [](int n) { return n >= 1; }),
       "scatter.scaling_factors must be >= 1");

  need(c.coupling >= 0, "gp.coupling must satisfy g >= 0 (focusing nonlinearities are not supported)");
  need(c.trap_strength >= 0, "gp.trap_strength must be >= 0");
  if (!one_of(c.initial, {"gaussian", "constant", "plane_wave"}))
    need(fs::is_regular_file(c.initial), "gp.initial must be gaussian, constant, plane_wave or an existing GPF1 file, got '" + c.initial + "'");
  need(c.width > 0, "gp.width must be positive");
  need(c.wave_vector.size() == 3, "gp.wave_vector must have three entries");
  need(c.dtau >= 0, "gp.dtau must be >= 0");
  need(c.gp_tol > 0, "gp.tol must be positive");
  need(c.max_iterations >= 1, "gp.max_iterations must be >= 1");
  need(c.dt > 0, "gp.dt must be positive");
  need(c.steps >= 0, "gp.steps must be >= 0");
  need(c.sample_every >= 1, "gp.sample_every must be >= 1");
  need(one_of(c.scheme, {"strang", "yoshida4"}), "gp.scheme must be strang or yoshida4");

  need(c.particles >= 1 && c.particles <= 255, "manybody.particles must be in [1, 255]");
  need(one_of(c.interaction, {"sampled", "cell_averaged"}), "manybody.interaction must be sampled or cell_averaged");
  need(c.interaction_scale >= 0, "manybody.interaction_scale must be >= 0 (0 selects N)");
  need(one_of(c.state, {"product", "correlated", "ground"}), "manybody.state must be product, correlated or ground");
  need(c.mb_dt > 0, "manybody.dt must be positive");
  need(c.mb_steps >= 0, "manybody.steps must be >= 0");
  need(c.mb_sample_every >= 1, "manybody.sample_every must be >= 1");
  need(c.gp_substeps >= 1, "manybody.gp_substeps must be >= 1");
  need(c.krylov_dim >= 4 && c.krylov_dim <= 200, "manybody.krylov_dim must be in [4, 200]");
  need(c.krylov_tol > 0, "manybody.krylov_tol must be positive");
  need(c.eig_tol > 0, "manybody.eig_tol must be positive");
  need(c.dimension_cap >= 1, "manybody.dimension_cap must be >= 1");

  need(c.cutoff > 0 && c.cutoff <= 0.5 * c.length, "renorm.cutoff must be in (0, grid.length / 2]");
  need(c.identity_tol > 0, "renorm.identity_tol must be positive");
  need(c.random_draws >= 1, "renorm.random_draws must be >= 1");
  need(c.fd_dt > 0, "renorm.fd_dt must be positive");

  need(!c.experiment_particles.empty() &&
           std::all_of(c.experiment_particles.begin(), c.experiment_particles.end(), [](int n) { return n >= 1 && n <= 255; }),
       "experiment.particles must be a non-empty list of values in [1, 255]");
  need(!c.experiment_depths.empty() &&
           std::all_of(c.experiment_depths.begin(), c.experiment_depths.end(), [](double d) { return d >= 0; }),
       "experiment.depths must be a non-empty list of values >= 0");
  need(c.experiment_trap > 0, "experiment.trap_strength must be positive");
  need(one_of(c.experiment_interaction, {"sampled", "cell_averaged"}),
       "experiment.interaction must be sampled or cell_averaged");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration:\n  " + join(errors, "\n  ")), errors_(std::move(errors)) {}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"scatter",         "groundstate", "evolve-gp",
                                          "evolve-manybody", "verify-ops",  "experiment-trapped-depletion"};
  return c;
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  // Boost's ini reader only knows ';' comments.
  std::stringstream in(text), clean;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] == '#') continue;
    clean << line << '\n';
  }
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(clean, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({"syntax error on line " + std::to_string(e.line()) + ": " + e.message()});
  }
  std::map<std::pair<std::string, std::string>, const Key*> index;
  for (const auto& k : schema()) index[{k.section, k.name}] = &k;

  RunConfig cfg;
  std::vector<std::string> err;
  for (const auto& [sec, body] : pt) {
    if (body.empty() && !body.data().empty()) {
      err.push_back("key '" + sec + "' must belong to a [section]");
      continue;
    }
    for (const auto& [name, val] : body) {
      auto it = index.find({sec, name});
      if (it == index.end()) {
        err.push_back("unknown key '" + sec + "." + name + "'");
        continue;
      }
      if (auto e = it->second->set(cfg, val.data(), base_dir)) err.push_back(*e);
    }
  }
  validate(cfg, err);
  if (!err.empty()) throw ConfigError(err);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  return parse_config_text(ss.str(), base.string());
}

std::string serialize(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& k : schema()) {
    if (k.section != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + k.section + "]\n";
      section = k.section;
    }
    out += k.name + " = " + k.get(cfg) + "\n";
  }
  return out;
}

}  // namespace gplab::config
