#include "grw/config.hpp"

#include "grw/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace grw {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& value, int line) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw ConfigError("expected a number, got '" + value + "'", line);
  return out;
}

long long parse_integer(const std::string& value, int line) {
  long long out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("expected an integer, got '" + value + "'", line);
  return out;
}

std::vector<double> parse_list(const std::string& value, int line) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list entry", line);
    out.push_back(parse_real(item, line));
  }
  return out;
}

template <typename Enum>
Enum parse_enum(const std::string& value, const std::map<std::string, Enum>& names, int line) {
  const auto it = names.find(value);
  if (it == names.end()) {
    std::string allowed;
    for (const auto& [name, _] : names) allowed += (allowed.empty() ? "" : " | ") + name;
    throw ConfigError("invalid value '" + value + "' (expected " + allowed + ")", line);
  }
  return it->second;
}

std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (double v : values) out += (out.empty() ? "" : ", ") + format_real(v);
  return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::istream& in) {
  ScenarioConfig c;
  double box_lower = c.box.lower();
  double box_upper = c.box.upper();
  int box_line = 0;
  std::optional<double> density_min, density_max;
  std::optional<Eigen::Index> density_points;
  int density_line = 0;

  using Setter = std::function<void(const std::string&, int)>;
  const std::map<std::string, Setter> setters{
      {"kind", [&](const std::string& v, int l) {
         c.kind = parse_enum<ScenarioKind>(
             v, {{"cat", ScenarioKind::Cat}, {"tail", ScenarioKind::Tail}, {"marbles", ScenarioKind::Marbles}}, l);
       }},
      {"backend", [&](const std::string& v, int l) {
         c.backend = parse_enum<Backend>(v, {{"branch", Backend::Branch}, {"grid", Backend::Grid}}, l);
       }},
      {"ontology", [&](const std::string& v, int l) {
         c.ontology = parse_enum<Ontology>(
             v, {{"grw0", Ontology::GRW0}, {"grwf", Ontology::GRWf}, {"grwm", Ontology::GRWm}}, l);
       }},
      {"history", [&](const std::string& v, int l) {
         c.history = parse_enum<History>(
             v, {{"collapsed_past", History::CollapsedPast}, {"fresh_preparation", History::FreshPreparation}}, l);
       }},
      {"hamiltonian", [&](const std::string& v, int l) {
         c.free_hamiltonian = parse_enum<bool>(v, {{"zero", false}, {"free", true}}, l);
       }},
      {"c1_sq", [&](const std::string& v, int l) { c.c1_sq = parse_real(v, l); }},
      {"n_marbles", [&](const std::string& v, int l) { c.n_marbles = static_cast<int>(parse_integer(v, l)); }},
      {"particles", [&](const std::string& v, int l) { c.particles = static_cast<int>(parse_integer(v, l)); }},
      {"box_lower", [&](const std::string& v, int l) { box_lower = parse_real(v, l); box_line = l; }},
      {"box_upper", [&](const std::string& v, int l) { box_upper = parse_real(v, l); box_line = l; }},
      {"anchor_inside", [&](const std::string& v, int l) { c.anchor_inside = parse_real(v, l); }},
      {"anchor_outside", [&](const std::string& v, int l) { c.anchor_outside = parse_real(v, l); }},
      {"lambda_eff", [&](const std::string& v, int l) { c.lambda_eff = parse_real(v, l); }},
      {"sigma", [&](const std::string& v, int l) { c.sigma = parse_real(v, l); }},
      {"total_time", [&](const std::string& v, int l) { c.total_time = parse_real(v, l); }},
      {"particle_mass", [&](const std::string& v, int l) { c.particle_mass = parse_real(v, l); }},
      {"masses", [&](const std::string& v, int l) { c.masses = parse_list(v, l); }},
      {"theta_m", [&](const std::string& v, int l) { c.theta_m = parse_real(v, l); }},
      {"theta_f", [&](const std::string& v, int l) { c.theta_f = parse_real(v, l); }},
      {"window", [&](const std::string& v, int l) { c.window = parse_real(v, l); }},
      {"martingale_time", [&](const std::string& v, int l) { c.martingale_time = parse_real(v, l); }},
      {"sample_interval", [&](const std::string& v, int l) { c.sample_interval = parse_real(v, l); }},
      {"snapshot_times", [&](const std::string& v, int l) { c.snapshot_times = parse_list(v, l); }},
      {"grid_x_min", [&](const std::string& v, int l) { c.grid_x_min = parse_real(v, l); }},
      {"grid_x_max", [&](const std::string& v, int l) { c.grid_x_max = parse_real(v, l); }},
      {"grid_points", [&](const std::string& v, int l) { c.grid_points = parse_integer(v, l); }},
      {"packet_width", [&](const std::string& v, int l) { c.packet_width = parse_real(v, l); }},
      {"density_x_min", [&](const std::string& v, int l) { density_min = parse_real(v, l); density_line = l; }},
      {"density_x_max", [&](const std::string& v, int l) { density_max = parse_real(v, l); density_line = l; }},
      {"density_points", [&](const std::string& v, int l) { density_points = parse_integer(v, l); density_line = l; }},
      {"z_max", [&](const std::string& v, int l) { c.z_max = parse_real(v, l); }},
      {"p_min", [&](const std::string& v, int l) { c.p_min = parse_real(v, l); }},
      {"first_window_flashes", [&](const std::string& v, int l) {
         const long long n = parse_integer(v, l);
         if (n < 1) throw ConfigError("first_window_flashes must be >= 1", l);
         c.first_window_flashes = static_cast<std::size_t>(n);
       }},
      {"oracle_sequences", [&](const std::string& v, int l) {
         const long long n = parse_integer(v, l);
         if (n < 1) throw ConfigError("oracle_sequences must be >= 1", l);
         c.oracle_sequences = static_cast<std::size_t>(n);
       }},
  };

  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    const std::string text = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (text.empty()) continue;
    if (text.front() == '[') throw ConfigError("sections are not supported; use flat key = value lines", line);
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", line);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", line);
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'", line);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);
    it->second(value, line);
  }

  try {
    c.box = Region(box_lower, box_upper);
  } catch (const std::invalid_argument&) {
    throw ConfigError("box_lower must be < box_upper", box_line);
  }
  if (density_min || density_max || density_points) {
    if (!(density_min && density_max && density_points))
      throw ConfigError("density_x_min, density_x_max and density_points must be given together", density_line);
    c.density_grid = SpatialGrid{*density_min, *density_max, *density_points};
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_scenario_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_scenario_config(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "kind = " << to_string(c.kind) << '\n'
     << "backend = " << to_string(c.backend) << '\n'
     << "ontology = " << to_string(c.ontology) << '\n'
     << "history = " << to_string(c.history) << '\n'
     << "hamiltonian = " << (c.free_hamiltonian ? "free" : "zero") << '\n'
     << "c1_sq = " << format_real(c.c1_sq) << '\n'
     << "n_marbles = " << c.n_marbles << '\n'
     << "particles = " << c.particles << '\n'
     << "box_lower = " << format_real(c.box.lower()) << '\n'
     << "box_upper = " << format_real(c.box.upper()) << '\n'
     << "anchor_inside = " << format_real(c.anchor_inside) << '\n'
     << "anchor_outside = " << format_real(c.anchor_outside) << '\n'
     << "lambda_eff = " << format_real(c.lambda_eff) << '\n'
     << "sigma = " << format_real(c.sigma) << '\n'
     << "total_time = " << format_real(c.total_time) << '\n'
     << "particle_mass = " << format_real(c.particle_mass) << '\n';
  if (!c.masses.empty()) os << "masses = " << format_list(c.masses) << '\n';
  os << "theta_m = " << format_real(c.theta_m) << '\n' << "theta_f = " << format_real(c.theta_f) << '\n';
  if (c.window) os << "window = " << format_real(*c.window) << '\n';
  if (c.martingale_time) os << "martingale_time = " << format_real(*c.martingale_time) << '\n';
  if (c.sample_interval) os << "sample_interval = " << format_real(*c.sample_interval) << '\n';
  if (!c.snapshot_times.empty()) os << "snapshot_times = " << format_list(c.snapshot_times) << '\n';
  os << "grid_x_min = " << format_real(c.grid_x_min) << '\n'
     << "grid_x_max = " << format_real(c.grid_x_max) << '\n'
     << "grid_points = " << c.grid_points << '\n'
     << "packet_width = " << format_real(c.packet_width) << '\n';
  if (c.density_grid)
    os << "density_x_min = " << format_real(c.density_grid->x_min) << '\n'
       << "density_x_max = " << format_real(c.density_grid->x_max) << '\n'
       << "density_points = " << c.density_grid->points << '\n';
  os << "z_max = " << format_real(c.z_max) << '\n'
     << "p_min = " << format_real(c.p_min) << '\n'
     << "first_window_flashes = " << c.first_window_flashes << '\n'
     << "oracle_sequences = " << c.oracle_sequences << '\n';
  return os.str();
}

}  // namespace grw
