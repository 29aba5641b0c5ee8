#include "tclrl/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tclrl/errors.hpp"

namespace tclrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Values are parsed strictly: the whole string must be consumed.
struct BadValue : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string format(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string format(int v) { return std::to_string(v); }
std::string format(long v) { return std::to_string(v); }
std::string format(std::uint64_t v) { return std::to_string(v); }
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(const std::string& v) { return v; }
std::string format(const std::filesystem::path& v) { return v.string(); }
template <typename T>
std::string format(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format(v[i]);
  return out;
}

template <typename T>
T parse_number(const std::string& s, const char* what) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw BadValue(std::string("expected ") + what + ", got '" + s + "'");
  return v;
}

template <typename T>
T parse(const std::string& s);
template <>
double parse<double>(const std::string& s) {
  const double v = parse_number<double>(s, "a number");
  if (!std::isfinite(v)) throw BadValue("expected a finite number, got '" + s + "'");
  return v;
}
template <>
int parse<int>(const std::string& s) { return parse_number<int>(s, "an integer"); }
template <>
long parse<long>(const std::string& s) { return parse_number<long>(s, "an integer"); }
template <>
std::uint64_t parse<std::uint64_t>(const std::string& s) {
  return parse_number<std::uint64_t>(s, "a non-negative integer");
}
template <>
bool parse<bool>(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw BadValue("expected true or false, got '" + s + "'");
}
template <>
std::string parse<std::string>(const std::string& s) { return s; }
template <>
std::filesystem::path parse<std::filesystem::path>(const std::string& s) { return s; }
template <>
std::vector<std::uint64_t> parse<std::vector<std::uint64_t>>(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse<std::uint64_t>(trim(item)));
  return out;
}
template <>
std::vector<long> parse<std::vector<long>>(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse<long>(trim(item)));
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  bool hashed = true;
};

template <typename Acc>
Field field(const char* section, const char* key, Acc acc, bool hashed = true) {
  using T = std::remove_reference_t<decltype(acc(std::declval<ScenarioConfig&>()))>;
  return Field{section, key,
               [acc](const ScenarioConfig& c) { return format(acc(const_cast<ScenarioConfig&>(c))); },
               [acc](ScenarioConfig& c, const std::string& v) { acc(c) = parse<T>(v); }, hashed};
}

#define TCLRL_ACC(expr) [](ScenarioConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(field("experiment", "scenario", TCLRL_ACC(scenario)));
    f.push_back(field("experiment", "days", TCLRL_ACC(days)));
    f.push_back(field("experiment", "history", TCLRL_ACC(history)));
    f.push_back(field("experiment", "seeds", TCLRL_ACC(seeds), false));
    f.push_back(field("experiment", "approx", TCLRL_ACC(approx.kind), false));
    f.push_back(field("experiment", "full_state_approx", TCLRL_ACC(full_state_approx)));
    f.push_back(field("experiment", "baselines", TCLRL_ACC(baselines)));
    f.push_back(field("fqi", "iterations", TCLRL_ACC(fqi.iterations)));
    f.push_back(field("train", "learning_rate", TCLRL_ACC(approx.train.lr)));
    f.push_back(field("train", "rho", TCLRL_ACC(approx.train.rho)));
    f.push_back(field("train", "epsilon", TCLRL_ACC(approx.train.eps)));
    f.push_back(field("train", "minibatch", TCLRL_ACC(approx.train.minibatch)));
    f.push_back(field("train", "epochs", TCLRL_ACC(approx.train.epochs)));
    f.push_back(field("train", "warm_start", TCLRL_ACC(approx.train.warm_start)));
    f.push_back(field("trees", "n_trees", TCLRL_ACC(approx.trees.n_trees)));
    f.push_back(field("trees", "n_min", TCLRL_ACC(approx.trees.n_min)));
    f.push_back(field("trees", "k", TCLRL_ACC(approx.trees.k)));
    f.push_back(field("network", "mlp_hidden", TCLRL_ACC(approx.mlp_hidden)));
    f.push_back(field("network", "cnn_filters", TCLRL_ACC(approx.cnn_filters)));
    f.push_back(field("network", "cnn_width", TCLRL_ACC(approx.cnn_width)));
    f.push_back(field("network", "cnn_aux_hidden", TCLRL_ACC(approx.cnn_aux_hidden)));
    f.push_back(field("network", "lstm_cell", TCLRL_ACC(approx.lstm_cell)));
    f.push_back(field("network", "head_hidden", TCLRL_ACC(approx.head_hidden)));
    f.push_back(field("building", "c_air", TCLRL_ACC(building.c_air)));
    f.push_back(field("building", "ua_air", TCLRL_ACC(building.ua_air)));
    f.push_back(field("building", "c_mass", TCLRL_ACC(building.c_mass)));
    f.push_back(field("building", "h_mass", TCLRL_ACC(building.h_mass)));
    f.push_back(field("building", "p_rated_kw", TCLRL_ACC(building.p_rated_kw)));
    f.push_back(field("building", "cop", TCLRL_ACC(building.cop)));
    f.push_back(field("building", "t_min", TCLRL_ACC(building.t_min)));
    f.push_back(field("building", "t_max", TCLRL_ACC(building.t_max)));
    f.push_back(field("building", "sigma_w", TCLRL_ACC(building.sigma_w)));
    f.push_back(field("building", "dt_sim", TCLRL_ACC(building.dt_sim)));
    f.push_back(field("building", "dt_ctrl", TCLRL_ACC(building.dt_ctrl)));
    f.push_back(field("building", "initial_air", TCLRL_ACC(building_initial.t_air)));
    f.push_back(field("building", "initial_mass", TCLRL_ACC(building_initial.t_mass)));
    f.push_back(field("tank", "volume_l", TCLRL_ACC(tank.volume_l)));
    f.push_back(field("tank", "layers", TCLRL_ACC(tank.layers)));
    f.push_back(field("tank", "p_rated_kw", TCLRL_ACC(tank.p_rated_kw)));
    f.push_back(field("tank", "t_min", TCLRL_ACC(tank.t_min)));
    f.push_back(field("tank", "t_max", TCLRL_ACC(tank.t_max)));
    f.push_back(field("tank", "t_inlet", TCLRL_ACC(tank.t_inlet)));
    f.push_back(field("tank", "t_ambient", TCLRL_ACC(tank.t_ambient)));
    f.push_back(field("tank", "ua_loss", TCLRL_ACC(tank.ua_loss)));
    f.push_back(field("tank", "heater_first", TCLRL_ACC(tank.heater_first)));
    f.push_back(field("tank", "heater_last", TCLRL_ACC(tank.heater_last)));
    f.push_back(field("tank", "mix_setpoint", TCLRL_ACC(tank.mix_setpoint)));
    f.push_back(field("tank", "dt_sim", TCLRL_ACC(tank.dt_sim)));
    f.push_back(field("tank", "dt_ctrl", TCLRL_ACC(tank.dt_ctrl)));
    f.push_back(field("tank", "mean_daily_draw_l", TCLRL_ACC(tank.mean_daily_draw_l)));
    f.push_back(field("tank", "initial_c", TCLRL_ACC(tank_initial_c)));
    f.push_back(field("data", "seed", TCLRL_ACC(data.seed)));
    f.push_back(field("data", "weather_csv", TCLRL_ACC(data.weather_csv)));
    f.push_back(field("data", "price_csv", TCLRL_ACC(data.price_csv)));
    f.push_back(field("data", "tap_csv", TCLRL_ACC(data.tap_csv)));
    f.push_back(field("data", "forecast_noise_std", TCLRL_ACC(data.forecast_noise_std)));
    f.push_back(field("weather", "mean_c", TCLRL_ACC(data.weather.mean_c)));
    f.push_back(field("weather", "day_offset_std", TCLRL_ACC(data.weather.day_offset_std)));
    f.push_back(field("weather", "amplitude_c", TCLRL_ACC(data.weather.amplitude_c)));
    f.push_back(field("weather", "min_hour", TCLRL_ACC(data.weather.min_hour)));
    f.push_back(field("weather", "ar_phi", TCLRL_ACC(data.weather.ar_phi)));
    f.push_back(field("weather", "noise_std", TCLRL_ACC(data.weather.noise_std)));
    f.push_back(field("price", "base", TCLRL_ACC(data.price.base)));
    f.push_back(field("price", "morning_peak", TCLRL_ACC(data.price.morning_peak)));
    f.push_back(field("price", "morning_hour", TCLRL_ACC(data.price.morning_hour)));
    f.push_back(field("price", "evening_peak", TCLRL_ACC(data.price.evening_peak)));
    f.push_back(field("price", "evening_hour", TCLRL_ACC(data.price.evening_hour)));
    f.push_back(field("price", "peak_width_h", TCLRL_ACC(data.price.peak_width_h)));
    f.push_back(field("price", "night_dip", TCLRL_ACC(data.price.night_dip)));
    f.push_back(field("price", "day_level_std", TCLRL_ACC(data.price.day_level_std)));
    f.push_back(field("price", "noise_std", TCLRL_ACC(data.price.noise_std)));
    f.push_back(field("tap", "intensity_scale", TCLRL_ACC(data.tap.intensity_scale)));
    f.push_back(field("tap", "small_min_l", TCLRL_ACC(data.tap.small_min_l)));
    f.push_back(field("tap", "small_max_l", TCLRL_ACC(data.tap.small_max_l)));
    f.push_back(field("tap", "shower_min_l", TCLRL_ACC(data.tap.shower_min_l)));
    f.push_back(field("tap", "shower_max_l", TCLRL_ACC(data.tap.shower_max_l)));
    f.push_back(field("tap", "shower_share", TCLRL_ACC(data.tap.shower_share)));
    f.push_back(field("tap", "morning_hour", TCLRL_ACC(data.tap.morning_hour)));
    f.push_back(field("tap", "evening_hour", TCLRL_ACC(data.tap.evening_hour)));
    f.push_back(field("tap", "peak_width_h", TCLRL_ACC(data.tap.peak_width_h)));
    f.push_back(field("tap", "base_intensity", TCLRL_ACC(data.tap.base_intensity)));
    return f;
  }();
  return table;
}

#undef TCLRL_ACC

// Line of each "section.key" in the source text, for diagnostics.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string section;
  int n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      lines.emplace(section, n);
    } else if (const auto eq = t.find('='); eq != std::string::npos) {
      lines.emplace(section + "." + trim(t.substr(0, eq)), n);
    }
  }
  return lines;
}

std::string canonical(const ScenarioConfig& cfg, bool hashed_only) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (hashed_only && !f.hashed) continue;
    if (f.section != section) {
      out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(origin, static_cast<int>(e.line()), e.message());
  }
  const auto lines = key_lines(text);
  const auto line_of = [&](const std::string& k) {
    const auto it = lines.find(k);
    return it == lines.end() ? 0 : it->second;
  };

  std::map<std::string, const Field*> by_name;
  for (const Field& f : fields()) by_name[f.section + "." + f.key] = &f;

  ScenarioConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ParseError(origin, line_of("." + section), "key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto it = by_name.find(name);
      if (it == by_name.end()) throw ParseError(origin, line_of(name), "unknown key '" + name + "'");
      try {
        it->second->set(cfg, trim(value.data()));
      } catch (const BadValue& e) {
        throw ParseError(origin, line_of(name), name + ": " + e.what());
      }
    }
  }
  for (auto* p : {&cfg.data.weather_csv, &cfg.data.price_csv, &cfg.data.tap_csv})
    if (!p->empty() && p->is_relative() && !base_dir.empty()) *p = (base_dir / *p).lexically_normal();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    int line = 0;
    if (colon != std::string::npos)
      for (const Field& f : fields())
        if (f.key == msg.substr(0, colon) && line_of(f.section + "." + f.key) > 0)
          line = line_of(f.section + "." + f.key);
    throw ParseError(origin, line, msg);
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

std::string serialize_config(const ScenarioConfig& cfg) { return canonical(cfg, false); }

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : canonical(cfg, true)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tclrl
