#include "tclrl/exogenous.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "tclrl/errors.hpp"

namespace tclrl {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, int line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ParseError(path.string(), line, "expected a finite number, got '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::filesystem::path& path, int line) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(path.string(), line, "expected an integer, got '" + s + "'");
  return v;
}

// Opens a CSV and checks its header; returns the stream positioned at the first data row.
std::ifstream open_csv(const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string first;
  if (!std::getline(in, first)) throw ParseError(path.string(), 1, "empty file");
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
  if (trim(first) != header) throw ParseError(path.string(), 1, "expected header '" + header + "'");
  return in;
}

// Minutes since 1970-01-01 for "YYYY-MM-DD[T ]HH:MM[:SS][Z]".
long long parse_timestamp(const std::string& s, const std::filesystem::path& path, int line) {
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  char sep = 0;
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &hh, &mm, &ss);
  if (n < 6 || (sep != 'T' && sep != ' '))
    throw ParseError(path.string(), line, "malformed ISO-8601 timestamp '" + s + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59)
    throw ParseError(path.string(), line, "invalid date or time '" + s + "'");
  const long long days = sys_days{ymd}.time_since_epoch().count();
  // Seconds are validated but readings are binned at minute resolution.
  return days * 1440 + hh * 60 + mm;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double gaussian_bump(double hour, double centre, double width) {
  const double d = hour - centre;
  return std::exp(-0.5 * d * d / (width * width));
}

}  // namespace

Eigen::VectorXd ExogenousDay::draw_per_slot() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kSlotsPerDay);
  for (const DrawEvent& e : draws) v(e.quarter - 1) += e.liters;
  return v;
}

std::mt19937_64 day_rng(std::uint64_t seed, int day, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(day), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Eigen::VectorXd synth_weather(int day, std::uint64_t seed, const WeatherSynthParams& p) {
  auto rng = day_rng(seed, day, 1);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double offset = p.day_offset_std * unit(rng);
  const double innovation = p.noise_std * std::sqrt(std::max(0.0, 1.0 - p.ar_phi * p.ar_phi));
  double ar = p.noise_std * unit(rng);
  Eigen::VectorXd t(kSlotsPerDay);
  for (int q = 0; q < kSlotsPerDay; ++q) {
    const double hour = 0.25 * q;
    const double daily = -p.amplitude_c * std::cos(2.0 * std::numbers::pi * (hour - p.min_hour) / 24.0);
    if (q > 0) ar = p.ar_phi * ar + innovation * unit(rng);
    t(q) = p.mean_c + offset + daily + ar;
  }
  return t;
}

std::vector<Eigen::VectorXd> load_weather_csv(const std::filesystem::path& path) {
  std::ifstream in = open_csv(path, "timestamp,temp_c");
  std::vector<std::pair<long long, double>> readings;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw ParseError(path.string(), lineno, "expected 2 columns");
    const long long t = parse_timestamp(cells[0], path, lineno);
    const double v = parse_double(cells[1], path, lineno);
    if (!readings.empty() && t <= readings.back().first)
      throw ParseError(path.string(), lineno, "timestamps must be strictly increasing");
    readings.emplace_back(t, v);
  }
  if (readings.empty()) throw ParseError(path.string(), 0, "no data rows");

  long long spacing = 15;
  for (std::size_t i = 1; i < readings.size(); ++i)
    spacing = (i == 1) ? readings[1].first - readings[0].first
                       : std::min(spacing, readings[i].first - readings[i - 1].first);

  const long long start = (readings.front().first / 1440) * 1440;
  const long long end = (readings.back().first / 1440 + 1) * 1440;
  const auto n_q = static_cast<std::size_t>((end - start) / 15);
  std::vector<double> weighted(n_q, 0.0), covered(n_q, 0.0);
  for (std::size_t i = 0; i < readings.size(); ++i) {
    const long long a = readings[i].first;
    long long b = a + spacing;
    if (i + 1 < readings.size()) b = std::min(b, readings[i + 1].first);
    for (long long m = a; m < b; ++m) {
      const auto q = static_cast<std::size_t>((m - start) / 15);
      if (q >= n_q) break;
      weighted[q] += readings[i].second;
      covered[q] += 1.0;
    }
  }

  std::vector<double> grid(n_q, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t q = 0; q < n_q; ++q)
    if (covered[q] > 0) grid[q] = weighted[q] / covered[q];

  constexpr std::size_t kMaxGap = 4;
  std::size_t q = 0;
  while (q < n_q) {
    if (!std::isnan(grid[q])) {
      ++q;
      continue;
    }
    std::size_t r = q;
    while (r < n_q && std::isnan(grid[r])) ++r;
    const std::size_t gap = r - q;
    if (gap > kMaxGap)
      throw ParseError(path.string(), 0,
                       "gap of " + std::to_string(gap) + " quarters starting at day " + std::to_string(q / 96) +
                           " quarter " + std::to_string(q % 96 + 1));
    const bool has_left = q > 0;
    const bool has_right = r < n_q;
    for (std::size_t k = q; k < r; ++k) {
      if (has_left && has_right) {
        const double w = static_cast<double>(k - q + 1) / static_cast<double>(gap + 1);
        grid[k] = (1.0 - w) * grid[q - 1] + w * grid[r];
      } else {
        grid[k] = has_left ? grid[q - 1] : grid[r];
      }
    }
    q = r;
  }

  std::vector<Eigen::VectorXd> days(n_q / kSlotsPerDay, Eigen::VectorXd(kSlotsPerDay));
  for (std::size_t k = 0; k < n_q; ++k) days[k / kSlotsPerDay](static_cast<Eigen::Index>(k % kSlotsPerDay)) = grid[k];
  return days;
}

PriceProfile synth_price(int day, std::uint64_t seed, const PriceSynthParams& p) {
  auto rng = day_rng(seed, day, 2);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double level = p.day_level_std * unit(rng);
  Eigen::VectorXd lambda(kSlotsPerDay);
  for (int q = 0; q < kSlotsPerDay; ++q) {
    const double hour = 0.25 * q + 0.125;
    double v = p.base + level;
    v += p.morning_peak * gaussian_bump(hour, p.morning_hour, p.peak_width_h);
    v += p.evening_peak * gaussian_bump(hour, p.evening_hour, p.peak_width_h);
    v -= p.night_dip * gaussian_bump(hour, 3.0, 2.0 * p.peak_width_h);
    v += p.noise_std * unit(rng);
    lambda(q) = v;
  }
  return PriceProfile(lambda);
}

std::vector<PriceProfile> load_price_csv(const std::filesystem::path& path) {
  std::ifstream in = open_csv(path, "day,quarter,price_eur_per_kwh");
  std::map<int, std::pair<Eigen::VectorXd, std::vector<bool>>> by_day;
  std::map<int, int> last_line;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw ParseError(path.string(), lineno, "expected 3 columns");
    const int day = parse_int(cells[0], path, lineno);
    const int quarter = parse_int(cells[1], path, lineno);
    const double price = parse_double(cells[2], path, lineno);
    if (day < 0) throw ParseError(path.string(), lineno, "negative day");
    if (quarter < 1 || quarter > kSlotsPerDay) throw ParseError(path.string(), lineno, "quarter outside [1,96]");
    auto& [values, seen] = by_day.try_emplace(day, Eigen::VectorXd::Zero(kSlotsPerDay),
                                              std::vector<bool>(kSlotsPerDay, false)).first->second;
    if (seen[quarter - 1]) throw ParseError(path.string(), lineno, "duplicate quarter in day " + cells[0]);
    seen[quarter - 1] = true;
    values(quarter - 1) = price;
    last_line[day] = lineno;
  }
  if (by_day.empty()) throw ParseError(path.string(), 0, "no data rows");
  std::vector<PriceProfile> out;
  int expected = by_day.begin()->first;
  for (const auto& [day, entry] : by_day) {
    if (day != expected) throw ParseError(path.string(), last_line[day], "missing day " + std::to_string(expected));
    const auto count = std::count(entry.second.begin(), entry.second.end(), true);
    if (count != kSlotsPerDay)
      throw ParseError(path.string(), last_line[day],
                       "day " + std::to_string(day) + " has " + std::to_string(count) + " values, expected 96");
    out.emplace_back(entry.first);
    ++expected;
  }
  return out;
}

void write_price_csv(const std::filesystem::path& path, const std::vector<PriceProfile>& days) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "day,quarter,price_eur_per_kwh\n";
  for (std::size_t d = 0; d < days.size(); ++d)
    for (int q = 1; q <= kSlotsPerDay; ++q) out << d << ',' << q << ',' << format_double(days[d].at(q)) << '\n';
}

Eigen::VectorXd tap_intensity(const TapSynthParams& p) {
  Eigen::VectorXd w(kSlotsPerDay);
  for (int q = 0; q < kSlotsPerDay; ++q) {
    const double hour = 0.25 * q + 0.125;
    w(q) = p.base_intensity + gaussian_bump(hour, p.morning_hour, p.peak_width_h) +
           gaussian_bump(hour, p.evening_hour, p.peak_width_h);
  }
  return w / w.sum();
}

std::vector<DrawEvent> tap_profile(int day, std::uint64_t seed, double mean_daily_l, const TapSynthParams& p) {
  auto rng = day_rng(seed, day, 3);
  const Eigen::VectorXd intensity = tap_intensity(p);
  const double mean_shower = 0.5 * (p.shower_min_l + p.shower_max_l);
  const double mean_small = 0.5 * (p.small_min_l + p.small_max_l);
  const double showers_per_day = p.intensity_scale * mean_daily_l * p.shower_share / mean_shower;
  const double smalls_per_day = p.intensity_scale * mean_daily_l * (1.0 - p.shower_share) / mean_small;
  std::uniform_real_distribution<double> shower_vol(p.shower_min_l, p.shower_max_l);
  std::uniform_real_distribution<double> small_vol(p.small_min_l, p.small_max_l);

  std::vector<DrawEvent> events;
  for (int q = 0; q < kSlotsPerDay; ++q) {
    const double rate_shower = showers_per_day * intensity(q);
    const double rate_small = smalls_per_day * intensity(q);
    int n_shower = 0;
    int n_small = 0;
    if (rate_shower > 0) n_shower = std::poisson_distribution<int>(rate_shower)(rng);
    if (rate_small > 0) n_small = std::poisson_distribution<int>(rate_small)(rng);
    for (int i = 0; i < n_shower; ++i) events.push_back({q + 1, shower_vol(rng)});
    for (int i = 0; i < n_small; ++i) events.push_back({q + 1, small_vol(rng)});
  }
  return events;
}

std::vector<std::vector<DrawEvent>> load_tap_csv(const std::filesystem::path& path) {
  std::ifstream in = open_csv(path, "day,quarter,liters");
  std::vector<std::vector<DrawEvent>> days;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw ParseError(path.string(), lineno, "expected 3 columns");
    const int day = parse_int(cells[0], path, lineno);
    const int quarter = parse_int(cells[1], path, lineno);
    const double liters = parse_double(cells[2], path, lineno);
    if (day < 0) throw ParseError(path.string(), lineno, "negative day");
    if (quarter < 1 || quarter > kSlotsPerDay) throw ParseError(path.string(), lineno, "quarter outside [1,96]");
    if (liters < 0) throw ParseError(path.string(), lineno, "negative draw volume");
    if (static_cast<std::size_t>(day) >= days.size()) days.resize(static_cast<std::size_t>(day) + 1);
    days[static_cast<std::size_t>(day)].push_back({quarter, liters});
  }
  return days;
}

}  // namespace tclrl
