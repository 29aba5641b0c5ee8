#include "tclrl/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tclrl/config.hpp"

namespace tclrl {

std::string run_id(const std::string& scenario, const std::string& label, std::uint64_t seed) {
  return scenario + "-" + label + "-s" + std::to_string(seed);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

const DayLog* find_day(const std::map<std::uint64_t, ExperimentRun>& refs, std::uint64_t seed, std::size_t day) {
  const auto it = refs.find(seed);
  if (it == refs.end() || it->second.failed || day >= it->second.days.size()) return nullptr;
  return &it->second.days[day];
}

std::optional<double> try_scaled(double c, double c_full, double c_nc) {
  if (c_full == c_nc) return std::nullopt;
  return scaled_cost(c, c_full, c_nc);
}

double window_mean(const ExperimentRun& r, int window) {
  const std::size_t n = r.days.size();
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), n);
  double s = 0.0;
  for (std::size_t i = n - w; i < n; ++i) s += r.days[i].cost_eur;
  return s / static_cast<double>(w);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string daily_csv(const ResultSet& rs) {
  std::ostringstream out;
  out << "config_hash,run_id,approx,seed,day,epsilon,cost_eur,cumulative_cost_eur,scaled_cost,policy_distance,"
         "comfort_violation_min\n";
  const std::string hash = hash_hex(rs.hash);
  for (const ExperimentRun& r : rs.runs) {
    double cum = 0.0;
    for (std::size_t d = 0; d < r.days.size(); ++d) {
      const DayLog& day = r.days[d];
      cum += day.cost_eur;
      std::optional<double> scaled, dist;
      const DayLog* nc = find_day(rs.nocontrol, r.seed, d);
      const DayLog* fs = find_day(rs.fullstate, r.seed, d);
      if (nc && fs) scaled = try_scaled(day.cost_eur, fs->cost_eur, nc->cost_eur);
      if (fs) dist = policy_distance(day.u, fs->u);
      out << hash << ',' << run_id(rs.scenario, r.label, r.seed) << ',' << r.label << ',' << r.seed << ','
          << day.day << ',' << fmt(day.epsilon) << ',' << fmt(day.cost_eur) << ',' << fmt(cum) << ',' << opt(scaled)
          << ',' << opt(dist) << ',' << fmt(day.comfort_violation_min) << '\n';
    }
  }
  return out.str();
}

std::string slots_csv(const ResultSet& rs) {
  std::ostringstream out;
  out << "config_hash,run_id,day,quarter,u,u_phys,price," << (rs.scenario == "boiler" ? "soc" : "t_air_c") << '\n';
  const std::string hash = hash_hex(rs.hash);
  for (const ExperimentRun& r : rs.runs) {
    const std::string id = run_id(rs.scenario, r.label, r.seed);
    for (const DayLog& day : r.days)
      for (std::size_t k = 0; k < day.u.size(); ++k)
        out << hash << ',' << id << ',' << day.day << ',' << k + 1 << ',' << static_cast<int>(day.u[k]) << ','
            << fmt(day.u_phys[k]) << ',' << fmt(day.price[k]) << ',' << fmt(day.metric[k]) << '\n';
  }
  return out.str();
}

std::vector<SummaryRow> summarize(const ResultSet& rs, int window_days) {
  std::vector<std::string> labels;
  for (const auto& r : rs.runs)
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);

  std::vector<SummaryRow> rows;
  for (const std::string& label : labels) {
    std::vector<const ExperimentRun*> runs;
    for (const auto& r : rs.runs)
      if (r.label == label && !r.failed && !r.days.empty()) runs.push_back(&r);
    if (runs.empty()) continue;
    SummaryRow row;
    row.label = label;
    row.seeds = runs.size();
    row.window_days = std::min<int>(window_days, static_cast<int>(runs.front()->days.size()));

    std::vector<std::vector<double>> means;
    double c = 0.0, cf = 0.0, cn = 0.0, cum = 0.0, comfort = 0.0, dist = 0.0;
    std::size_t with_refs = 0, with_full = 0;
    for (const ExperimentRun* r : runs) {
      const double m = window_mean(*r, row.window_days);
      means.push_back({m});
      cum += r->cumulative_costs().back();
      const std::size_t n = r->days.size();
      for (std::size_t i = n - static_cast<std::size_t>(row.window_days); i < n; ++i)
        comfort += r->days[i].comfort_violation_min / row.window_days;
      const auto nc = rs.nocontrol.find(r->seed);
      const auto fs = rs.fullstate.find(r->seed);
      const bool nc_ok = nc != rs.nocontrol.end() && !nc->second.failed && nc->second.days.size() == n;
      const bool fs_ok = fs != rs.fullstate.end() && !fs->second.failed && fs->second.days.size() == n;
      if (fs_ok) {
        ++with_full;
        for (std::size_t i = n - static_cast<std::size_t>(row.window_days); i < n; ++i)
          dist += policy_distance(r->days[i].u, fs->second.days[i].u) / row.window_days;
      }
      if (nc_ok && fs_ok) {
        ++with_refs;
        c += m;
        cf += window_mean(fs->second, row.window_days);
        cn += window_mean(nc->second, row.window_days);
      }
    }
    const double k = static_cast<double>(runs.size());
    row.mean_daily_cost = 0.0;
    for (const auto& m : means) row.mean_daily_cost += m[0] / k;
    if (runs.size() >= 2) {
      std::vector<std::vector<double>> cols(runs.size());
      for (std::size_t i = 0; i < runs.size(); ++i) cols[i] = means[i];
      const Band b = aggregate_seeds(cols);
      row.lo = b.lo[0];
      row.hi = b.hi[0];
    } else {
      row.lo = row.hi = row.mean_daily_cost;
    }
    row.final_cumulative_cost = cum / k;
    row.comfort_violation_min = comfort / k;
    if (with_full == runs.size()) row.policy_distance = dist / k;
    if (with_refs == runs.size()) {
      row.scaled_cost = try_scaled(c, cf, cn);
      if (cn != 0.0) row.reduction_vs_nocontrol = 1.0 - c / cn;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string summary_csv(const ResultSet& rs, int window_days) {
  std::ostringstream out;
  out << "config_hash,series,seeds,window_days,mean_daily_cost_eur,lo,hi,final_cumulative_cost_eur,scaled_cost,"
         "reduction_vs_nocontrol,policy_distance,comfort_violation_min_per_day\n";
  for (const SummaryRow& r : summarize(rs, window_days))
    out << hash_hex(rs.hash) << ',' << r.label << ',' << r.seeds << ',' << r.window_days << ','
        << fmt(r.mean_daily_cost) << ',' << fmt(r.lo) << ',' << fmt(r.hi) << ',' << fmt(r.final_cumulative_cost)
        << ',' << opt(r.scaled_cost) << ',' << opt(r.reduction_vs_nocontrol) << ',' << opt(r.policy_distance) << ','
        << fmt(r.comfort_violation_min) << '\n';
  return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string plot_data(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "daily.csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no daily.csv found under " + dir.string());

  static const std::vector<std::string> metrics{"cost_eur", "cumulative_cost_eur", "scaled_cost", "policy_distance",
                                                "comfort_violation_min"};
  // series -> metric -> seed -> day -> value
  std::map<std::string, std::map<std::string, std::map<std::string, std::map<int, double>>>> data;
  std::string hash;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(f.string() + ": empty file");
    const auto header = split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"config_hash", "approx", "seed", "day"})
      if (!col.count(need)) throw std::runtime_error(f.string() + ": missing column " + need);
    int n = 1;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      const auto v = split(line);
      if (v.size() != header.size()) throw std::runtime_error(f.string() + ":" + std::to_string(n) + ": wrong field count");
      if (hash.empty()) hash = v[col["config_hash"]];
      if (v[col["config_hash"]] != hash)
        throw std::runtime_error("refusing to aggregate results with different config hashes (" + hash + " vs " +
                                 v[col["config_hash"]] + " in " + f.string() + ")");
      const int day = std::stoi(v[col["day"]]);
      for (const auto& m : metrics) {
        if (!col.count(m) || v[col[m]].empty()) continue;
        data[v[col["approx"]]][m][v[col["seed"]]][day] = std::stod(v[col[m]]);
      }
    }
  }

  std::ostringstream out;
  out << "config_hash,series,metric,day,value,lo,hi\n";
  for (const auto& [series, by_metric] : data)
    for (const auto& m : metrics) {
      const auto it = by_metric.find(m);
      if (it == by_metric.end()) continue;
      std::set<int> days;
      for (const auto& [seed, by_day] : it->second)
        for (const auto& [d, _] : by_day) days.insert(d);
      for (const int d : days) {
        std::vector<std::vector<double>> vals;
        for (const auto& [seed, by_day] : it->second)
          if (const auto v = by_day.find(d); v != by_day.end()) vals.push_back({v->second});
        if (vals.size() != it->second.size()) continue;
        double value = vals[0][0], lo = value, hi = value;
        if (vals.size() >= 2) {
          const Band b = aggregate_seeds(vals);
          value = b.mean[0];
          lo = b.lo[0];
          hi = b.hi[0];
        }
        out << hash << ',' << series << ',' << m << ',' << d << ',' << fmt(value) << ',' << fmt(lo) << ','
            << fmt(hi) << '\n';
      }
    }
  return out.str();
}

}  // namespace tclrl
