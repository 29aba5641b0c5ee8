#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tclrl/cli.hpp"
#include "tclrl/config.hpp"
#include "tclrl/results.hpp"

using namespace tclrl;
namespace fs = std::filesystem;

namespace {

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tclrl");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

int parse_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

// Small settings so end-to-end runs take seconds.
const char* kLight =
    "[fqi]\niterations = 4\n[train]\nepochs = 1\n[trees]\nn_trees = 5\n";

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / "tclrl_test_cli") {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "light.ini") << kLight;
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string config() const { return (dir / "light.ini").string(); }
};

}  // namespace

TEST_CASE("config round trip is the identity") {
  ScenarioConfig a;
  CHECK(serialize_config(parse_config(serialize_config(a))) == serialize_config(a));
  a.scenario = "boiler";
  a.days = 7;
  a.seeds = {4, 9};
  a.approx.kind = "cnn";
  a.approx.train.lr = 3.3e-4;
  a.approx.mlp_hidden = {64, 32};
  a.building.cop = 2.75;
  a.tank.ua_loss = 0.1 + 0.2;  // not exactly representable in short decimal form
  a.data.price.noise_std = 0.0;
  a.baselines = false;
  const ScenarioConfig b = parse_config(serialize_config(a));
  CHECK(serialize_config(b) == serialize_config(a));
  CHECK(b.tank.ua_loss == a.tank.ua_loss);
  CHECK(b.seeds == a.seeds);
  CHECK(b.approx.mlp_hidden == a.approx.mlp_hidden);
  CHECK_FALSE(b.baselines);
}

TEST_CASE("partial configs keep the defaults") {
  const ScenarioConfig c = parse_config("[experiment]\nscenario = boiler\ndays = 5\n");
  CHECK(c.scenario == "boiler");
  CHECK(c.days == 5);
  CHECK(c.fqi.iterations == 96);
  CHECK(c.resolved_history() == 40);
  CHECK(c.resolved_approx(1).lstm_cell == 12);
  CHECK(ScenarioConfig{}.resolved_approx(1).lstm_cell == 8);
}

TEST_CASE("config errors point at the offending line") {
  CHECK(parse_line("[experiment]\ndays = 3\nbogus = 1\n") == 3);
  CHECK(parse_line("[experiment]\n\ndays = three\n") == 3);
  CHECK(parse_line("[experiment]\ndays = 3.5\n") == 2);
  CHECK(parse_line("[nowhere]\nkey = 1\n") == 2);
  CHECK(parse_line("[experiment]\nscenario = heatpump\n[train\n") == 3);
  CHECK(parse_line("[train]\nlearning_rate = 1e-3x\n") == 2);
  CHECK(parse_line("[experiment]\nseeds = 1,,2\n") == 2);
  CHECK(parse_line("[experiment]\nbaselines = maybe\n") == 2);
}

TEST_CASE("config hash") {
  ScenarioConfig a;
  const auto h = config_hash(a);
  CHECK(hash_hex(h).size() == 16);
  CHECK(config_hash(parse_config(serialize_config(a))) == h);
  ScenarioConfig b = a;
  b.seeds = {8};
  b.approx.kind = "mlp";
  CHECK(config_hash(b) == h);
  b.building.ua_air = 126.0;
  CHECK(config_hash(b) != h);
  ScenarioConfig c = a;
  c.approx.train.epochs = 19;
  CHECK(config_hash(c) != h);
  CHECK(hash_hex(0x1234) == "0000000000001234");
}

TEST_CASE("number formatting") {
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(-0.0) == "0");
  CHECK(fmt(2.0) == "2");
  CHECK(std::stod(fmt(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({"run", "--approx", "svm"}) == 2);
  CHECK(cli({"run", "--scenario", "fridge"}) == 2);
  CHECK(cli({"run", "--days", "0"}) == 2);
  CHECK(cli({"run", "--config", "/nonexistent/file.ini"}) == 2);
  CHECK(cli({}) == 2);
  CHECK(cli({"frobnicate"}) == 2);
  Scratch s;
  std::ofstream(s.dir / "bad.ini") << "[experiment]\ndays = -\n";
  CHECK(cli({"run", "--config", (s.dir / "bad.ini").string(), "--out", (s.dir / "x").string()}) == 2);
}

TEST_CASE("runtime errors exit with 1") {
  Scratch s;
  std::ofstream(s.dir / "missing.ini") << "[data]\nweather_csv = /nonexistent/weather.csv\n";
  CHECK(cli({"run", "--config", (s.dir / "missing.ini").string(), "--out", (s.dir / "m").string()}) == 1);
  fs::create_directories(s.dir / "empty");
  CHECK(cli({"plotdata", (s.dir / "empty").string()}) == 1);
}

TEST_CASE("selftest passes") { CHECK(cli({"selftest"}) == 0); }

TEST_CASE("run writes results, and a rerun from the manifest is byte-identical") {
  Scratch s;
  const fs::path out = s.dir / "run";
  REQUIRE(cli({"run", "--config", s.config(), "--scenario", "heatpump", "--days", "2", "--seeds", "1", "--approx",
               "lstm", "--out", out.string()}) == 0);
  for (const char* f : {"daily.csv", "slots.csv", "summary.csv", "config.ini", "manifest.json"})
    CHECK(fs::exists(out / f));
  const auto daily = read_csv(out / "daily.csv");
  REQUIRE(daily.size() == 3);  // header + 2 days
  CHECK(daily[0][0] == "config_hash");
  CHECK(daily[1][2] == "lstm");
  CHECK(read_csv(out / "slots.csv").size() == 1 + 2 * 96);

  const fs::path again = s.dir / "again";
  REQUIRE(cli({"rerun", (out / "manifest.json").string(), "--out", again.string()}) == 0);
  CHECK(slurp(again / "daily.csv") == slurp(out / "daily.csv"));
  CHECK(slurp(again / "slots.csv") == slurp(out / "slots.csv"));

  // every row carries the run's hash
  const std::string hash = daily[1][0];
  for (const auto& row : read_csv(out / "slots.csv")) CHECK((row[0] == hash || row[0] == "config_hash"));
}

TEST_CASE("baselines, summary and plot data") {
  Scratch s;
  const fs::path base = s.dir / "base";
  REQUIRE(cli({"baselines", "--config", s.config(), "--days", "3", "--seeds", "1,2,3", "--out", base.string()}) == 0);
  const auto summary = read_csv(base / "summary.csv");
  bool saw_nocontrol = false, saw_full = false;
  for (const auto& row : summary) {
    if (row[1] == "nocontrol") {
      saw_nocontrol = true;
      CHECK(std::stod(row[8]) == 1.0);
    }
    if (row[1] == "fullstate") {
      saw_full = true;
      CHECK(std::stod(row[8]) == 0.0);
    }
  }
  CHECK(saw_nocontrol);
  CHECK(saw_full);

  REQUIRE(cli({"plotdata", base.string()}) == 0);
  const auto plot = read_csv(base / "plotdata.csv");
  REQUIRE(plot.size() > 1);
  CHECK(plot[0] == std::vector<std::string>{"config_hash", "series", "metric", "day", "value", "lo", "hi"});
  std::map<std::string, double> last_cum;
  for (std::size_t i = 1; i < plot.size(); ++i) {
    const double v = std::stod(plot[i][4]), lo = std::stod(plot[i][5]), hi = std::stod(plot[i][6]);
    CHECK(lo <= v);
    CHECK(v <= hi);
    if (plot[i][2] == "cumulative_cost_eur") {
      // synthetic prices are positive, so cumulative cost never drops
      auto it = last_cum.find(plot[i][1]);
      if (it != last_cum.end()) CHECK(v >= it->second);
      last_cum[plot[i][1]] = v;
    }
  }

  // a second result set with different physics must not be pooled with the first
  const fs::path other = s.dir / "other";
  std::ofstream(s.dir / "other.ini") << kLight << "[building]\ncop = 2.5\n";
  REQUIRE(cli({"baselines", "--config", (s.dir / "other.ini").string(), "--days", "1", "--seeds", "1", "--out",
               other.string()}) == 0);
  CHECK(cli({"plotdata", s.dir.string(), "--out", (s.dir / "mixed.csv").string()}) == 1);
  CHECK_THROWS(plot_data(s.dir));
}
