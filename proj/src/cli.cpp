#include "tclrl/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tclrl/config.hpp"
#include "tclrl/nn/cnn.hpp"
#include "tclrl/nn/lstm.hpp"
#include "tclrl/nn/mlp.hpp"
#include "tclrl/nn/optim.hpp"
#include "tclrl/results.hpp"

namespace tclrl {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::string config;
  std::string scenario;
  std::string approx;
  int days = 0;
  std::vector<std::uint64_t> seeds;
  std::string out;
};

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig cfg = o.config.empty() ? ScenarioConfig{} : load_config(o.config);
  if (!o.scenario.empty()) cfg.scenario = o.scenario;
  if (!o.approx.empty()) cfg.approx.kind = o.approx;
  if (o.days > 0) cfg.days = o.days;
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::filesystem::path output_dir(const std::string& flag, const std::string& leaf) {
  if (!flag.empty()) return flag;
  const char* root = std::getenv("TCLRL_OUT");
  return std::filesystem::path(root && *root ? root : "results") / leaf;
}

void write_outputs(const std::filesystem::path& dir, const ResultSet& rs, const ScenarioConfig& cfg,
                   const std::string& command) {
  std::filesystem::create_directories(dir);
  write_atomic(dir / "daily.csv", daily_csv(rs));
  write_atomic(dir / "slots.csv", slots_csv(rs));
  write_atomic(dir / "summary.csv", summary_csv(rs));
  write_atomic(dir / "config.ini", serialize_config(cfg));
  const nlohmann::json manifest{{"command", command},
                                {"config_hash", hash_hex(rs.hash)},
                                {"seeds", cfg.seeds},
                                {"code_version", kCodeVersion},
                                {"scenario", cfg.scenario},
                                {"approx", command == "run" ? cfg.approx.kind : std::string("baselines")},
                                {"output_dir", dir.string()},
                                {"config", serialize_config(cfg)}};
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

void report(const ExperimentRun& r) {
  std::cerr << r.label << " seed " << r.seed << ": " << r.days.size() << " days";
  if (!r.days.empty()) std::cerr << ", cumulative cost " << fmt(r.cumulative_costs().back()) << " EUR";
  if (r.failed) std::cerr << " (FAILED: " << r.error << ")";
  std::cerr << '\n';
}

ResultSet references(const ScenarioConfig& cfg) {
  ResultSet rs;
  rs.scenario = cfg.scenario;
  rs.hash = config_hash(cfg);
  for (const auto seed : cfg.seeds) {
    rs.nocontrol.emplace(seed, baseline_no_control(cfg, seed));
    report(rs.nocontrol.at(seed));
    rs.fullstate.emplace(seed, baseline_full_state(cfg, seed));
    report(rs.fullstate.at(seed));
  }
  return rs;
}

int do_run(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
  ResultSet rs = cfg.baselines ? references(cfg) : ResultSet{cfg.scenario, config_hash(cfg), {}, {}, {}};
  bool failed = false;
  for (const auto seed : cfg.seeds) {
    rs.runs.push_back(run_experiment(cfg, seed));
    report(rs.runs.back());
    failed = failed || rs.runs.back().failed;
  }
  write_outputs(dir, rs, cfg, "run");
  std::cout << dir.string() << '\n';
  return failed ? 1 : 0;
}

int do_baselines(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
  ResultSet rs = references(cfg);
  bool failed = false;
  for (const auto seed : cfg.seeds) {
    rs.runs.push_back(rs.nocontrol.at(seed));
    failed = failed || rs.fullstate.at(seed).failed;
  }
  for (const auto seed : cfg.seeds) rs.runs.push_back(rs.fullstate.at(seed));
  write_outputs(dir, rs, cfg, "baselines");
  std::cout << dir.string() << '\n';
  return failed ? 1 : 0;
}

int do_rerun(const std::filesystem::path& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot read manifest " + manifest_path.string());
  const auto m = nlohmann::json::parse(in);
  const ScenarioConfig cfg = parse_config(m.at("config").get<std::string>(), manifest_path.string());
  if (hash_hex(config_hash(cfg)) != m.at("config_hash").get<std::string>())
    throw std::runtime_error("manifest config does not match its recorded hash");
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(m.at("output_dir").get<std::string>()) : std::filesystem::path(out);
  const std::string command = m.at("command").get<std::string>();
  if (command == "run") return do_run(cfg, dir);
  if (command == "baselines") return do_baselines(cfg, dir);
  throw std::runtime_error("manifest names unknown command '" + command + "'");
}

void add_common(CLI::App* app, Overrides& o, bool with_approx) {
  app->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  app->add_option("--scenario", o.scenario, "heatpump or boiler")->check(CLI::IsMember({"heatpump", "boiler"}));
  if (with_approx)
    app->add_option("--approx", o.approx, "mlp, cnn, lstm or trees")
        ->check(CLI::IsMember({"mlp", "cnn", "lstm", "trees"}));
  app->add_option("--days", o.days, "simulated days")->check(CLI::PositiveNumber);
  app->add_option("--seeds", o.seeds, "comma-separated run seeds")->delimiter(',');
  app->add_option("--out", o.out, "output directory (default $TCLRL_OUT/<name> or results/<name>)");
}

}  // namespace

bool run_selftest(std::ostream& out) {
  bool ok = true;
  const auto check = [&](const std::string& name, bool pass, double value) {
    out << (pass ? "PASS " : "FAIL ") << name << " (" << fmt(value) << ")\n";
    ok = ok && pass;
  };
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n01(0.0, 1.0);
  const auto randn = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
    return m;
  };
  {
    nn::MlpNet<double> net(nn::MlpShape{6, 3, {8, 8}});
    net.init(rng);
    net.params() += 0.05 * randn(net.num_params(), 1);  // keep pre-activations off the ReLU kink
    const double e = nn::grad_check(net, randn(6, 4), randn(3, 4), randn(4, 1));
    check("mlp gradient", e < 1e-4, e);
  }
  {
    nn::CnnShape s;
    s.seq_len = 20;
    s.channels = 3;
    s.d_aux = 4;
    nn::CnnNet<double> net(s);
    net.init(rng);
    net.params() += 0.05 * randn(net.num_params(), 1);
    const double e = nn::grad_check(net, randn(60, 3), randn(4, 3), randn(3, 1));
    check("cnn gradient", e < 1e-4, e);
  }
  {
    nn::LstmShape s;
    s.seq_len = 20;
    s.d_in = 3;
    s.d_aux = 4;
    nn::LstmNet<double> net(s);
    net.init(rng);
    const double e = nn::grad_check(net, randn(60, 3), randn(4, 3), randn(3, 1));
    check("lstm gradient", e < 1e-4, e);
  }
  {
    BuildingParams p;
    const BuildingState s = building_step({12.5, 12.5}, 0.0, 12.5, 0.0, p);
    const double e = std::max(std::abs(s.t_air - 12.5), std::abs(s.t_mass - 12.5));
    check("building equilibrium", e <= 1e-12, e);
  }
  {
    TankParams p;
    p.ua_loss = 0.0;
    const TankState s0 = TankState::uniform(p, 50.0);
    const TankSlotResult r = tank_step_controlled(s0, Action::On, 20.0, p);
    const double change = tank_enthalpy(r.state, p) - tank_enthalpy(s0, p);
    const double expected = r.heat_in_j - r.draw_enthalpy_j;
    const double e = std::abs(change - expected) / std::max(std::abs(expected), 1.0);
    check("tank enthalpy balance", e < 1e-6, e);
  }
  return ok;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Batch reinforcement learning for thermostatically controlled loads"};
  app.require_subcommand(1);
  Overrides run_o, base_o;
  std::string results_dir, plot_out, manifest, rerun_out;

  auto* run = app.add_subcommand("run", "learning runs of the partial-observation agent");
  add_common(run, run_o, true);
  auto* baselines = app.add_subcommand("baselines", "no-control and full-state reference runs");
  add_common(baselines, base_o, false);
  auto* plot = app.add_subcommand("plotdata", "aggregate daily.csv files into long-format plot data");
  plot->add_option("results", results_dir, "results directory")->required();
  plot->add_option("--out", plot_out, "output file (default <results>/plotdata.csv)");
  auto* self = app.add_subcommand("selftest", "gradient and physics checks");
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest.json");
  rerun->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", rerun_out, "output directory (default: the manifest's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      const ScenarioConfig cfg = resolve(run_o);
      return do_run(cfg, output_dir(run_o.out, cfg.scenario + "-" + cfg.approx.kind + "-" + hash_hex(config_hash(cfg))));
    }
    if (baselines->parsed()) {
      const ScenarioConfig cfg = resolve(base_o);
      return do_baselines(cfg, output_dir(base_o.out, cfg.scenario + "-baselines-" + hash_hex(config_hash(cfg))));
    }
    if (plot->parsed()) {
      const std::string text = plot_data(results_dir);
      const std::filesystem::path out = plot_out.empty() ? std::filesystem::path(results_dir) / "plotdata.csv" : std::filesystem::path(plot_out);
      write_atomic(out, text);
      std::cout << out.string() << '\n';
      return 0;
    }
    if (self->parsed()) return run_selftest(std::cout) ? 0 : 1;
    if (rerun->parsed()) return do_rerun(manifest, rerun_out);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace tclrl
