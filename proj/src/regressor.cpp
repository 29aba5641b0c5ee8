#include "tclrl/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "tclrl/nn/cnn.hpp"
#include "tclrl/nn/lstm.hpp"
#include "tclrl/nn/mlp.hpp"
#include "tclrl/nn/optim.hpp"

namespace tclrl {

using nlohmann::json;

namespace {

json to_json_vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

struct Dims {
  Eigen::Index seq_len = -1, channels = -1, aux = -1;
  friend bool operator==(const Dims&, const Dims&) = default;
};

nn::MlpNet<double> make_mlp(const ApproxConfig& c, const Dims& d) {
  return nn::MlpNet<double>(nn::MlpShape{d.seq_len * d.channels, d.aux, c.mlp_hidden});
}

nn::CnnNet<double> make_cnn(const ApproxConfig& c, const Dims& d) {
  nn::CnnShape s;
  s.seq_len = d.seq_len;
  s.channels = d.channels;
  s.d_aux = d.aux;
  s.filters = c.cnn_filters;
  s.width = c.cnn_width;
  s.aux_hidden = c.cnn_aux_hidden;
  s.hidden1 = s.hidden2 = c.head_hidden;
  return nn::CnnNet<double>(s);
}

nn::LstmNet<double> make_lstm(const ApproxConfig& c, const Dims& d) {
  nn::LstmShape s;
  s.seq_len = d.seq_len;
  s.d_in = d.channels;
  s.d_cell = c.lstm_cell;
  s.d_aux = d.aux;
  s.hidden1 = s.hidden2 = c.head_hidden;
  return nn::LstmNet<double>(s);
}

template <typename Net>
class NetworkRegressor final : public Regressor {
 public:
  using Maker = Net (*)(const ApproxConfig&, const Dims&);

  NetworkRegressor(std::string kind, ApproxConfig cfg, Maker make)
      : kind_(std::move(kind)), cfg_(std::move(cfg)), make_(make), opt_(cfg_.train.lr, cfg_.train.rho, cfg_.train.eps) {}

  std::string kind() const override { return kind_; }
  bool trained() const override { return trained_; }
  double last_loss() const override { return last_loss_; }

  void fit(const FeatureBatch& x, const Eigen::VectorXd& y) override {
    const Eigen::Index n = x.size();
    if (n == 0 || y.size() != n) throw std::invalid_argument(kind_ + ": empty or mismatched training set");
    if (!y.allFinite()) throw std::invalid_argument(kind_ + ": non-finite target");
    const Dims dims{x.seq_len, x.channels, x.aux.rows()};
    if (!net_ || dims != dims_ || !cfg_.train.warm_start) {
      net_.emplace(make_(cfg_, dims));
      dims_ = dims;
      auto rng = seeded(cfg_.train.seed, 0x1217u, 0);
      net_->init(rng);
      opt_.reset();
    }
    auto rng = seeded(cfg_.train.seed, static_cast<std::uint64_t>(n), fits_++);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto mb = static_cast<std::size_t>(cfg_.train.minibatch);
    Eigen::VectorXd grad;
    Eigen::VectorXd yb;
    double last_finite = std::numeric_limits<double>::quiet_NaN();
    for (int epoch = 0; epoch < cfg_.train.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double total = 0.0;
      for (std::size_t start = 0; start < order.size(); start += mb) {
        const std::span<const Eigen::Index> cols(order.data() + start, std::min(mb, order.size() - start));
        const FeatureBatch b = x.columns(cols);
        yb.resize(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) yb(static_cast<Eigen::Index>(j)) = y(cols[j]);
        const double loss = net_->loss_and_gradient(b.seq, b.aux, yb, grad);
        if (!std::isfinite(loss) || !grad.allFinite())
          throw TrainingDiverged(kind_ + ": non-finite loss during training", last_finite);
        last_finite = loss;
        opt_.step(net_->params(), grad);
        total += loss * static_cast<double>(cols.size());
      }
      last_loss_ = total / static_cast<double>(n);
    }
    trained_ = true;
  }

  Eigen::VectorXd predict(const FeatureBatch& x) const override {
    if (!trained_) throw InvalidState(kind_ + ": predict before fit");
    if (Dims{x.seq_len, x.channels, x.aux.rows()} != dims_)
      throw std::invalid_argument(kind_ + ": input layout differs from the trained one");
    return net_->forward(x.seq, x.aux);
  }

  json to_json() const override {
    json j{{"kind", kind_}, {"trained", trained_}, {"fits", fits_}};
    if (net_) {
      j["dims"] = {dims_.seq_len, dims_.channels, dims_.aux};
      j["params"] = to_json_vec(net_->params());
      j["optimizer_cache"] = to_json_vec(opt_.cache());
    }
    return j;
  }

  void from_json(const json& j) override {
    if (j.at("kind").get<std::string>() != kind_) throw std::invalid_argument("checkpoint holds a different model kind");
    trained_ = j.at("trained").get<bool>();
    fits_ = j.at("fits").get<std::uint64_t>();
    net_.reset();
    if (j.contains("params")) {
      const auto d = j.at("dims").get<std::vector<Eigen::Index>>();
      dims_ = Dims{d.at(0), d.at(1), d.at(2)};
      net_.emplace(make_(cfg_, dims_));
      Eigen::VectorXd p = vec_from_json(j.at("params"));
      if (p.size() != net_->num_params()) throw std::invalid_argument("checkpoint parameter count mismatch");
      net_->params() = std::move(p);
      opt_.set_cache(vec_from_json(j.at("optimizer_cache")));
    }
  }

 private:
  std::string kind_;
  ApproxConfig cfg_;
  Maker make_;
  nn::RmsProp<double> opt_;
  std::optional<Net> net_;
  Dims dims_;
  bool trained_ = false;
  std::uint64_t fits_ = 0;
  double last_loss_ = std::numeric_limits<double>::quiet_NaN();
};

class TreesRegressor final : public Regressor {
 public:
  explicit TreesRegressor(ApproxConfig cfg) : cfg_(std::move(cfg)) { cfg_.trees.validate(); }

  std::string kind() const override { return "trees"; }
  bool trained() const override { return model_.trained(); }
  double last_loss() const override { return std::numeric_limits<double>::quiet_NaN(); }

  void fit(const FeatureBatch& x, const Eigen::VectorXd& y) override {
    ExtraTreesConfig c = cfg_.trees;
    c.seed = seeded(cfg_.trees.seed, fits_++, 0x7ee5u)();
    ExtraTrees model(c);
    model.fit(x.design_matrix(), y);
    model_ = std::move(model);
  }

  Eigen::VectorXd predict(const FeatureBatch& x) const override {
    if (!trained()) throw InvalidState("trees: predict before fit");
    return model_.predict(x.design_matrix());
  }

  json to_json() const override {
    json trees = json::array();
    for (const auto& tree : model_.trees()) {
      json t{{"feature", json::array()}, {"threshold", json::array()}, {"left", json::array()},
             {"right", json::array()}, {"value", json::array()}};
      for (const auto& n : tree) {
        t["feature"].push_back(n.feature);
        t["threshold"].push_back(n.threshold);
        t["left"].push_back(n.left);
        t["right"].push_back(n.right);
        t["value"].push_back(n.value);
      }
      trees.push_back(std::move(t));
    }
    return {{"kind", "trees"}, {"fits", fits_}, {"features", model_.num_features()}, {"trees", std::move(trees)}};
  }

  void from_json(const json& j) override {
    if (j.at("kind").get<std::string>() != "trees") throw std::invalid_argument("checkpoint holds a different model kind");
    fits_ = j.at("fits").get<std::uint64_t>();
    std::vector<ExtraTrees::Tree> trees;
    for (const auto& t : j.at("trees")) {
      const auto f = t.at("feature").get<std::vector<int>>();
      const auto th = t.at("threshold").get<std::vector<double>>();
      const auto l = t.at("left").get<std::vector<int>>();
      const auto r = t.at("right").get<std::vector<int>>();
      const auto v = t.at("value").get<std::vector<double>>();
      ExtraTrees::Tree tree(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) tree[i] = {f[i], th.at(i), l.at(i), r.at(i), v.at(i)};
      trees.push_back(std::move(tree));
    }
    ExtraTrees model(cfg_.trees);
    model.set_trees(std::move(trees), j.at("features").get<Eigen::Index>());
    model_ = std::move(model);
  }

 private:
  ApproxConfig cfg_;
  ExtraTrees model_;
  std::uint64_t fits_ = 0;
};

json approx_to_json(const ApproxConfig& c) {
  const auto& t = c.train;
  const auto& e = c.trees;
  return {{"kind", c.kind},
          {"train", {{"lr", t.lr}, {"rho", t.rho}, {"eps", t.eps}, {"minibatch", t.minibatch}, {"epochs", t.epochs},
                     {"warm_start", t.warm_start}, {"seed", t.seed}}},
          {"trees", {{"n_trees", e.n_trees}, {"n_min", e.n_min}, {"k", e.k}, {"seed", e.seed}}},
          {"mlp_hidden", c.mlp_hidden},
          {"cnn_filters", c.cnn_filters},
          {"cnn_width", c.cnn_width},
          {"cnn_aux_hidden", c.cnn_aux_hidden},
          {"lstm_cell", c.lstm_cell},
          {"head_hidden", c.head_hidden}};
}

ApproxConfig approx_from_json(const json& j) {
  ApproxConfig c;
  c.kind = j.at("kind").get<std::string>();
  const auto& t = j.at("train");
  c.train.lr = t.at("lr");
  c.train.rho = t.at("rho");
  c.train.eps = t.at("eps");
  c.train.minibatch = t.at("minibatch");
  c.train.epochs = t.at("epochs");
  c.train.warm_start = t.at("warm_start");
  c.train.seed = t.at("seed");
  const auto& e = j.at("trees");
  c.trees.n_trees = e.at("n_trees");
  c.trees.n_min = e.at("n_min");
  c.trees.k = e.at("k");
  c.trees.seed = e.at("seed");
  c.mlp_hidden = j.at("mlp_hidden").get<std::vector<Eigen::Index>>();
  c.cnn_filters = j.at("cnn_filters");
  c.cnn_width = j.at("cnn_width");
  c.cnn_aux_hidden = j.at("cnn_aux_hidden");
  c.lstm_cell = j.at("lstm_cell");
  c.head_hidden = j.at("head_hidden");
  return c;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (minibatch < 1) throw std::invalid_argument("TrainConfig: minibatch must be >= 1");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (!(rho >= 0 && rho < 1) || !(eps > 0)) throw std::invalid_argument("TrainConfig: invalid RMSprop constants");
}

bool is_approx_kind(std::string_view name) {
  return std::find(std::begin(kApproxKinds), std::end(kApproxKinds), name) != std::end(kApproxKinds);
}

std::unique_ptr<Regressor> make_regressor(const ApproxConfig& cfg) {
  if (cfg.kind == "trees") return std::make_unique<TreesRegressor>(cfg);
  cfg.train.validate();
  if (cfg.kind == "mlp") return std::make_unique<NetworkRegressor<nn::MlpNet<double>>>("mlp", cfg, &make_mlp);
  if (cfg.kind == "cnn") return std::make_unique<NetworkRegressor<nn::CnnNet<double>>>("cnn", cfg, &make_cnn);
  if (cfg.kind == "lstm") return std::make_unique<NetworkRegressor<nn::LstmNet<double>>>("lstm", cfg, &make_lstm);
  throw std::invalid_argument("unknown approximator '" + cfg.kind + "' (valid: mlp, cnn, lstm, trees)");
}

QModel::QModel(Encoder encoder, ApproxConfig cfg)
    : encoder_(std::move(encoder)), cfg_(std::move(cfg)), reg_(make_regressor(cfg_)) {
  if (encoder_.seq_len() == 0 && (cfg_.kind == "cnn" || cfg_.kind == "lstm"))
    throw std::invalid_argument(cfg_.kind + " needs a history sequence; use mlp or trees for the full-state view");
}

void QModel::fit_scaler(const FeatureBatch& raw) { scaler_.fit(raw); }

void QModel::fit(FeatureBatch raw, const Eigen::VectorXd& y) {
  if (!scaler_.fitted()) scaler_.fit(raw);
  scaler_.transform(raw);
  reg_->fit(raw, y);
}

Eigen::VectorXd QModel::predict_batch(FeatureBatch raw) const {
  scaler_.transform(raw);
  return reg_->predict(raw);
}

double QModel::predict(const AugmentedState& x, Action u) const {
  if (!trained()) throw InvalidState("QModel: predict before fit");
  return predict_batch(encoder_.encode(x, u))(0);
}

json QModel::to_json(std::uint64_t config_hash) const {
  std::ostringstream hash;
  hash << std::hex << config_hash;
  json j{{"format", "tclrl-qmodel"},
         {"version", 1},
         {"config_hash", hash.str()},
         {"encoder",
          {{"view", encoder_.view() == StateView::Partial ? "partial" : "full"},
           {"h", encoder_.history()},
           {"obs_dim", encoder_.obs_dim()},
           {"exo_dim", encoder_.exo_dim()},
           {"full_dim", encoder_.full_dim()}}},
         {"approx", approx_to_json(cfg_)},
         {"regressor", reg_->to_json()}};
  if (scaler_.fitted())
    j["scaler"] = {{"seq_min", to_json_vec(scaler_.seq_min())},
                   {"seq_range", to_json_vec(scaler_.seq_range())},
                   {"aux_min", to_json_vec(scaler_.aux_min())},
                   {"aux_range", to_json_vec(scaler_.aux_range())}};
  return j;
}

QModel QModel::from_json(const json& j) {
  if (j.at("format").get<std::string>() != "tclrl-qmodel" || j.at("version").get<int>() != 1)
    throw std::invalid_argument("not a version-1 Q-model checkpoint");
  const auto& e = j.at("encoder");
  Encoder enc(e.at("view").get<std::string>() == "full" ? StateView::Full : StateView::Partial, e.at("h"),
              e.at("obs_dim"), e.at("exo_dim"), e.at("full_dim"));
  QModel m(enc, approx_from_json(j.at("approx")));
  m.reg_->from_json(j.at("regressor"));
  if (j.contains("scaler")) {
    const auto& s = j.at("scaler");
    m.scaler_.set(vec_from_json(s.at("seq_min")), vec_from_json(s.at("seq_range")), vec_from_json(s.at("aux_min")),
                  vec_from_json(s.at("aux_range")));
  }
  return m;
}

void QModel::save(const std::filesystem::path& path, std::uint64_t config_hash) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << to_json(config_hash).dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

QModel QModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return from_json(json::parse(in));
}

}  // namespace tclrl
