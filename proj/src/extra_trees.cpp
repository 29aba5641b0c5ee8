#include "tclrl/extra_trees.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "tclrl/errors.hpp"

namespace tclrl {

void ExtraTreesConfig::validate() const {
  if (n_trees < 1) throw std::invalid_argument("ExtraTreesConfig: n_trees must be >= 1");
  if (n_min < 2) throw std::invalid_argument("ExtraTreesConfig: n_min must be >= 2");
  if (k < 0) throw std::invalid_argument("ExtraTreesConfig: k must be >= 0");
}

ExtraTrees::ExtraTrees(ExtraTreesConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void ExtraTrees::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() == 0 || x.rows() != y.size()) throw std::invalid_argument("ExtraTrees::fit: empty or mismatched data");
  if (!y.allFinite()) throw std::invalid_argument("ExtraTrees::fit: non-finite target");
  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(cfg_.n_trees));
  for (int t = 0; t < cfg_.n_trees; ++t) trees.push_back(grow(x, y, static_cast<std::uint64_t>(t)));
  trees_ = std::move(trees);
  n_features_ = x.cols();
}

ExtraTrees::Tree ExtraTrees::grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t tree_index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                    static_cast<std::uint32_t>(tree_index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});

  struct Job {
    int node;
    std::size_t begin, end;
  };
  Tree tree(1);
  std::vector<Job> jobs{{0, 0, idx.size()}};
  std::vector<Eigen::Index> candidates;
  std::vector<double> vals, resid;
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));

  while (!jobs.empty()) {
    const Job job = jobs.back();
    jobs.pop_back();
    const auto first = idx.begin() + static_cast<std::ptrdiff_t>(job.begin);
    const auto last = idx.begin() + static_cast<std::ptrdiff_t>(job.end);
    const double count = static_cast<double>(job.end - job.begin);

    double sum = 0.0;
    for (auto it = first; it != last; ++it) sum += y(*it);
    const double mean = sum / count;
    tree[static_cast<std::size_t>(job.node)].value = mean;
    if (job.end - job.begin < static_cast<std::size_t>(cfg_.n_min)) continue;

    double sse = 0.0;
    resid.clear();
    for (auto it = first; it != last; ++it) {
      resid.push_back(y(*it) - mean);
      sse += resid.back() * resid.back();
    }
    if (std::all_of(first, last, [&](Eigen::Index i) { return y(i) == y(*first); })) continue;

    double best_score = -1.0;
    Eigen::Index best_feature = -1;
    double best_cut = 0.0;
    // Gathers feature f of the node's samples into vals; returns false when it is constant.
    const auto gather = [&](Eigen::Index f) {
      vals.resize(resid.size());
      double mn = x(*first, f), mx = mn;
      std::size_t j = 0;
      for (auto it = first; it != last; ++it, ++j) {
        const double v = x(*it, f);
        vals[j] = v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      lo[static_cast<std::size_t>(f)] = mn;
      hi[static_cast<std::size_t>(f)] = mx;
      return mx > mn;
    };
    // Draws a cut for the gathered feature f and keeps it if it beats the best so far.
    const auto try_cut = [&](Eigen::Index f) {
      const double a = lo[static_cast<std::size_t>(f)];
      const double b = hi[static_cast<std::size_t>(f)];
      // Cut in (a, b] so both sides are non-empty.
      double cut = b - unit(rng) * (b - a);
      if (!(cut > a)) cut = b;
      double sl = 0.0, ql = 0.0, sr = 0.0, qr = 0.0, nl = 0.0;
      // Branch-free: the side test is unpredictable, and adding an exact 0 leaves each sum unchanged.
      for (std::size_t j = 0; j < vals.size(); ++j) {
        const double r = resid[j], r2 = r * r;
        const double m = vals[j] < cut ? 1.0 : 0.0, mr = 1.0 - m;
        sl += m * r;
        ql += m * r2;
        nl += m;
        sr += mr * r;
        qr += mr * r2;
      }
      const double nr = count - nl;
      const double sse_split = (ql - sl * sl / nl) + (qr - sr * sr / nr);
      const double score = (sse - sse_split) / sse;
      if (score > best_score) {
        best_score = score;
        best_feature = f;
        best_cut = cut;
      }
    };

    if (cfg_.k == 0) {
      // every non-constant feature competes: one pass per feature
      for (Eigen::Index f = 0; f < d; ++f)
        if (gather(f)) try_cut(f);
    } else {
      candidates.clear();
      for (Eigen::Index f = 0; f < d; ++f)
        if (gather(f)) candidates.push_back(f);
      const std::size_t k = std::min(candidates.size(), static_cast<std::size_t>(cfg_.k));
      for (std::size_t j = 0; j < k; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, candidates.size() - 1);
        std::swap(candidates[j], candidates[pick(rng)]);
      }
      for (std::size_t j = 0; j < k; ++j) {
        gather(candidates[j]);
        try_cut(candidates[j]);
      }
    }
    if (best_feature < 0) continue;

    const auto mid = std::stable_partition(first, last, [&](Eigen::Index i) { return x(i, best_feature) < best_cut; });
    const auto split = job.begin + static_cast<std::size_t>(mid - first);
    const int left = static_cast<int>(tree.size());
    tree.resize(tree.size() + 2);
    Node& node = tree[static_cast<std::size_t>(job.node)];
    node.feature = static_cast<int>(best_feature);
    node.threshold = best_cut;
    node.left = left;
    node.right = left + 1;
    jobs.push_back({left + 1, split, job.end});
    jobs.push_back({left, job.begin, split});
  }
  return tree;
}

double ExtraTrees::predict_one(const double* row, Eigen::Index stride) const {
  double total = 0.0;
  for (const Tree& tree : trees_) {
    const Node* node = &tree[0];
    while (node->feature >= 0)
      node = &tree[static_cast<std::size_t>(row[node->feature * stride] < node->threshold ? node->left : node->right)];
    total += node->value;
  }
  return total / static_cast<double>(trees_.size());
}

Eigen::VectorXd ExtraTrees::predict(const Eigen::MatrixXd& x) const {
  if (!trained()) throw InvalidState("ExtraTrees::predict: model has not been fitted");
  if (x.cols() != n_features_) throw std::invalid_argument("ExtraTrees::predict: feature count mismatch");
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_one(x.data() + i, x.rows());
  return out;
}

void ExtraTrees::set_trees(std::vector<Tree> trees, Eigen::Index n_features) {
  trees_ = std::move(trees);
  n_features_ = n_features;
}

}  // namespace tclrl
