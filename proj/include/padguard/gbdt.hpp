#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace padguard {

struct BBoxFeatures {
  double cx = 0.0, cy = 0.0;  // normalized box center
  double w = 0.0, h = 0.0;    // normalized box dimensions

  double operator[](int i) const {
    switch (i) {
      case 0: return cx;
      case 1: return cy;
      case 2: return w;
      default: return h;
    }
  }
  static constexpr int kNumFeatures = 4;
};

struct GbdtHyperParams {
  int max_depth = 3;
  double learning_rate = 0.05;
  int n_estimators = 500;
  double colsample_bytree = 0.5;
  double colsample_bylevel = 0.8;
  double subsample = 0.6;

  void validate() const {
    if (max_depth < 1) throw std::invalid_argument("max_depth >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
      throw std::invalid_argument("learning_rate in (0,1]");
    if (n_estimators < 0) throw std::invalid_argument("n_estimators >= 0");
    for (double f : {colsample_bytree, colsample_bylevel, subsample})
      if (!(f > 0.0) || f > 1.0) throw std::invalid_argument("sampling fractions in (0,1]");
  }
};

// One node of a regression tree, stored in preorder. feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;  // leaf output, meters
  int left = -1;       // index into the node vector
  int right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const BBoxFeatures& f) const {
    int i = 0;
    while (nodes[i].feature >= 0)
      i = f[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
  }
};

struct GbdtModel {
  double base_score = 0.0;
  double learning_rate = 1.0;
  std::vector<RegressionTree> trees;
};

struct RegressionMetrics {
  double mae = 0.0;
  double medae = 0.0;
  double maxerr = 0.0;
  double expvar = 0.0;
};

using LabeledSample = std::pair<BBoxFeatures, double>;
using Dataset = std::vector<LabeledSample>;

inline double predict(const GbdtModel& m, const BBoxFeatures& f) {
  double s = m.base_score;
  for (const RegressionTree& t : m.trees) s += m.learning_rate * t.predict(f);
  return std::max(s, 0.0);
}

namespace detail {

struct TreeBuilder {
  const Dataset& data;
  const std::vector<double>& residuals;
  int max_depth;
  double colsample_bylevel;
  std::vector<int> tree_features;
  std::mt19937& rng;
  RegressionTree tree;

  int build(std::vector<int> rows, int depth) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});

    double sum = 0.0;
    for (int r : rows) sum += residuals[r];
    const double mean = sum / static_cast<double>(rows.size());

    bool found = false;
    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 1e-12;
    if (depth < max_depth && rows.size() >= 2) {
      for (int feat : level_features()) {
        std::sort(rows.begin(), rows.end(), [&](int a, int b) {
          return data[a].first[feat] < data[b].first[feat];
        });
        // prefix sums over the sorted order; split between distinct values
        double left_sum = 0.0;
        const double total = sum;
        double parent_sse_term = total * total / static_cast<double>(rows.size());
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
          left_sum += residuals[rows[k]];
          const double a = data[rows[k]].first[feat];
          const double b = data[rows[k + 1]].first[feat];
          if (a == b) continue;
          const double nl = static_cast<double>(k + 1);
          const double nr = static_cast<double>(rows.size() - k - 1);
          const double right_sum = total - left_sum;
          const double gain =
              left_sum * left_sum / nl + right_sum * right_sum / nr - parent_sse_term;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = feat;
            best_threshold = 0.5 * (a + b);
            found = true;
          }
        }
      }
    }

    if (!found) {
      tree.nodes[idx].value = mean;
      return idx;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : rows)
      (data[r].first[best_feature] < best_threshold ? left_rows : right_rows).push_back(r);

    tree.nodes[idx].feature = best_feature;
    tree.nodes[idx].threshold = best_threshold;
    const int l = build(std::move(left_rows), depth + 1);
    const int r = build(std::move(right_rows), depth + 1);
    tree.nodes[idx].left = l;
    tree.nodes[idx].right = r;
    return idx;
  }

  std::vector<int> level_features() {
    if (colsample_bylevel >= 1.0) return tree_features;
    const std::size_t k = static_cast<std::size_t>(
        std::ceil(colsample_bylevel * static_cast<double>(tree_features.size())));
    std::vector<int> pool = tree_features;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::max<std::size_t>(k, 1));
    std::sort(pool.begin(), pool.end());
    return pool;
  }
};

}  // namespace detail

/// Squared-error gradient boosting: base score is the target mean, each round
/// fits one tree to the current residuals on a row/column subsample.
inline GbdtModel fit(const Dataset& dataset, const GbdtHyperParams& hp, std::uint32_t seed) {
  hp.validate();
  if (dataset.empty()) throw std::invalid_argument("dataset must be non-empty");
  for (const auto& [f, y] : dataset)
    if (!std::isfinite(y) || y < 0.0) throw std::invalid_argument("targets must be finite and >= 0");

  GbdtModel model;
  model.learning_rate = hp.learning_rate;
  model.base_score =
      std::accumulate(dataset.begin(), dataset.end(), 0.0,
                      [](double s, const LabeledSample& p) { return s + p.second; }) /
      static_cast<double>(dataset.size());

  std::vector<double> residuals(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) residuals[i] = dataset[i].second - model.base_score;

  std::mt19937 rng(seed);
  std::vector<int> all_rows(dataset.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::array<int, BBoxFeatures::kNumFeatures> all_features{0, 1, 2, 3};

  for (int round = 0; round < hp.n_estimators; ++round) {
    std::vector<int> rows = all_rows;
    if (hp.subsample < 1.0) {
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(hp.subsample * static_cast<double>(rows.size())))));
    }
    std::vector<int> tree_features(all_features.begin(), all_features.end());
    if (hp.colsample_bytree < 1.0) {
      std::shuffle(tree_features.begin(), tree_features.end(), rng);
      tree_features.resize(std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(hp.colsample_bytree * BBoxFeatures::kNumFeatures))));
      std::sort(tree_features.begin(), tree_features.end());
    }

    detail::TreeBuilder builder{dataset, residuals, hp.max_depth, hp.colsample_bylevel,
                                std::move(tree_features), rng, {}};
    builder.build(std::move(rows), 0);
    for (std::size_t i = 0; i < dataset.size(); ++i)
      residuals[i] -= hp.learning_rate * builder.tree.predict(dataset[i].first);
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

inline RegressionMetrics evaluate(const GbdtModel& model, const Dataset& holdout) {
  if (holdout.empty()) throw std::invalid_argument("holdout must be non-empty");
  std::vector<double> abs_errors;
  abs_errors.reserve(holdout.size());
  double err_sum = 0.0, err_sq_sum = 0.0, y_sum = 0.0, y_sq_sum = 0.0;
  for (const auto& [f, y] : holdout) {
    const double e = y - predict(model, f);
    abs_errors.push_back(std::abs(e));
    err_sum += e;
    err_sq_sum += e * e;
    y_sum += y;
    y_sq_sum += y * y;
  }
  const double n = static_cast<double>(holdout.size());

  RegressionMetrics m;
  m.mae = std::accumulate(abs_errors.begin(), abs_errors.end(), 0.0) / n;
  m.maxerr = *std::max_element(abs_errors.begin(), abs_errors.end());
  std::sort(abs_errors.begin(), abs_errors.end());
  m.medae = holdout.size() % 2 == 1
                ? abs_errors[holdout.size() / 2]
                : 0.5 * (abs_errors[holdout.size() / 2 - 1] + abs_errors[holdout.size() / 2]);
  const double var_y = y_sq_sum / n - (y_sum / n) * (y_sum / n);
  const double var_e = err_sq_sum / n - (err_sum / n) * (err_sum / n);
  m.expvar = var_y < 1e-18 ? (var_e < 1e-18 ? 1.0 : 0.0) : 1.0 - var_e / var_y;
  return m;
}

struct GbdtSearchSpace {
  std::vector<int> max_depth{2, 3, 4, 5};
  std::vector<double> learning_rate{0.03, 0.05, 0.1, 0.2};
  std::vector<int> n_estimators{100, 200, 500};
  std::vector<double> colsample_bytree{0.5, 0.8, 1.0};
  std::vector<double> colsample_bylevel{0.5, 0.8, 1.0};
  std::vector<double> subsample{0.6, 0.8, 1.0};
};

/// Randomized hyperparameter search with k-fold cross validation; selects the
/// trialed configuration with the best mean fold MAE.
inline GbdtHyperParams random_search_cv(const Dataset& dataset, const GbdtSearchSpace& space,
                                        int k_folds, int n_trials, std::uint32_t seed) {
  if (k_folds < 2) throw std::invalid_argument("k_folds >= 2");
  if (n_trials < 1) throw std::invalid_argument("n_trials >= 1");
  if (dataset.size() < static_cast<std::size_t>(k_folds))
    throw std::invalid_argument("dataset smaller than k_folds");

  std::mt19937 rng(seed);
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  auto pick = [&rng](const auto& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };

  GbdtHyperParams best;
  double best_mae = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < n_trials; ++trial) {
    GbdtHyperParams hp;
    hp.max_depth = pick(space.max_depth);
    hp.learning_rate = pick(space.learning_rate);
    hp.n_estimators = pick(space.n_estimators);
    hp.colsample_bytree = pick(space.colsample_bytree);
    hp.colsample_bylevel = pick(space.colsample_bylevel);
    hp.subsample = pick(space.subsample);

    double mae_sum = 0.0;
    for (int fold = 0; fold < k_folds; ++fold) {
      Dataset train, val;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (static_cast<int>(i % k_folds) == fold)
          val.push_back(dataset[order[i]]);
        else
          train.push_back(dataset[order[i]]);
      }
      const GbdtModel m = fit(train, hp, seed + 1000u * trial + fold);
      mae_sum += evaluate(m, val).mae;
    }
    const double mae = mae_sum / k_folds;
    if (mae < best_mae) {
      best_mae = mae;
      best = hp;
    }
  }
  return best;
}

// --- persistence -----------------------------------------------------------

inline constexpr const char* kModelFormatTag = "padguard-gbdt v1";

inline void save_model(const GbdtModel& m, std::ostream& out) {
  out << kModelFormatTag << "\n";
  out << std::setprecision(17);
  out << "base_score " << m.base_score << "\n";
  out << "learning_rate " << m.learning_rate << "\n";
  out << "n_trees " << m.trees.size() << "\n";
  for (const RegressionTree& t : m.trees) {
    out << "tree " << t.nodes.size() << "\n";
    for (const TreeNode& n : t.nodes) {
      if (n.feature < 0)
        out << "leaf " << n.value << "\n";
      else
        out << "split " << n.feature << " " << n.threshold << " " << n.left << " " << n.right
            << "\n";
    }
  }
}

inline void save_model(const GbdtModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  save_model(m, out);
}

inline GbdtModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kModelFormatTag)
    throw std::runtime_error("unrecognized model format header");
  GbdtModel m;
  std::size_t n_trees = 0;
  auto expect = [&](const std::string& key) {
    std::getline(in, line);
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) throw std::runtime_error("model file: expected '" + key + "'");
    return ss;
  };
  expect("base_score") >> m.base_score;
  expect("learning_rate") >> m.learning_rate;
  expect("n_trees") >> n_trees;
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::size_t n_nodes = 0;
    expect("tree") >> n_nodes;
    RegressionTree tree;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (!std::getline(in, line)) throw std::runtime_error("model file: truncated tree");
      std::istringstream ss(line);
      std::string kind;
      ss >> kind;
      TreeNode node;
      if (kind == "leaf") {
        ss >> node.value;
      } else if (kind == "split") {
        ss >> node.feature >> node.threshold >> node.left >> node.right;
      } else {
        throw std::runtime_error("model file: bad node kind '" + kind + "'");
      }
      tree.nodes.push_back(node);
    }
    m.trees.push_back(std::move(tree));
  }
  return m;
}

inline GbdtModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load_model(in);
}

// --- dataset CSV -----------------------------------------------------------

inline void save_dataset_csv(const Dataset& data, std::ostream& out) {
  out << "cx,cy,w,h,distance_m\n";
  out << std::setprecision(17);
  for (const auto& [f, y] : data)
    out << f.cx << "," << f.cy << "," << f.w << "," << f.h << "," << y << "\n";
}

inline Dataset load_dataset_csv(std::istream& in) {
  Dataset data;
  std::string line;
  if (!std::getline(in, line) || line != "cx,cy,w,h,distance_m")
    throw std::runtime_error("dataset CSV: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    BBoxFeatures f;
    double y = 0.0;
    char comma;
    if (!(ss >> f.cx >> comma >> f.cy >> comma >> f.w >> comma >> f.h >> comma >> y))
      throw std::runtime_error("dataset CSV: bad row: " + line);
    data.push_back({f, y});
  }
  return data;
}

}  // namespace padguard
