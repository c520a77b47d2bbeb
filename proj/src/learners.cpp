#include "gpsinfer/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gpsinfer/errors.hpp"

namespace gpsinfer {

namespace {

constexpr double kRidgeJitter = 1e-10;
constexpr double kMinSplitGain = 1e-12;

void check_features(const Matrix& x, const std::vector<double>& y) {
  if (x.rows != y.size()) throw std::invalid_argument("features/targets row mismatch");
  if (x.rows == 0) throw std::invalid_argument("empty training data");
  for (double v : x.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite target value");
  }
}

// ---- Linear model ----

class LinearModel final : public RegressionModel {
 public:
  LinearModel(std::vector<double> coefs, std::size_t n_features)
      : coefs_(std::move(coefs)), n_features_(n_features) {}

  std::vector<double> predict(const Matrix& features) const override {
    if (features.cols != n_features_) {
      throw SchemaMismatch("linear model expects " + std::to_string(n_features_) +
                           " features, got " + std::to_string(features.cols));
    }
    std::vector<double> out(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
      double v = coefs_[0];
      const double* row = features.data.data() + i * features.cols;
      for (std::size_t j = 0; j < n_features_; ++j) v += coefs_[j + 1] * row[j];
      out[i] = v;
    }
    return out;
  }

  std::size_t n_features() const override { return n_features_; }
  LearnerKind kind() const override { return LearnerKind::linear; }

  const std::vector<double>& coefficients() const { return coefs_; }

 private:
  std::vector<double> coefs_;  // intercept first
  std::size_t n_features_;
};

// ---- Gradient boosted trees ----

struct TreeNode {
  int feature = -1;        // -1 => leaf
  double threshold = 0.0;  // goes left when x[feature] < threshold
  int left = -1;
  int right = -1;
  double value = 0.0;      // leaf prediction (mean residual)
};

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exact greedy search over all features and midpoints between consecutive
// distinct values. Gain = sseParent - sseLeft - sseRight, computed in the
// equivalent sum-of-squares form. Ties resolve to the smallest feature index,
// then the smallest threshold, so growth is fully deterministic.
SplitChoice best_split(const Matrix& x, const std::vector<double>& r,
                       const std::vector<std::size_t>& rows) {
  SplitChoice best;
  const std::size_t m = rows.size();
  if (m < 2) return best;
  double total = 0.0;
  for (std::size_t i : rows) total += r[i];

  std::vector<std::pair<double, double>> vals(m);  // (feature value, residual)
  for (std::size_t f = 0; f < x.cols; ++f) {
    for (std::size_t k = 0; k < m; ++k) {
      vals[k] = {x.at(rows[k], f), r[rows[k]]};
    }
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double left_sum = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      left_sum += vals[k].second;
      if (vals[k].first == vals[k + 1].first) continue;  // not a boundary
      const double nl = static_cast<double>(k + 1);
      const double nr = static_cast<double>(m - k - 1);
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr -
                          total * total / static_cast<double>(m);
      // Features and thresholds are scanned ascending, so keeping only strict
      // improvements resolves exact ties to the smallest (feature, threshold).
      if (gain > kMinSplitGain && gain > best.gain) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = vals[k].first + 0.5 * (vals[k + 1].first - vals[k].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

class GbtModel final : public RegressionModel {
 public:
  GbtModel(double base, double eta, std::vector<std::vector<TreeNode>> trees,
           std::size_t n_features)
      : base_(base), eta_(eta), trees_(std::move(trees)), n_features_(n_features) {}

  static double predict_tree(const std::vector<TreeNode>& tree, const double* row) {
    int node = 0;
    while (tree[node].feature >= 0) {
      node = row[tree[node].feature] < tree[node].threshold ? tree[node].left
                                                            : tree[node].right;
    }
    return tree[node].value;
  }

  std::vector<double> predict(const Matrix& features) const override {
    if (features.cols != n_features_) {
      throw SchemaMismatch("gbt model expects " + std::to_string(n_features_) +
                           " features, got " + std::to_string(features.cols));
    }
    std::vector<double> out(features.rows, base_);
    for (const auto& tree : trees_) {
      for (std::size_t i = 0; i < features.rows; ++i) {
        out[i] += eta_ * predict_tree(tree, features.data.data() + i * features.cols);
      }
    }
    return out;
  }

  std::size_t n_features() const override { return n_features_; }
  LearnerKind kind() const override { return LearnerKind::gbt; }

 private:
  double base_;
  double eta_;
  std::vector<std::vector<TreeNode>> trees_;
  std::size_t n_features_;
};

void grow_node(const Matrix& x, const std::vector<double>& r,
               std::vector<std::size_t> rows, int depth, const HyperParams& hp,
               std::vector<TreeNode>& tree, int node_index) {
  double mean = 0.0;
  for (std::size_t i : rows) mean += r[i];
  mean /= static_cast<double>(rows.size());
  tree[node_index].value = mean;

  if (depth >= hp.max_depth) return;
  if (static_cast<double>(rows.size()) < hp.min_child_weight) return;
  const SplitChoice split = best_split(x, r, rows);
  if (!split.found) return;

  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t i : rows) {
    (x.at(i, static_cast<std::size_t>(split.feature)) < split.threshold ? left_rows
                                                                        : right_rows)
        .push_back(i);
  }
  tree[node_index].feature = split.feature;
  tree[node_index].threshold = split.threshold;
  tree[node_index].left = static_cast<int>(tree.size());
  tree.emplace_back();
  tree[node_index].right = static_cast<int>(tree.size());
  tree.emplace_back();
  grow_node(x, r, std::move(left_rows), depth + 1, hp, tree, tree[node_index].left);
  grow_node(x, r, std::move(right_rows), depth + 1, hp, tree, tree[node_index].right);
}

// ---- Ensemble ----

class EnsembleModel final : public RegressionModel {
 public:
  EnsembleModel(std::vector<ModelPtr> bases, EnsembleInfo info, std::size_t n_features)
      : bases_(std::move(bases)), info_(std::move(info)), n_features_(n_features) {}

  std::vector<double> predict(const Matrix& features) const override {
    if (features.cols != n_features_) {
      throw SchemaMismatch("ensemble model expects " + std::to_string(n_features_) +
                           " features, got " + std::to_string(features.cols));
    }
    std::vector<double> out(features.rows, 0.0);
    for (std::size_t j = 0; j < bases_.size(); ++j) {
      if (info_.alpha[j] == 0.0) continue;
      const std::vector<double> pj = bases_[j]->predict(features);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += info_.alpha[j] * pj[i];
    }
    return out;
  }

  std::size_t n_features() const override { return n_features_; }
  LearnerKind kind() const override { return LearnerKind::ensemble; }
  const EnsembleInfo& info() const { return info_; }

 private:
  std::vector<ModelPtr> bases_;
  EnsembleInfo info_;
  std::size_t n_features_;
};

// Minimizes ||Z a - y||^2 over the simplex by exact line search between pairs
// of coordinates; each move is clamped (projected) to keep a feasible.
std::vector<double> simplex_weights(const Matrix& z, const std::vector<double>& y) {
  const std::size_t n = z.rows;
  const std::size_t j = z.cols;
  std::vector<double> alpha(j, 1.0 / static_cast<double>(j));
  if (j == 1) return alpha;

  std::vector<double> g(j * j, 0.0);  // Z'Z
  std::vector<double> c(j, 0.0);      // Z'y
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = z.data.data() + i * j;
    for (std::size_t a = 0; a < j; ++a) {
      c[a] += row[a] * y[i];
      for (std::size_t b = a; b < j; ++b) g[a * j + b] += row[a] * row[b];
    }
  }
  for (std::size_t a = 0; a < j; ++a) {
    for (std::size_t b = 0; b < a; ++b) g[a * j + b] = g[b * j + a];
  }

  std::vector<double> galpha(j, 0.0);  // G alpha, kept incrementally
  for (std::size_t a = 0; a < j; ++a) {
    for (std::size_t b = 0; b < j; ++b) galpha[a] += g[a * j + b] * alpha[b];
  }

  constexpr int kMaxSweeps = 500;
  constexpr double kTol = 1e-10;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_move = 0.0;
    for (std::size_t a = 0; a < j; ++a) {
      for (std::size_t b = a + 1; b < j; ++b) {
        const double curv = g[a * j + a] - 2.0 * g[a * j + b] + g[b * j + b];
        if (!(curv > 0.0)) continue;  // identical columns; nothing to trade
        // d/dt of f(alpha + t (e_a - e_b)) at t=0, halved.
        const double slope = galpha[a] - galpha[b] - (c[a] - c[b]);
        double t = -slope / curv;
        t = std::clamp(t, -alpha[a], alpha[b]);
        if (t == 0.0) continue;
        alpha[a] += t;
        alpha[b] -= t;
        for (std::size_t k = 0; k < j; ++k) {
          galpha[k] += t * (g[k * j + a] - g[k * j + b]);
        }
        max_move = std::max(max_move, std::abs(t));
      }
    }
    if (max_move < kTol) break;
  }
  return alpha;
}

}  // namespace

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over empty range");
  const std::uint64_t bits = rng() >> 11;  // top 53 bits
  const double u = static_cast<double>(bits) * 0x1.0p-53;
  auto idx = static_cast<std::size_t>(u * static_cast<double>(n));
  if (idx >= n) idx = n - 1;  // guard the u ~ 1 edge
  return idx;
}

ModelPtr fit_linear(const Matrix& features, const std::vector<double>& targets,
                    const std::vector<double>* weights) {
  check_features(features, targets);
  if (features.rows < features.cols + 1) {
    throw std::invalid_argument("fit_linear needs at least p+1 rows");
  }
  if (weights) {
    if (weights->size() != targets.size()) {
      throw std::invalid_argument("weights length mismatch");
    }
    double sum = 0.0;
    for (double w : *weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("weights must be non-negative and finite");
      }
      sum += w;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("weights sum to zero");
  }
  Matrix design(features.rows, features.cols + 1);
  for (std::size_t i = 0; i < features.rows; ++i) {
    design.at(i, 0) = 1.0;
    for (std::size_t jf = 0; jf < features.cols; ++jf) {
      design.at(i, jf + 1) = features.at(i, jf);
    }
  }
  std::vector<double> coefs = wls_solve(design, targets, weights, kRidgeJitter);
  return std::make_shared<LinearModel>(std::move(coefs), features.cols);
}

ModelPtr fit_gbt(const Matrix& features, const std::vector<double>& targets,
                 const HyperParams& hp, std::uint64_t /*rng_seed*/) {
  check_features(features, targets);
  if (hp.nrounds < 1) throw std::invalid_argument("nrounds must be >= 1");
  if (!(hp.eta > 0.0 && hp.eta <= 1.0)) throw std::invalid_argument("eta must be in (0,1]");
  if (hp.max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
  if (!(hp.min_child_weight >= 0.0)) {
    throw std::invalid_argument("min_child_weight must be >= 0");
  }

  const std::size_t n = features.rows;
  double base = 0.0;
  for (double v : targets) base += v;
  base /= static_cast<double>(n);

  std::vector<double> pred(n, base);
  std::vector<double> residual(n);
  std::vector<std::vector<TreeNode>> trees;
  trees.reserve(static_cast<std::size_t>(hp.nrounds));
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  for (int t = 0; t < hp.nrounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - pred[i];
    std::vector<TreeNode> tree(1);
    grow_node(features, residual, all_rows, 0, hp, tree, 0);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += hp.eta * GbtModel::predict_tree(tree, features.data.data() + i * features.cols);
    }
    trees.push_back(std::move(tree));
  }
  return std::make_shared<GbtModel>(base, hp.eta, std::move(trees), features.cols);
}

ModelPtr fit_ensemble(const Matrix& features, const std::vector<double>& targets,
                      const std::vector<LearnerSpec>& base_specs, int k_folds,
                      std::uint64_t rng_seed) {
  check_features(features, targets);
  if (base_specs.empty()) throw std::invalid_argument("ensemble needs >= 1 base learner");
  for (const auto& s : base_specs) {
    if (s.kind == LearnerKind::ensemble) {
      throw std::invalid_argument("ensemble bases must be linear or gbt");
    }
  }
  const std::size_t n = features.rows;
  if (k_folds < 2) throw std::invalid_argument("k_folds must be >= 2");
  if (static_cast<std::size_t>(k_folds) > n) {
    throw std::invalid_argument("k_folds exceeds row count");
  }

  // Deterministic fold assignment: seeded shuffle, then contiguous blocks.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(rng_seed);
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t k = uniform_index(rng, i + 1);
    std::swap(order[i], order[k]);
  }
  std::vector<int> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k_folds));
  }

  const std::size_t jn = base_specs.size();
  Matrix cv_pred(n, jn);
  for (int fold = 0; fold < k_folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) {
      (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
    }
    Matrix xtr(train_rows.size(), features.cols);
    std::vector<double> ytr(train_rows.size());
    for (std::size_t k = 0; k < train_rows.size(); ++k) {
      ytr[k] = targets[train_rows[k]];
      for (std::size_t c = 0; c < features.cols; ++c) {
        xtr.at(k, c) = features.at(train_rows[k], c);
      }
    }
    Matrix xte(test_rows.size(), features.cols);
    for (std::size_t k = 0; k < test_rows.size(); ++k) {
      for (std::size_t c = 0; c < features.cols; ++c) {
        xte.at(k, c) = features.at(test_rows[k], c);
      }
    }
    for (std::size_t j = 0; j < jn; ++j) {
      const std::uint64_t fit_seed = rng_seed + 1000003ull * (j + 1) + static_cast<std::uint64_t>(fold);
      const ModelPtr m = fit_learner(base_specs[j], xtr, ytr, fit_seed);
      const std::vector<double> p = m->predict(xte);
      for (std::size_t k = 0; k < test_rows.size(); ++k) cv_pred.at(test_rows[k], j) = p[k];
    }
  }

  EnsembleInfo info;
  info.alpha = simplex_weights(cv_pred, targets);
  info.cv_predictions = cv_pred;
  info.base_risks.resize(jn, 0.0);
  for (std::size_t j = 0; j < jn; ++j) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = cv_pred.at(i, j) - targets[i];
      sse += d * d;
    }
    info.base_risks[j] = sse / static_cast<double>(n);
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double blend = 0.0;
    for (std::size_t j = 0; j < jn; ++j) blend += info.alpha[j] * cv_pred.at(i, j);
    const double d = blend - targets[i];
    sse += d * d;
  }
  info.ensemble_risk = sse / static_cast<double>(n);

  std::vector<ModelPtr> bases(jn);
  for (std::size_t j = 0; j < jn; ++j) {
    const std::uint64_t fit_seed = rng_seed + 1000003ull * (j + 1) + 777ull;
    bases[j] = fit_learner(base_specs[j], features, targets, fit_seed);
  }
  return std::make_shared<EnsembleModel>(std::move(bases), std::move(info), features.cols);
}

ModelPtr fit_learner(const LearnerSpec& spec, const Matrix& features,
                     const std::vector<double>& targets, std::uint64_t rng_seed) {
  switch (spec.kind) {
    case LearnerKind::linear:
      return fit_linear(features, targets, nullptr);
    case LearnerKind::gbt:
      return fit_gbt(features, targets, spec.params, rng_seed);
    case LearnerKind::ensemble:
      return fit_ensemble(features, targets, spec.bases, spec.k_folds, rng_seed);
  }
  throw std::invalid_argument("unknown learner kind");
}

HyperParams sample_hyperparams(const HyperParamGrid& grid, std::mt19937_64& rng) {
  if (grid.nrounds.empty() || grid.eta.empty() || grid.max_depth.empty() ||
      grid.min_child_weight.empty()) {
    throw std::invalid_argument("hyper-parameter candidate lists must be non-empty");
  }
  HyperParams hp;
  hp.nrounds = grid.nrounds[uniform_index(rng, grid.nrounds.size())];
  hp.eta = grid.eta[uniform_index(rng, grid.eta.size())];
  hp.max_depth = grid.max_depth[uniform_index(rng, grid.max_depth.size())];
  hp.min_child_weight = grid.min_child_weight[uniform_index(rng, grid.min_child_weight.size())];
  return hp;
}

const EnsembleInfo& ensemble_info(const RegressionModel& model) {
  const auto* em = dynamic_cast<const EnsembleModel*>(&model);
  if (!em) throw std::invalid_argument("model is not an ensemble");
  return em->info();
}

}  // namespace gpsinfer
