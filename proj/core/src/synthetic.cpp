#include "kenn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kenn/error.hpp"

namespace kenn {

void SyntheticGraphSpec::validate() const {
  if (n_nodes < 2) throw ValidationError("graph needs at least two nodes");
  if (n_classes < 2 || n_classes > n_nodes) throw ValidationError("class count must lie in [2, n_nodes]");
  if (n_features == 0) throw ValidationError("feature count must be positive");
  if (!(homophily >= 0.0 && homophily <= 1.0)) throw ValidationError("homophily must lie in [0, 1]");
  if (!(edge_density >= 0.0)) throw ValidationError("edge density must be non-negative");
  if (!(feature_noise >= 0.0)) throw ValidationError("feature noise must be non-negative");
}

GraphDataset make_synthetic_citations(const SyntheticGraphSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  GraphDataset data;
  data.n_classes = spec.n_classes;
  data.labels.resize(spec.n_nodes);
  // Round-robin classes then shuffle, so every class is populated.
  for (std::size_t i = 0; i < spec.n_nodes; ++i) data.labels[i] = i % spec.n_classes;
  std::shuffle(data.labels.begin(), data.labels.end(), rng);

  Matrix centres(spec.n_classes, spec.n_features);
  for (double& v : centres.data()) v = normal(rng);
  data.features = Matrix(spec.n_nodes, spec.n_features);
  for (std::size_t i = 0; i < spec.n_nodes; ++i)
    for (std::size_t j = 0; j < spec.n_features; ++j)
      data.features(i, j) = centres(data.labels[i], j) + spec.feature_noise * normal(rng);

  std::vector<std::vector<std::size_t>> members(spec.n_classes);
  for (std::size_t i = 0; i < spec.n_nodes; ++i) members[data.labels[i]].push_back(i);

  const auto target = static_cast<std::size_t>(std::llround(spec.edge_density * static_cast<double>(spec.n_nodes)));
  const std::size_t max_pairs = spec.n_nodes * (spec.n_nodes - 1) / 2;
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  std::uniform_int_distribution<std::size_t> pick_node(0, spec.n_nodes - 1);
  std::bernoulli_distribution same_class(spec.homophily);
  std::size_t attempts = 0;
  while (pairs.size() < std::min(target, max_pairs) && attempts < 100 * (target + 1)) {
    ++attempts;
    const std::size_t u = pick_node(rng);
    const std::size_t cu = data.labels[u];
    std::size_t v = u;
    if (same_class(rng)) {
      const auto& pool = members[cu];
      if (pool.size() < 2) continue;
      v = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    } else {
      const std::size_t others = spec.n_nodes - members[cu].size();
      if (others == 0) continue;
      std::size_t k = std::uniform_int_distribution<std::size_t>(0, others - 1)(rng);
      for (std::size_t c = 0; c < spec.n_classes; ++c) {
        if (c == cu) continue;
        if (k < members[c].size()) {
          v = members[c][k];
          break;
        }
        k -= members[c].size();
      }
    }
    if (v == u) continue;
    pairs.emplace(std::min(u, v), std::max(u, v));
  }

  for (const auto& [a, b] : pairs) {
    data.edges.sx.push_back(a);
    data.edges.sy.push_back(b);
    data.edges.sx.push_back(b);
    data.edges.sy.push_back(a);
  }
  data.binary = Matrix(data.edges.size(), 1, kKnownTruePreactivation);
  data.train_mask.assign(spec.n_nodes, true);
  data.test_mask.assign(spec.n_nodes, false);
  return data;
}

MultiLabelData make_implication_data(ImplicationKind kind, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr std::size_t kFeatures = 4;
  MultiLabelData data{Matrix(n, kFeatures), Matrix(n, 2)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kFeatures; ++j) data.features(i, j) = normal(rng);
    const double x0 = data.features(i, 0);
    const double x1 = data.features(i, 1);
    bool a = false;
    bool b = false;
    if (kind == ImplicationKind::Holds) {
      a = x0 > 0.0;
      b = a || x1 > 0.0;
    } else {
      // Phi(-1.6449) = 0.05.
      a = x0 > -1.6449;
      b = !a && x1 > 0.0;
    }
    data.labels(i, 0) = a ? 1.0 : 0.0;
    data.labels(i, 1) = b ? 1.0 : 0.0;
  }
  return data;
}

}  // namespace kenn
