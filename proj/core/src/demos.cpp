#include "kenn/demos.hpp"

#include <cmath>
#include <random>

#include "kenn/fuzzy.hpp"
#include "kenn/model.hpp"
#include "kenn/relational.hpp"
#include "kenn/train.hpp"

namespace kenn {

Knowledge xor_knowledge() {
  const PredicateSchema schema({"x1", "x2", "y"}, {});
  return parse_knowledge(
      "10.0:nx1(x),nx2(x),ny(x)\n"
      "10.0:nx1(x),x2(x),y(x)\n"
      "10.0:x1(x),nx2(x),y(x)\n"
      "10.0:x1(x),x2(x),ny(x)\n",
      schema);
}

XorDemoResult run_xor_demo(std::size_t lr_epochs, std::uint64_t seed) {
  XorDemoResult r;
  r.inputs = {{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  r.targets = {0, 1, 1, 0};
  Matrix x(4, 2);
  Matrix y(4, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    x(i, 0) = r.inputs[i][0];
    x(i, 1) = r.inputs[i][1];
    y(i, 0) = r.targets[i];
  }

  KennConfig kenn_cfg;
  kenn_cfg.base = {2, {1}, seed};
  kenn_cfg.predicted = {"y"};
  kenn_cfg.input_atoms = {{"x1", 0}, {"x2", 1}};
  KennModel kenn(kenn_cfg, xor_knowledge());
  for (std::size_t id : kenn.base_parameters()) {
    for (double& v : kenn.parameters().value(id).data()) v = 0.0;
  }
  const Matrix kenn_out = kenn.predict(x);

  KennConfig lr_cfg;
  lr_cfg.base = {2, {1}, seed};
  lr_cfg.predicted = {"y"};
  KennModel lr(lr_cfg, Knowledge{PredicateSchema({"y"}, {}), {}, {}});
  TrainConfig train_cfg;
  train_cfg.lr = 0.01;
  train_cfg.epochs = lr_epochs;
  train_cfg.seed = seed;
  train_end_to_end(lr, {x, y}, train_cfg);
  const Matrix lr_out = lr.predict(x);

  for (std::size_t i = 0; i < 4; ++i) {
    r.kenn_outputs[i] = kenn_out(i, 0);
    r.lr_outputs[i] = lr_out(i, 0);
    r.kenn_correct += std::abs(kenn_out(i, 0) - r.targets[i]) < 0.1 ? 1 : 0;
    r.lr_correct += (lr_out(i, 0) >= 0.5) == (r.targets[i] == 1.0) ? 1 : 0;
  }
  r.pass = r.kenn_correct == 4 && r.lr_correct <= 3;
  return r;
}

std::vector<CollisionRow> run_collision_table(std::size_t samples, std::uint64_t seed, double tolerance) {
  struct Row {
    int n, m;
    double reported;
  };
  static constexpr Row kRows[] = {{2, 2, 0.167}, {2, 3, 0.083}, {3, 3, 0.033}, {3, 4, 0.017}, {4, 4, 0.007}};
  std::vector<CollisionRow> out;
  std::uint64_t row_seed = seed;
  for (const Row& row : kRows) {
    CollisionRow r;
    r.n = row.n;
    r.m = row.m;
    r.reported = row.reported;
    r.closed_form = collision_probability(row.n, row.m);
    r.estimate = collision_mc(row.n, row.m, samples, row_seed++);
    r.pass = std::abs(r.estimate - r.reported) <= tolerance;
    out.push_back(r);
  }
  return out;
}

MinimalityReport run_minimality_check(std::size_t instances, std::size_t trials, std::uint64_t seed) {
  MinimalityReport report;
  report.instances = instances;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(2, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < instances; ++i) {
    std::vector<double> t(static_cast<std::size_t>(length(rng)));
    for (double& v : t) v = unit(rng);
    const double f = unit(rng) * (1.0 - godel(t));
    const auto hard = boost_hard(f, t);
    const auto control = boost_uniform(f, t);
    for (double p : {1.0, 2.0, 3.0}) {
      const std::uint64_t probe_seed = rng();
      ++report.cases;
      if (minimality_witness_search(t, hard, p, trials, probe_seed)) ++report.hard_counterexamples;
      if (minimality_witness_search(t, control, p, trials, probe_seed)) ++report.control_counterexamples;
    }
  }
  return report;
}

double relational_gradcheck(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const PredicateSchema schema({"A", "B", "C"}, {"R"});
  const Knowledge knowledge = parse_knowledge(
      "_(0.7):nA(x),B(x)\n"
      "_:A(x),C(x),nB(x)\n"
      "_(0.9):nA(x),nR(x,y),A(y)\n",
      schema);

  constexpr std::size_t kNodes = 8;
  constexpr std::size_t kFeatures = 3;
  RelationalKennConfig cfg;
  cfg.base = {kFeatures, {5, 5, 3}, seed};
  cfg.head = Head::Sigmoid;
  RelationalKennModel model(cfg, knowledge);
  Matrix features(kNodes, kFeatures);
  for (double& v : features.data()) v = normal(rng);
  // Central differences are meaningless across a ReLU kink. Zero biases put a
  // node whose hidden layer is entirely dead exactly on the next kink, so draw
  // biases until every hidden preactivation keeps a margin from zero.
  constexpr double kKinkMargin = 1e-3;
  for (bool clear = false; !clear;) {
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
      if (model.parameters().name(i).starts_with("base.b")) {
        for (double& v : model.parameters().value(i).data()) v = 0.5 * normal(rng);
      }
    }
    Tape probe;
    const auto bound = probe.bind(model.parameters());
    model.base_preactivations(bound, probe.constant(features));
    clear = true;
    for (std::size_t id = 0; id < probe.size(); ++id) {
      if (probe.op(id) != "add_row_broadcast") continue;
      for (double v : probe.value(id).data()) clear = clear && std::abs(v) >= kKinkMargin;
    }
  }

  EdgeList edges;
  std::uniform_int_distribution<std::size_t> node(0, kNodes - 1);
  for (std::size_t e = 0; e < 14; ++e) {
    edges.sx.push_back(node(rng));
    edges.sy.push_back(node(rng));
  }
  Matrix binary(edges.size(), 1);
  for (double& v : binary.data()) v = normal(rng);
  Matrix unary_targets(kNodes, 3);
  for (double& v : unary_targets.data()) v = unit(rng);
  Matrix binary_targets(edges.size(), 1);
  for (double& v : binary_targets.data()) v = unit(rng);

  std::vector<Matrix> inputs;
  for (std::size_t i = 0; i < model.parameters().size(); ++i) inputs.push_back(model.parameters().value(i));
  inputs.push_back(binary);
  const std::size_t n_params = model.parameters().size();

  const ScalarFn fn = [&](Tape& tape, std::span<const Var> leaves) {
    const auto bound = leaves.first(n_params);
    auto out = model.preactivations(bound, tape.constant(features), edges, leaves[n_params]);
    Var unary_loss = bce_loss(sigmoid(out.unary), unary_targets);
    Var binary_loss = bce_loss(sigmoid(out.binary), binary_targets);
    return add(unary_loss, binary_loss);
  };
  return finite_diff_check(fn, inputs);
}

}  // namespace kenn
