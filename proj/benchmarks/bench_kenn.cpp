#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "kenn/enhancer.hpp"
#include "kenn/miner.hpp"
#include "kenn/model.hpp"
#include "kenn/relational.hpp"
#include "kenn/synthetic.hpp"
#include "kenn/train.hpp"

namespace {

using namespace kenn;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

// Every pair of predicates as a two-literal clause.
Knowledge pairwise_knowledge(std::size_t n_predicates) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n_predicates; ++i) names.push_back("P" + std::to_string(i));
  std::string text;
  for (std::size_t i = 0; i < n_predicates; ++i) {
    for (std::size_t j = i + 1; j < n_predicates; ++j) text += "_:nP" + std::to_string(i) + "(x),P" + std::to_string(j) + "(x)\n";
  }
  return parse_knowledge(text, PredicateSchema(names, {}));
}

void BM_KnowledgeEnhancerForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const Knowledge k = pairwise_knowledge(14);
  ParameterSet params;
  const KnowledgeEnhancer ke(k.unary, unary_layout(k.schema), params, "clause.");
  const Matrix z = random_matrix(rows, 14, 1);
  for (auto _ : state) {
    Tape tape;
    const auto bound = tape.bind(params);
    benchmark::DoNotOptimize(ke.enhance(bound, tape.constant(z)).value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * k.unary.size()));
}
BENCHMARK(BM_KnowledgeEnhancerForward)->Arg(64)->Arg(1024);

void BM_KnowledgeEnhancerBackward(benchmark::State& state) {
  const Knowledge k = pairwise_knowledge(14);
  ParameterSet params;
  const KnowledgeEnhancer ke(k.unary, unary_layout(k.schema), params, "clause.");
  const Matrix z = random_matrix(256, 14, 2);
  const Matrix targets(256, 14, 1.0);
  for (auto _ : state) {
    Tape tape;
    const auto bound = tape.bind(params);
    Var loss = bce_loss(sigmoid(ke.enhance(bound, tape.param(z))), targets);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.gradients(bound));
  }
}
BENCHMARK(BM_KnowledgeEnhancerBackward);

void BM_RelationalForward(benchmark::State& state) {
  SyntheticGraphSpec spec;
  spec.n_nodes = static_cast<std::size_t>(state.range(0));
  const GraphDataset g = make_synthetic_citations(spec);
  std::vector<std::string> classes;
  std::string text;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    classes.push_back("C" + std::to_string(c));
    text += "_:nC" + std::to_string(c) + "(x),nCite(x,y),C" + std::to_string(c) + "(y)\n";
  }
  const RelationalKennModel model({{spec.n_features, {50, spec.n_classes}, 0}, Head::Softmax, {true}},
                                  parse_knowledge(text, PredicateSchema(classes, {"Cite"})));
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(g.features, g.edges, g.binary).data().data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.edges.size()));
}
BENCHMARK(BM_RelationalForward)->Arg(200)->Arg(2000);

void BM_Apriori(benchmark::State& state) {
  const auto n_labels = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::bernoulli_distribution bit(0.4);
  Matrix y(1000, n_labels);
  for (double& v : y.data()) v = bit(rng) ? 1.0 : 0.0;
  const auto t = transactions_from_labels(y);
  for (auto _ : state) benchmark::DoNotOptimize(apriori_frequent(t, 0.05).size());
}
BENCHMARK(BM_Apriori)->Arg(6)->Arg(14);

}  // namespace

// The packaged benchmark_main archive carries LTO objects from another
// compiler release, so the entry point is defined here.
BENCHMARK_MAIN();
