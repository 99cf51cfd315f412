// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "kenn/demos.hpp"
#include "kenn/io.hpp"
#include "kenn/miner.hpp"
#include "kenn/relational.hpp"
#include "kenn/synthetic.hpp"
#include "kenn/train.hpp"
#include "support.hpp"

namespace {

using namespace kenn;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// Runs fn(i) for i in [0, n) on separate threads; results land by index.
template <class T>
std::vector<T> parallel(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back([&, i] { out[i] = fn(i); });
  }
  return out;
}

Outcome xor_representability() {
  const auto r = run_xor_demo(5000, 0);
  double worst_margin = 1.0;
  for (std::size_t i = 0; i < 4; ++i) worst_margin = std::min(worst_margin, std::abs(r.kenn_outputs[i] - 0.5));
  const bool pass = r.kenn_correct == 4 && worst_margin > 0.4 && r.lr_correct <= 3;
  return {pass, fmt("kenn %d/4 (min margin %.4f), plain LR %d/4", r.kenn_correct, worst_margin, r.lr_correct)};
}

Outcome collisions() {
  const auto rows = run_collision_table(1000000, 0);
  bool pass = true;
  std::string detail;
  for (const auto& row : rows) {
    pass = pass && row.pass;
    detail += fmt("(%d,%d) %.4f vs %.3f; ", row.n, row.m, row.estimate, row.reported);
  }
  return {pass, detail};
}

Outcome minimality() {
  const auto r = run_minimality_check(100, 100000, 0);
  return {r.pass(), fmt("%zu cases: %zu hard counterexamples, %zu control counterexamples", r.cases,
                        r.hard_counterexamples, r.control_counterexamples)};
}

Outcome gradients() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) worst = std::max(worst, relational_gradcheck(seed));
  return {worst < kGradcheckTolerance, fmt("max relative error %.3g over 20 seeds", worst)};
}

Knowledge random_knowledge(testing::Gen& g, const PredicateSchema& s, std::size_t max_clauses) {
  std::vector<Clause> clauses;
  const std::size_t n = g.between(1, max_clauses);
  for (std::size_t i = 0; i < n; ++i) clauses.push_back(g.coin() ? g.unary_clause(s) : g.binary_clause(s));
  return make_knowledge(s, clauses);
}

Outcome oracle_equivalence() {
  testing::Gen g(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto schema = g.schema(g.between(1, 3), g.between(1, 2));
    const std::size_t n = g.between(1, 8);
    std::vector<std::int64_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    const EdgeList e = g.edges(n, g.between(0, 20));
    const UnaryTable u{ids, g.matrix(n, schema.unary_names().size(), 2.0)};
    const BinaryTable b{e, g.matrix(e.size(), schema.binary_names().size(), 2.0)};
    const Knowledge k = random_knowledge(g, schema, 4);
    const auto [up, bp] = relational_ke_forward(u, b, k);
    const auto [uo, bo] = naive_grounding_oracle(u, b, k);
    worst = std::max({worst, max_abs_diff(up, uo), max_abs_diff(bp, bo)});
  }
  return {worst <= 1e-12, fmt("max abs difference %.3g over 50 instances", worst)};
}

Outcome apriori_correctness() {
  testing::Gen g(77);
  std::size_t mismatches = 0, itemsets = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix y = g.bits(g.between(1, 30), g.between(1, 8), g.uniform(0.2, 0.8));
    const auto t = transactions_from_labels(y);
    const double support = g.uniform(0.05, 0.6);
    const auto fast = apriori_frequent(t, support, 0);
    const auto slow = brute_force_frequent(t, support, 0);
    itemsets += slow.size();
    mismatches += fast == slow ? 0 : 1;
  }
  return {mismatches == 0, fmt("%zu of 50 instances differ (%zu itemsets checked)", mismatches, itemsets)};
}

struct ImplicationRun {
  double weight = 0.0;
  double kenn = 0.0;
  double base = 0.0;
};

// Logistic-regression base, 500 rows, half for training; dataset and
// initialisation share the seed.
ImplicationRun implication_run(ImplicationKind kind, std::uint64_t seed) {
  const MultiLabelData data = make_implication_data(kind, 500, seed);
  const auto [train_rows, test_rows] = split_rows(500, 0.5, seed);
  const MultiLabelData train_set = select_rows(data, train_rows);
  const MultiLabelData test_set = select_rows(data, test_rows);
  const PredicateSchema schema({"A", "B"}, {});
  TrainConfig tc;
  tc.lr = 0.01;
  tc.epochs = 500;
  tc.seed = seed;
  KennConfig cfg;
  cfg.base = {train_set.features.cols(), {2}, seed};
  cfg.predicted = {"A", "B"};

  KennModel kenn(cfg, parse_knowledge("_:nA(x),B(x)\n", schema));
  KennModel base(cfg, Knowledge{schema, {}, {}});
  train(kenn, train_set, tc);
  train(base, train_set, tc);
  return {kenn.clause_weights().at(0).second, subset_accuracy(kenn.predict(test_set.features), test_set.labels),
          subset_accuracy(base.predict(test_set.features), test_set.labels)};
}

Outcome clause_weight_learning() {
  auto collect = [](ImplicationKind kind) {
    return parallel<ImplicationRun>(10, [kind](std::size_t s) { return implication_run(kind, s); });
  };
  const auto violated = collect(ImplicationKind::Violated);
  const auto holds = collect(ImplicationKind::Holds);
  auto field = [](const std::vector<ImplicationRun>& runs, double ImplicationRun::*f) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.*f);
    return v;
  };
  const auto v_weights = field(violated, &ImplicationRun::weight);
  const double v_weight = *std::max_element(v_weights.begin(), v_weights.end());
  const double v_gap = mean(field(violated, &ImplicationRun::kenn)) - mean(field(violated, &ImplicationRun::base));
  const double h_weight = mean(field(holds, &ImplicationRun::weight));
  const double h_gain = mean(field(holds, &ImplicationRun::kenn)) - mean(field(holds, &ImplicationRun::base));
  const bool pass = v_weight < 0.05 && std::abs(v_gap) <= 0.01 && h_weight > 1.0 && h_gain >= 0.03;
  return {pass, fmt("violated: max weight %.4f, accuracy gap %+.4f; holds: mean weight %.3f, gain %+.4f", v_weight,
                    v_gap, h_weight, h_gain)};
}

struct CitationRun {
  double base = 0.0;
  double transductive = 0.0;
  double inductive = 0.0;
};

CitationRun citation_run(std::uint64_t seed) {
  SyntheticGraphSpec spec;
  spec.n_nodes = 200;
  spec.n_classes = 4;
  spec.homophily = 0.9;
  spec.seed = seed;
  const GraphDataset full = make_synthetic_citations(spec);
  std::vector<std::string> classes;
  std::string text;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    classes.push_back("C" + std::to_string(c));
    text += "_:nC" + std::to_string(c) + "(x),nCite(x,y),C" + std::to_string(c) + "(y)\n";
  }
  const PredicateSchema schema(classes, {"Cite"});
  const Knowledge knowledge = parse_knowledge(text, schema);
  const RelationalKennConfig cfg{{spec.n_features, {50, 50, 50, spec.n_classes}, seed}, Head::Softmax, {true}};
  TrainConfig tc;
  tc.lr = 0.01;
  tc.epochs = 300;
  tc.seed = seed;

  auto fit_and_score = [&](const Knowledge& k, const GraphDataset& train_graph, const GraphDataset& test_graph) {
    RelationalKennModel model(cfg, k);
    train(model, train_graph, tc);
    const Matrix p = model.predict(test_graph.features, test_graph.edges, test_graph.binary);
    return class_accuracy(p, test_graph.labels, test_graph.test_nodes());
  };
  const GraphDataset trans = split_transductive(full, 0.5, seed);
  const auto [ind_train, ind_test] = split_inductive(full, 0.5, seed);
  CitationRun r;
  r.base = fit_and_score(Knowledge{schema, {}, {}}, trans, trans);
  r.transductive = fit_and_score(knowledge, trans, trans);
  r.inductive = fit_and_score(knowledge, ind_train, ind_test);
  return r;
}

Outcome relational_improvement() {
  const auto runs = parallel<CitationRun>(10, citation_run);
  std::vector<double> base, trans, ind;
  for (const auto& r : runs) {
    base.push_back(r.base);
    trans.push_back(r.transductive);
    ind.push_back(r.inductive);
  }
  const double gain = mean(trans) - mean(base);
  const bool pass = gain >= 0.03 && mean(trans) >= mean(ind);
  return {pass, fmt("base %.4f, transductive %.4f (%+.4f), inductive %.4f", mean(base), mean(trans), gain,
                    mean(ind))};
}

std::string run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kenn");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return std::to_string(code) + "\n" + out.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kenn_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir / "graph");
  fs::create_directories(dir / "flat");
  const auto p = [&](const char* sub, const char* name) { return (dir / sub / name).string(); };
  run_cli({"synth-citations", "--nodes", "60", "--seed", "5", "--out-dir", (dir / "graph").string()});
  run_cli({"synth-implication", "--kind", "holds", "--rows", "200", "--seed", "5", "--out-dir",
           (dir / "flat").string()});

  const std::vector<std::vector<std::string>> commands{
      {"train", "--data", p("graph", "nodes.csv"), "--edges", p("graph", "edges.csv"), "--schema",
       p("graph", "schema.txt"), "--clauses", p("graph", "clauses.kenn"), "--hidden", "16", "--epochs", "30",
       "--lr", "0.01", "--batch-size", "16", "--repeat", "3", "--seed", "7", "--strategy", "greedy"},
      {"train", "--data", p("flat", "data.csv"), "--schema", p("flat", "schema.txt"), "--clauses",
       p("flat", "clauses.kenn"), "--hidden", "none", "--epochs", "50", "--lr", "0.01", "--repeat", "4",
       "--seed", "2", "--batch-size", "32", "--out", p("flat", "model.json")},
      {"eval", p("flat", "model.json"), "--data", p("flat", "data.csv"), "--json"},
      {"mine", p("flat", "data.csv"), "--support", "0.1", "--confidence", "0.8", "--out", p("flat", "mined.kenn")},
      {"demo-collisions", "--samples", "20000", "--seed", "3"},
      {"check-minimality", "--instances", "5", "--trials", "500", "--seed", "3"},
      {"demo-xor", "--epochs", "200", "--seed", "3"},
      {"gradcheck", "--seeds", "2", "--seed", "3"},
  };
  std::size_t differing = 0;
  for (const auto& cmd : commands) differing += run_cli(cmd) == run_cli(cmd) ? 0 : 1;
  fs::remove_all(dir);
  return {differing == 0, fmt("%zu of %zu commands differ between repeated runs", differing, commands.size())};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {1, "xor-representability", 5, xor_representability},
      {2, "collision-probabilities", 30, collisions},
      {3, "boost-minimality", 60, minimality},
      {4, "gradient-correctness", 0, gradients},
      {5, "oracle-equivalence", 0, oracle_equivalence},
      {6, "apriori-correctness", 0, apriori_correctness},
      {7, "clause-weight-learning", 0, clause_weight_learning},
      {8, "relational-improvement", 300, relational_improvement},
      {9, "determinism", 0, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = c.budget_s == 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %d %s: %s [%.2fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                in_time ? "" : fmt(", over the %.0fs budget", c.budget_s).c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
