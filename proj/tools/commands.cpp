#include "commands.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

#include "kenn/checkpoint.hpp"
#include "kenn/demos.hpp"
#include "kenn/error.hpp"
#include "kenn/io.hpp"
#include "kenn/logic.hpp"
#include "kenn/miner.hpp"
#include "kenn/model.hpp"
#include "kenn/synthetic.hpp"
#include "kenn/train.hpp"

namespace kenn::cli {

namespace {

using Json = nlohmann::ordered_json;

// Data-level failure that is not an exception from the library (no rules
// mined and the like); maps to kRuntimeError.
class DataError : public Error {
 public:
  using Error::Error;
};

std::string line_of(const Json& j) { return j.dump() + "\n"; }

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  if (text.empty() || text == "none") return widths;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || v == 0) throw ValidationError("--hidden expects positive widths like 50,50");
    widths.push_back(v);
  }
  return widths;
}

std::string join_widths(const std::vector<std::size_t>& widths) {
  if (widths.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < widths.size(); ++i) s += (i ? "," : "") + std::to_string(widths[i]);
  return s;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> names;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) names.push_back(item);
  return names;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---------------------------------------------------------------- mine

struct MineOptions {
  std::string labels_csv;
  std::optional<double> support;
  std::optional<double> confidence;
  std::size_t max_len = kDefaultMaxItemsetSize;
  bool yeast = false;
  bool emotions = false;
  std::string names;
  std::string schema;
  std::string out;
  std::string schema_out;
};

inline constexpr double kDefaultSupport = 0.2;
inline constexpr double kDefaultConfidence = 0.9;

void print_histogram(std::ostream& err, const char* title, const std::vector<double>& values) {
  std::array<std::size_t, 10> bins{};
  for (double v : values) bins[std::min<std::size_t>(9, static_cast<std::size_t>(v * 10.0))]++;
  err << title << '\n';
  for (std::size_t b = 0; b < bins.size(); ++b) {
    err << "  [" << fixed(b / 10.0, 1) << ", " << fixed((b + 1) / 10.0, 1) << (b == 9 ? "]" : ")") << ' '
        << std::setw(6) << bins[b] << ' ' << std::string(std::min<std::size_t>(bins[b], 60), '#') << '\n';
  }
}

int cmd_mine(const MineOptions& o, std::ostream& out, std::ostream& err) {
  double support = o.support.value_or(kDefaultSupport);
  double confidence = o.confidence.value_or(kDefaultConfidence);
  if (o.yeast) support = kYeastPreset.support, confidence = kYeastPreset.confidence;
  if (o.emotions) support = kEmotionsPreset.support, confidence = kEmotionsPreset.confidence;
  if (!(support > 0.0 && support <= 1.0)) throw ValidationError("--support must lie in (0, 1]");
  if (!(confidence > 0.0 && confidence <= 1.0)) throw ValidationError("--confidence must lie in (0, 1]");

  std::istringstream csv(read_file(o.labels_csv));
  const MultiLabelData data = read_multilabel_csv(csv);
  const std::size_t n_labels = data.labels.cols();

  std::vector<std::string> names;
  if (!o.schema.empty()) {
    names = parse_schema(read_file(o.schema)).unary_names();
  } else if (!o.names.empty()) {
    names = split_names(o.names);
  } else {
    for (std::size_t j = 0; j < n_labels; ++j) names.push_back("L" + std::to_string(j));
  }
  if (names.size() != n_labels) {
    throw ValidationError("got " + std::to_string(names.size()) + " label names for " + std::to_string(n_labels) +
                          " label columns");
  }
  const PredicateSchema schema(names, {});

  const auto transactions = transactions_from_labels(data.labels);
  const auto frequent = apriori_frequent(transactions, support, o.max_len);
  const auto rules = rules_from_frequent(frequent, confidence);
  const auto clauses = rules_to_clauses(rules, names);

  std::vector<double> supports, confidences;
  for (const auto& r : rules) {
    supports.push_back(r.support);
    confidences.push_back(r.confidence);
  }
  err << rules.size() << " rules, " << clauses.size() << " clauses from " << transactions.size() << " rows\n";
  print_histogram(err, "rule support", supports);
  print_histogram(err, "rule confidence", confidences);

  Json summary;
  summary["type"] = "mine";
  summary["rows"] = transactions.size();
  summary["labels"] = n_labels;
  summary["support"] = support;
  summary["confidence"] = confidence;
  summary["max_len"] = o.max_len;
  summary["frequent_itemsets"] = frequent.size();
  summary["rules"] = rules.size();
  summary["clauses"] = clauses.size();
  out << line_of(summary);

  if (rules.empty()) throw DataError("no rules found at support " + format_number(support) + ", confidence " +
                                     format_number(confidence));

  std::string text = "# mined with support " + format_number(support) + ", confidence " + format_number(confidence) +
                     ", max itemset size " + std::to_string(o.max_len) + "\n";
  for (const auto& c : clauses) text += serialize_clause(c) + "\n";
  write_text(o.out, text);
  if (!o.schema_out.empty()) write_text(o.schema_out, serialize_schema(schema));
  return kOk;
}

// ---------------------------------------------------------------- train / eval

enum class Paradigm { Transductive, Inductive };

const char* paradigm_name(Paradigm p) { return p == Paradigm::Transductive ? "transductive" : "inductive"; }

Paradigm parse_paradigm(const std::string& s) {
  if (s == "transductive") return Paradigm::Transductive;
  if (s == "inductive") return Paradigm::Inductive;
  throw ValidationError("unknown paradigm '" + s + "'");
}

struct TrainOptions {
  std::string data;
  std::string edges;
  std::string schema;
  std::string clauses;
  std::string strategy = "e2e";
  std::string paradigm = "transductive";
  double train_frac = 0.5;
  std::uint64_t seed = 0;
  std::size_t epochs = 300;
  double lr = 1e-3;
  std::size_t batch_size = 0;
  std::string hidden = "50,50,50";
  std::string head;
  std::size_t repeat = 1;
  std::size_t threads = 0;
  std::size_t log_every = 10;
  std::string out;
  std::string report;
};

// Either a flat multi-label table or a graph, loaded once and shared by runs.
struct Dataset {
  std::optional<MultiLabelData> flat;
  std::optional<GraphDataset> graph;
  bool is_graph() const { return graph.has_value(); }
};

Dataset load_dataset(const std::string& data_path, const std::string& edges_path, const PredicateSchema& schema) {
  Dataset d;
  std::istringstream data_in(read_file(data_path));
  if (edges_path.empty()) {
    d.flat = read_multilabel_csv(data_in);
    return d;
  }
  const NodeTable nodes = read_node_csv(data_in);
  std::istringstream edges_in(read_file(edges_path));
  BinaryTable edges = read_edge_csv(edges_in, nodes, schema.binary_names().size());
  d.graph = make_graph_dataset(nodes, std::move(edges), schema.unary_names().size());
  return d;
}

Json weights_json(const std::vector<std::pair<std::string, double>>& weights) {
  Json list = Json::array();
  for (const auto& [clause, w] : weights) list.push_back(Json{{"clause", clause}, {"weight", w}});
  return list;
}

// Metrics on the test split described by `meta`. Shared by train and eval so
// eval of a saved model reproduces the training report.
Json evaluate(const KennModel& model, const MultiLabelData& data, double train_frac, std::uint64_t seed) {
  const auto [train_rows, test_rows] = split_rows(data.features.rows(), train_frac, seed);
  const MultiLabelData test = select_rows(data, test_rows);
  const Matrix pred = model.predict(test.features);
  Json m;
  m["n_test"] = test_rows.size();
  m["hamming_loss"] = hamming_loss(pred, test.labels);
  m["subset_accuracy"] = subset_accuracy(pred, test.labels);
  m["label_accuracy"] = label_accuracy(pred, test.labels);
  return m;
}

Json evaluate(const RelationalKennModel& model, const GraphDataset& data, Paradigm paradigm, double train_frac,
              std::uint64_t seed) {
  Json m;
  if (paradigm == Paradigm::Transductive) {
    const GraphDataset split = split_transductive(data, train_frac, seed);
    const Matrix probs = model.predict(split.features, split.edges, split.binary);
    const auto test = split.test_nodes();
    m["n_test"] = test.size();
    m["accuracy"] = class_accuracy(probs, split.labels, test);
  } else {
    const auto [train_graph, test_graph] = split_inductive(data, train_frac, seed);
    const Matrix probs = model.predict(test_graph.features, test_graph.edges, test_graph.binary);
    m["n_test"] = test_graph.size();
    m["accuracy"] = class_accuracy(probs, test_graph.labels);
  }
  return m;
}

struct RunOutcome {
  std::uint64_t seed = 0;
  std::vector<Json> lines;
  Json metrics;
  std::string checkpoint;
};

void add_epochs(RunOutcome& run, const char* phase, const std::vector<double>& curve, std::size_t every) {
  for (std::size_t e = 0; e < curve.size(); ++e) {
    const bool last = e + 1 == curve.size();
    if (every == 0 ? !last : (e % every != 0 && !last)) continue;
    run.lines.push_back(Json{{"type", "epoch"}, {"seed", run.seed}, {"phase", phase}, {"epoch", e + 1},
                             {"loss", curve[e]}});
  }
}

void add_curves(RunOutcome& run, const TrainResult& result, Strategy strategy, std::size_t every) {
  add_epochs(run, strategy == Strategy::EndToEnd ? "joint" : "base", result.loss_curve, every);
  if (strategy == Strategy::Greedy) add_epochs(run, "clauses", result.clause_loss_curve, every);
}

struct TrainPlan {
  const TrainOptions* opts = nullptr;
  const Knowledge* knowledge = nullptr;
  const Dataset* data = nullptr;
  std::vector<std::size_t> hidden;
  Head head = Head::Sigmoid;
  Strategy strategy = Strategy::EndToEnd;
  Paradigm paradigm = Paradigm::Transductive;
};

CheckpointMeta run_meta(const TrainPlan& plan, std::uint64_t seed) {
  return {{"mode", plan.data->is_graph() ? "graph" : "flat"},
          {"paradigm", paradigm_name(plan.paradigm)},
          {"seed", std::to_string(seed)},
          {"strategy", strategy_name(plan.strategy)},
          {"train_frac", format_number(plan.opts->train_frac)}};
}

RunOutcome run_once(const TrainPlan& plan, std::uint64_t seed, bool keep_checkpoint) {
  const TrainOptions& o = *plan.opts;
  RunOutcome run;
  run.seed = seed;
  TrainConfig cfg;
  cfg.strategy = plan.strategy;
  cfg.lr = o.lr;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.seed = seed;
  cfg.validate();

  auto finish = [&](const auto& model) {
    run.lines.push_back(run.metrics);
    run.lines.push_back(
        Json{{"type", "clause_weights"}, {"seed", seed}, {"weights", weights_json(model.clause_weights())}});
    if (keep_checkpoint) {
      std::ostringstream ckpt;
      save_checkpoint(ckpt, model, run_meta(plan, seed));
      run.checkpoint = ckpt.str();
    }
  };

  if (!plan.data->is_graph()) {
    const MultiLabelData& all = *plan.data->flat;
    KennConfig kc;
    kc.base.input_width = all.features.cols();
    kc.base.layer_widths = plan.hidden;
    kc.base.layer_widths.push_back(all.labels.cols());
    kc.base.seed = seed;
    kc.head = plan.head;
    kc.predicted = plan.knowledge->schema.unary_names();
    KennModel model(kc, *plan.knowledge);
    const auto train_rows = split_rows(all.features.rows(), o.train_frac, seed).first;
    const TrainResult result = train(model, select_rows(all, train_rows), cfg);
    add_curves(run, result, plan.strategy, o.log_every);
    Json m = evaluate(model, all, o.train_frac, seed);
    run.metrics = Json{{"type", "metrics"}, {"seed", seed}};
    run.metrics.update(m);
    finish(model);
    return run;
  }

  const GraphDataset& all = *plan.data->graph;
  RelationalKennConfig rc;
  rc.base.input_width = all.features.cols();
  rc.base.layer_widths = plan.hidden;
  rc.base.layer_widths.push_back(all.n_classes);
  rc.base.seed = seed;
  rc.head = plan.head;
  // Relations come from the edge file, so they are given rather than predicted.
  rc.clamped.assign(plan.knowledge->schema.binary_names().size(), true);
  RelationalKennModel model(rc, *plan.knowledge);
  TrainResult result;
  if (plan.paradigm == Paradigm::Transductive) {
    result = train(model, split_transductive(all, o.train_frac, seed), cfg);
  } else {
    result = train(model, split_inductive(all, o.train_frac, seed).first, cfg);
  }
  add_curves(run, result, plan.strategy, o.log_every);
  Json m = evaluate(model, all, plan.paradigm, o.train_frac, seed);
  run.metrics = Json{{"type", "metrics"}, {"seed", seed}};
  run.metrics.update(m);
  finish(model);
  return run;
}

std::vector<RunOutcome> run_pool(const TrainPlan& plan, std::size_t repeat, std::size_t threads) {
  std::vector<RunOutcome> runs(repeat);
  std::vector<std::exception_ptr> errors(repeat);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < repeat; i = next++) {
      try {
        runs[i] = run_once(plan, plan.opts->seed + i, i == 0);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, repeat);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::sort(runs.begin(), runs.end(), [](const RunOutcome& a, const RunOutcome& b) { return a.seed < b.seed; });
  return runs;
}

Json summarize(const std::vector<RunOutcome>& runs) {
  Json summary{{"type", "summary"}, {"runs", runs.size()}};
  Json mean, stdev;
  for (const auto& [key, value] : runs.front().metrics.items()) {
    if (key == "type" || key == "seed" || !value.is_number_float()) continue;
    double s = 0.0;
    for (const auto& r : runs) s += r.metrics.at(key).get<double>();
    const double mu = s / static_cast<double>(runs.size());
    double ss = 0.0;
    for (const auto& r : runs) ss += std::pow(r.metrics.at(key).get<double>() - mu, 2);
    mean[key] = mu;
    stdev[key] = runs.size() > 1 ? std::sqrt(ss / static_cast<double>(runs.size() - 1)) : 0.0;
  }
  summary["mean"] = mean;
  summary["std"] = stdev;
  return summary;
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  if (!(o.train_frac > 0.0 && o.train_frac < 1.0)) throw ValidationError("--train-frac must lie in (0, 1)");
  if (o.repeat == 0) throw ValidationError("--repeat must be at least 1");

  TrainPlan plan;
  plan.opts = &o;
  plan.hidden = parse_widths(o.hidden);
  plan.strategy = parse_strategy(o.strategy);
  plan.paradigm = parse_paradigm(o.paradigm);
  const bool graph = !o.edges.empty();
  plan.head = o.head.empty() ? (graph ? Head::Softmax : Head::Sigmoid) : parse_head(o.head);

  const PredicateSchema schema = parse_schema(read_file(o.schema));
  const Knowledge knowledge = parse_knowledge(read_file(o.clauses), schema);
  const Dataset data = load_dataset(o.data, o.edges, schema);
  if (!graph && !schema.binary_names().empty()) throw ValidationError("binary predicates need --edges");
  plan.knowledge = &knowledge;
  plan.data = &data;

  Json config{{"type", "config"},
              {"mode", graph ? "graph" : "flat"},
              {"strategy", strategy_name(plan.strategy)},
              {"paradigm", paradigm_name(plan.paradigm)},
              {"train_frac", o.train_frac},
              {"seed", o.seed},
              {"repeat", o.repeat},
              {"epochs", o.epochs},
              {"lr", o.lr},
              {"batch_size", o.batch_size},
              {"hidden", join_widths(plan.hidden)},
              {"head", head_name(plan.head)},
              {"clauses", knowledge.clause_count()}};

  const auto runs = run_pool(plan, o.repeat, o.threads);

  std::string report = line_of(config);
  for (const auto& r : runs) {
    for (const auto& l : r.lines) report += line_of(l);
  }
  const Json summary = summarize(runs);
  report += line_of(summary);
  if (o.report.empty() || o.report == "-") {
    out << report;
  } else {
    write_text(o.report, report);
  }
  if (!o.out.empty()) write_text(o.out, runs.front().checkpoint);

  for (const auto& r : runs) {
    err << "seed " << r.seed;
    for (const auto& [key, value] : r.metrics.items()) {
      if (value.is_number_float()) err << "  " << key << ' ' << fixed(value.get<double>());
    }
    err << '\n';
  }
  for (const auto& [key, value] : summary["mean"].items()) {
    err << "mean " << key << ' ' << fixed(value.get<double>()) << " (std " << fixed(summary["std"][key].get<double>())
        << ")\n";
  }
  return kOk;
}

struct EvalOptions {
  std::string checkpoint;
  std::string data;
  std::string edges;
  bool json = false;
};

std::string meta_value(const CheckpointMeta& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw ParseError("checkpoint meta lacks '" + key + "'", 0, 0);
  return it->second;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream&) {
  std::istringstream ckpt(read_file(o.checkpoint));
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  const std::uint64_t seed = std::stoull(meta_value(loaded.meta, "seed"));
  const double train_frac = std::stod(meta_value(loaded.meta, "train_frac"));
  const Paradigm paradigm = parse_paradigm(meta_value(loaded.meta, "paradigm"));

  Json metrics{{"type", "metrics"}, {"seed", seed}};
  if (const auto* flat = std::get_if<KennModel>(&loaded.model)) {
    if (!o.edges.empty()) throw ValidationError("a flat model takes no --edges");
    const Dataset data = load_dataset(o.data, "", flat->knowledge().schema);
    metrics.update(evaluate(*flat, *data.flat, train_frac, seed));
  } else {
    const auto& rel = std::get<RelationalKennModel>(loaded.model);
    if (o.edges.empty()) throw ValidationError("a relational model needs --edges");
    const Dataset data = load_dataset(o.data, o.edges, rel.knowledge().schema);
    metrics.update(evaluate(rel, *data.graph, paradigm, train_frac, seed));
  }

  if (o.json) {
    out << line_of(metrics);
  } else {
    for (const auto& [key, value] : metrics.items()) {
      if (key == "type") continue;
      out << key << ": " << (value.is_number_float() ? fixed(value.get<double>()) : value.dump()) << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- demos

int verdict(bool pass, const char* name, std::ostream& err) {
  err << (pass ? "PASS " : "FAIL ") << name << '\n';
  return pass ? kOk : kCheckFailed;
}

int cmd_demo_xor(std::size_t epochs, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  const XorDemoResult r = run_xor_demo(epochs, seed);
  constexpr double kTolerance = 0.1;
  err << "x1 x2 | y | kenn    margin  | lr\n";
  for (std::size_t i = 0; i < 4; ++i) {
    const double error = std::abs(r.kenn_outputs[i] - r.targets[i]);
    out << line_of(Json{{"type", "xor_row"},
                        {"x1", r.inputs[i][0]},
                        {"x2", r.inputs[i][1]},
                        {"target", r.targets[i]},
                        {"kenn", r.kenn_outputs[i]},
                        {"margin", kTolerance - error},
                        {"lr", r.lr_outputs[i]}});
    err << ' ' << r.inputs[i][0] << "  " << r.inputs[i][1] << " | " << r.targets[i] << " | " << fixed(r.kenn_outputs[i])
        << "  " << fixed(kTolerance - error) << "  | " << fixed(r.lr_outputs[i]) << '\n';
  }
  out << line_of(Json{{"type", "xor_summary"},
                      {"kenn_correct", r.kenn_correct},
                      {"lr_correct", r.lr_correct},
                      {"lr_epochs", epochs},
                      {"pass", r.pass}});
  err << "kenn " << r.kenn_correct << "/4 within " << kTolerance << ", plain LR " << r.lr_correct << "/4\n";
  return verdict(r.pass, "demo-xor", err);
}

int cmd_demo_collisions(std::size_t samples, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (samples == 0) throw ValidationError("--samples must be positive");
  const auto rows = run_collision_table(samples, seed);
  bool pass = true;
  err << " n  m | reported | B(n,m)   | estimate\n";
  for (const auto& r : rows) {
    pass = pass && r.pass;
    out << line_of(Json{{"type", "collision_row"},
                        {"n", r.n},
                        {"m", r.m},
                        {"reported", r.reported},
                        {"closed_form", r.closed_form},
                        {"estimate", r.estimate},
                        {"pass", r.pass}});
    err << ' ' << r.n << "  " << r.m << " | " << fixed(r.reported, 3) << "    | " << fixed(r.closed_form) << "   | "
        << fixed(r.estimate) << (r.pass ? "" : "  <-") << '\n';
  }
  out << line_of(Json{{"type", "collision_summary"}, {"samples", samples}, {"tolerance", kCollisionTolerance},
                      {"pass", pass}});
  return verdict(pass, "demo-collisions", err);
}

int cmd_check_minimality(std::size_t instances, std::size_t trials, std::uint64_t seed, std::ostream& out,
                         std::ostream& err) {
  if (instances == 0 || trials == 0) throw ValidationError("--instances and --trials must be positive");
  const MinimalityReport r = run_minimality_check(instances, trials, seed);
  out << line_of(Json{{"type", "minimality"},
                      {"instances", r.instances},
                      {"cases", r.cases},
                      {"trials", trials},
                      {"hard_counterexamples", r.hard_counterexamples},
                      {"control_counterexamples", r.control_counterexamples},
                      {"pass", r.pass()}});
  err << "boost_hard counterexamples: " << r.hard_counterexamples << " of " << r.cases << " (instance, p) cases\n"
      << "uniform control counterexamples: " << r.control_counterexamples << " of " << r.cases << " cases\n";
  return verdict(r.pass(), "check-minimality", err);
}

int cmd_gradcheck(std::size_t seeds, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (seeds == 0) throw ValidationError("--seeds must be positive");
  double worst = 0.0;
  for (std::uint64_t s = seed; s < seed + seeds; ++s) {
    const double e = relational_gradcheck(s);
    worst = std::max(worst, e);
    out << line_of(Json{{"type", "gradcheck"}, {"seed", s}, {"max_rel_error", e}});
  }
  const bool pass = worst < kGradcheckTolerance;
  out << line_of(Json{{"type", "gradcheck_summary"}, {"seeds", seeds}, {"max_rel_error", worst},
                      {"tolerance", kGradcheckTolerance}, {"pass", pass}});
  err << "max relative error " << worst << " over " << seeds << " seeds (tolerance " << kGradcheckTolerance << ")\n";
  return verdict(pass, "gradcheck", err);
}

// ---------------------------------------------------------------- generators

int cmd_synth_citations(const SyntheticGraphSpec& spec, const std::string& dir, std::ostream& out) {
  spec.validate();
  const GraphDataset data = make_synthetic_citations(spec);
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);

  std::vector<std::string> classes;
  for (std::size_t c = 0; c < spec.n_classes; ++c) classes.push_back("C" + std::to_string(c));
  const PredicateSchema schema(classes, {"Cite"});
  std::string clauses;
  for (const auto& c : classes) clauses += "_:n" + c + "(x),nCite(x,y)," + c + "(y)\n";

  std::ostringstream nodes, edges;
  write_node_csv(nodes, data);
  write_edge_csv(edges, data);
  write_text((base / "nodes.csv").string(), nodes.str());
  write_text((base / "edges.csv").string(), edges.str());
  write_text((base / "schema.txt").string(), serialize_schema(schema));
  write_text((base / "clauses.kenn").string(), clauses);
  out << line_of(Json{{"type", "synth_citations"}, {"nodes", data.size()}, {"edges", data.edges.size()},
                      {"classes", spec.n_classes}, {"features", spec.n_features}, {"seed", spec.seed}});
  return kOk;
}

int cmd_synth_implication(const std::string& kind, std::size_t rows, std::uint64_t seed, const std::string& dir,
                          std::ostream& out) {
  if (kind != "holds" && kind != "violated") throw ValidationError("--kind must be holds or violated");
  if (rows == 0) throw ValidationError("--rows must be positive");
  const MultiLabelData data =
      make_implication_data(kind == "holds" ? ImplicationKind::Holds : ImplicationKind::Violated, rows, seed);
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ostringstream csv;
  write_multilabel_csv(csv, data);
  write_text((base / "data.csv").string(), csv.str());
  write_text((base / "schema.txt").string(), serialize_schema(PredicateSchema({"A", "B"}, {})));
  write_text((base / "clauses.kenn").string(), "_:nA(x),B(x)\n");
  out << line_of(Json{{"type", "synth_implication"}, {"kind", kind}, {"rows", rows}, {"seed", seed}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge enhancer: clause injection, mining, training and checks", "kenn"};
  app.require_subcommand(1);
  app.allow_extras(false);

  MineOptions mine;
  auto* mine_cmd = app.add_subcommand("mine", "mine clauses from a multi-label CSV with Apriori");
  mine_cmd->add_option("labels", mine.labels_csv, "multi-label CSV (features,|,label bits)")->required();
  auto* support_opt = mine_cmd->add_option("--support", mine.support, "minimum itemset support (default 0.2)");
  auto* conf_opt = mine_cmd->add_option("--confidence", mine.confidence, "minimum rule confidence (default 0.9)");
  mine_cmd->add_option("--max-len", mine.max_len, "largest itemset size, 0 for unbounded")->capture_default_str();
  auto* yeast = mine_cmd->add_flag("--yeast", mine.yeast, "support 0.2, confidence 0.99");
  auto* emotions = mine_cmd->add_flag("--emotions", mine.emotions, "support 0.2, confidence 0.7");
  yeast->excludes(emotions)->excludes(support_opt)->excludes(conf_opt);
  emotions->excludes(support_opt)->excludes(conf_opt);
  auto* names_opt = mine_cmd->add_option("--names", mine.names, "comma-separated label names");
  mine_cmd->add_option("--schema", mine.schema, "schema file whose unary predicates name the labels")
      ->excludes(names_opt);
  mine_cmd->add_option("--out", mine.out, "clause file to write")->required();
  mine_cmd->add_option("--schema-out", mine.schema_out, "also write a schema for the label names");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "train a KENN model and write a run report");
  train_cmd->add_option("--data", tr.data, "multi-label CSV, or node CSV when --edges is given")->required();
  train_cmd->add_option("--edges", tr.edges, "edge list; switches to graph mode");
  train_cmd->add_option("--schema", tr.schema, "schema file")->required();
  train_cmd->add_option("--clauses", tr.clauses, "clause file (may be empty)")->required();
  train_cmd->add_option("--strategy", tr.strategy)->check(CLI::IsMember({"e2e", "greedy"}))->capture_default_str();
  train_cmd->add_option("--paradigm", tr.paradigm)
      ->check(CLI::IsMember({"transductive", "inductive"}))
      ->capture_default_str();
  train_cmd->add_option("--train-frac", tr.train_frac)->capture_default_str();
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size, "0 for full batch")->capture_default_str();
  train_cmd->add_option("--hidden", tr.hidden, "hidden widths, or none for logistic regression")
      ->capture_default_str();
  train_cmd->add_option("--head", tr.head, "sigmoid or softmax (default: softmax for graphs)")
      ->check(CLI::IsMember({"sigmoid", "softmax"}));
  train_cmd->add_option("--repeat", tr.repeat, "runs with seeds seed..seed+N-1")->capture_default_str();
  train_cmd->add_option("--threads", tr.threads, "worker threads for --repeat, 0 for all cores");
  train_cmd->add_option("--log-every", tr.log_every, "epoch report interval, 0 for last only")
      ->capture_default_str();
  train_cmd->add_option("--out", tr.out, "checkpoint of the first run");
  train_cmd->add_option("--report", tr.report, "report file (default stdout)");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on its test split");
  eval_cmd->add_option("checkpoint", ev.checkpoint)->required();
  eval_cmd->add_option("--data", ev.data)->required();
  eval_cmd->add_option("--edges", ev.edges);
  eval_cmd->add_flag("--json", ev.json, "print one JSON line");

  std::size_t xor_epochs = 5000;
  std::uint64_t seed = 0;
  auto* xor_cmd = app.add_subcommand("demo-xor", "XOR through fixed clauses on a logistic regression");
  xor_cmd->add_option("--epochs", xor_epochs, "epochs for the plain LR")->capture_default_str();
  xor_cmd->add_option("--seed", seed)->capture_default_str();

  std::size_t samples = 1000000;
  auto* coll_cmd = app.add_subcommand("demo-collisions", "Monte Carlo collision probabilities");
  coll_cmd->add_option("--samples", samples)->capture_default_str();
  coll_cmd->add_option("--seed", seed)->capture_default_str();

  std::size_t trials = 100000;
  std::size_t instances = 100;
  auto* min_cmd = app.add_subcommand("check-minimality", "search for smaller boosts than boost_hard");
  min_cmd->add_option("--trials", trials, "sampled competitors per instance")->capture_default_str();
  min_cmd->add_option("--instances", instances)->capture_default_str();
  min_cmd->add_option("--seed", seed)->capture_default_str();

  std::size_t seeds = 20;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite differences on the relational pipeline");
  grad_cmd->add_option("--seeds", seeds)->capture_default_str();
  grad_cmd->add_option("--seed", seed, "first seed")->capture_default_str();

  SyntheticGraphSpec spec;
  std::string dir;
  auto* cit_cmd = app.add_subcommand("synth-citations", "write a synthetic citation graph");
  cit_cmd->add_option("--nodes", spec.n_nodes)->capture_default_str();
  cit_cmd->add_option("--classes", spec.n_classes)->capture_default_str();
  cit_cmd->add_option("--features", spec.n_features)->capture_default_str();
  cit_cmd->add_option("--homophily", spec.homophily)->capture_default_str();
  cit_cmd->add_option("--density", spec.edge_density, "undirected edges per node")->capture_default_str();
  cit_cmd->add_option("--noise", spec.feature_noise)->capture_default_str();
  cit_cmd->add_option("--seed", spec.seed)->capture_default_str();
  cit_cmd->add_option("--out-dir", dir)->required();

  std::string kind;
  std::size_t rows = 500;
  auto* imp_cmd = app.add_subcommand("synth-implication", "write a two-label dataset for the clause nA(x),B(x)");
  imp_cmd->add_option("--kind", kind, "holds or violated")->required();
  imp_cmd->add_option("--rows", rows)->capture_default_str();
  imp_cmd->add_option("--seed", seed)->capture_default_str();
  imp_cmd->add_option("--out-dir", dir)->required();

  std::vector<const char*> argv;
  argv.push_back("kenn");
  for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationFailure;
  }

  try {
    if (*mine_cmd) return cmd_mine(mine, out, err);
    if (*train_cmd) return cmd_train(tr, out, err);
    if (*eval_cmd) return cmd_eval(ev, out, err);
    if (*xor_cmd) return cmd_demo_xor(xor_epochs, seed, out, err);
    if (*coll_cmd) return cmd_demo_collisions(samples, seed, out, err);
    if (*min_cmd) return cmd_check_minimality(instances, trials, seed, out, err);
    if (*grad_cmd) return cmd_gradcheck(seeds, seed, out, err);
    if (*cit_cmd) return cmd_synth_citations(spec, dir, out);
    if (*imp_cmd) return cmd_synth_implication(kind, rows, seed, dir, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kValidationFailure;
}

}  // namespace kenn::cli
