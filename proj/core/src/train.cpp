#include "kenn/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "kenn/error.hpp"

namespace kenn {

namespace {

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(m.row(rows[r]).begin(), m.row(rows[r]).end(), out.row(r).begin());
  return out;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  auto rows = iota_rows(n);
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> halve(std::vector<std::size_t> rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  const std::size_t half = rows.size() / 2;
  std::vector<std::size_t> first(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<std::size_t> second(rows.begin() + static_cast<std::ptrdiff_t>(half), rows.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {first, second};
}

// Mixes a phase tag into the seed so the greedy split and batch order differ.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

void check_targets(const Matrix& p, const Matrix& t, const char* what) {
  if (!p.same_shape(t)) throw ShapeError(std::string(what) + ": predictions " + p.shape_string() + " vs targets " + t.shape_string());
}

}  // namespace

Var bce_loss(Var predictions, const Matrix& targets) {
  const Matrix& p = predictions.value();
  check_targets(p, targets, "bce_loss");
  const double n = static_cast<double>(std::max<std::size_t>(p.size(), 1));
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p.data()[i], kLossClamp, 1.0 - kLossClamp);
    const double t = targets.data()[i];
    total -= t * std::log(q) + (1.0 - t) * std::log(1.0 - q);
  }
  const std::size_t ip = predictions.id;
  return predictions.tape->record("bce_loss", Matrix(1, 1, total / n), {predictions},
                                  [ip, targets, n](Tape& tape, std::size_t self) {
                                    const double g = tape.grad(self)(0, 0);
                                    const Matrix& p = tape.value(ip);
                                    Matrix& gp = tape.grad_buffer(ip);
                                    for (std::size_t i = 0; i < p.size(); ++i) {
                                      const double q = p.data()[i];
                                      if (q < kLossClamp || q > 1.0 - kLossClamp) continue;
                                      const double t = targets.data()[i];
                                      gp.data()[i] += g * (-(t / q) + (1.0 - t) / (1.0 - q)) / n;
                                    }
                                  });
}

Var ce_loss(Var probabilities, const Matrix& one_hot) {
  const Matrix& p = probabilities.value();
  check_targets(p, one_hot, "ce_loss");
  const double n = static_cast<double>(std::max<std::size_t>(p.rows(), 1));
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double t = one_hot.data()[i];
    if (t != 0.0) total -= t * std::log(std::clamp(p.data()[i], kLossClamp, 1.0 - kLossClamp));
  }
  const std::size_t ip = probabilities.id;
  return probabilities.tape->record("ce_loss", Matrix(1, 1, total / n), {probabilities},
                                    [ip, one_hot, n](Tape& tape, std::size_t self) {
                                      const double g = tape.grad(self)(0, 0);
                                      const Matrix& p = tape.value(ip);
                                      Matrix& gp = tape.grad_buffer(ip);
                                      for (std::size_t i = 0; i < p.size(); ++i) {
                                        const double t = one_hot.data()[i];
                                        const double q = p.data()[i];
                                        if (t == 0.0 || q < kLossClamp || q > 1.0 - kLossClamp) continue;
                                        gp.data()[i] -= g * t / (q * n);
                                      }
                                    });
}

const char* strategy_name(Strategy s) { return s == Strategy::EndToEnd ? "e2e" : "greedy"; }

Strategy parse_strategy(const std::string& name) {
  if (name == "e2e" || name == "end_to_end") return Strategy::EndToEnd;
  if (name == "greedy") return Strategy::Greedy;
  throw ValidationError("unknown strategy '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("rho must lie in (0, 1)");
  if (!(opt_epsilon > 0.0)) throw ValidationError("optimizer epsilon must be positive");
}

void RmsProp::step(ParameterSet& params, std::span<const std::size_t> ids, const std::vector<Matrix>& grads) {
  if (state_.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) state_.push_back(Matrix::zeros_like(params.value(i)));
  }
  if (state_.size() != params.size() || grads.size() != params.size()) {
    throw ShapeError("optimizer state does not match the parameter set");
  }
  for (std::size_t id : ids) {
    Matrix& theta = params.value(id);
    Matrix& s = state_[id];
    const Matrix& g = grads[id];
    if (!theta.same_shape(g) || !theta.same_shape(s)) throw ShapeError("parameter '" + params.name(id) + "' shape changed");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g.data()[i];
      double& si = s.data()[i];
      si = rho_ * si + (1.0 - rho_) * gi * gi;
      theta.data()[i] -= lr_ * gi / (std::sqrt(si) + eps_);
    }
  }
}

std::vector<double> optimize(ParameterSet& params, std::span<const std::size_t> trainable, const BatchLoss& loss,
                             std::vector<std::size_t> rows, const TrainConfig& cfg) {
  cfg.validate();
  RmsProp optimizer(cfg);
  std::mt19937_64 rng(cfg.seed);
  const std::size_t batch = cfg.batch_size == 0 ? rows.size() : std::min(cfg.batch_size, rows.size());
  std::vector<double> curve;
  curve.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < rows.size()) std::shuffle(rows.begin(), rows.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < rows.size(); start += batch) {
      const std::size_t end = std::min(rows.size(), start + batch);
      std::span<const std::size_t> slice(rows.data() + start, end - start);
      Tape tape;
      const auto bound = tape.bind(params);
      Var l = loss(tape, bound, slice);
      tape.backward(l);
      optimizer.step(params, trainable, tape.gradients(bound));
      total += l.value()(0, 0) * static_cast<double>(slice.size());
    }
    curve.push_back(rows.empty() ? 0.0 : total / static_cast<double>(rows.size()));
  }
  return curve;
}

namespace {

// `base_only` scores the head applied to the base network alone, which is
// what the first greedy phase fits.
BatchLoss flat_loss(const KennModel& model, const MultiLabelData& data, bool base_only = false) {
  return [&model, &data, base_only](Tape& tape, std::span<const Var> bound, std::span<const std::size_t> rows) {
    Var x = tape.constant(select_rows(data.features, rows));
    Var pred = base_only ? apply_head(model.config().head, model.base_preactivations(bound, x)) : model.forward(bound, x);
    const Matrix targets = select_rows(data.labels, rows);
    return model.config().head == Head::Softmax ? ce_loss(pred, targets) : bce_loss(pred, targets);
  };
}

void check_flat(const KennModel& model, const MultiLabelData& data) {
  if (data.features.rows() != data.labels.rows()) throw ShapeError("features and labels differ in row count");
  if (data.labels.cols() != model.config().predicted.size()) throw ShapeError("label width does not match the model");
}

BatchLoss graph_loss(const RelationalKennModel& model, const GraphDataset& data, const Matrix& one_hot,
                     bool base_only = false) {
  return [&model, &data, &one_hot, base_only](Tape& tape, std::span<const Var> bound,
                                              std::span<const std::size_t> rows) {
    Var x = tape.constant(data.features);
    Var pred = base_only ? apply_head(model.config().head, model.base_preactivations(bound, x))
                         : model.forward(bound, x, data.edges, tape.constant(data.binary));
    Var picked = gather_rows(pred, rows);
    const Matrix targets = select_rows(one_hot, rows);
    return model.config().head == Head::Softmax ? ce_loss(picked, targets) : bce_loss(picked, targets);
  };
}

}  // namespace

TrainResult train_end_to_end(KennModel& model, const MultiLabelData& data, const TrainConfig& cfg) {
  check_flat(model, data);
  std::vector<std::size_t> ids = model.base_parameters();
  const auto clauses = model.clause_parameters();
  ids.insert(ids.end(), clauses.begin(), clauses.end());
  TrainResult result;
  result.loss_curve = optimize(model.parameters(), ids, flat_loss(model, data), iota_rows(data.features.rows()), cfg);
  return result;
}

TrainResult train_greedy(KennModel& model, const MultiLabelData& data, const TrainConfig& cfg) {
  check_flat(model, data);
  auto [base_rows, clause_rows] = halve(iota_rows(data.features.rows()), derive_seed(cfg.seed, 1));
  TrainResult result;
  result.loss_curve = optimize(model.parameters(), model.base_parameters(), flat_loss(model, data, true), base_rows, cfg);
  result.clause_loss_curve =
      optimize(model.parameters(), model.clause_parameters(), flat_loss(model, data), clause_rows, cfg);
  return result;
}

TrainResult train(KennModel& model, const MultiLabelData& data, const TrainConfig& cfg) {
  return cfg.strategy == Strategy::EndToEnd ? train_end_to_end(model, data, cfg) : train_greedy(model, data, cfg);
}

TrainResult train_end_to_end(RelationalKennModel& model, const GraphDataset& data, const TrainConfig& cfg) {
  data.validate();
  std::vector<std::size_t> ids = model.base_parameters();
  const auto clauses = model.clause_parameters();
  ids.insert(ids.end(), clauses.begin(), clauses.end());
  const Matrix one_hot = data.one_hot();
  TrainResult result;
  result.loss_curve = optimize(model.parameters(), ids, graph_loss(model, data, one_hot), data.train_nodes(), cfg);
  return result;
}

TrainResult train_greedy(RelationalKennModel& model, const GraphDataset& data, const TrainConfig& cfg) {
  data.validate();
  auto [base_rows, clause_rows] = halve(data.train_nodes(), derive_seed(cfg.seed, 1));
  const Matrix one_hot = data.one_hot();
  TrainResult result;
  result.loss_curve =
      optimize(model.parameters(), model.base_parameters(), graph_loss(model, data, one_hot, true), base_rows, cfg);
  result.clause_loss_curve =
      optimize(model.parameters(), model.clause_parameters(), graph_loss(model, data, one_hot), clause_rows, cfg);
  return result;
}

TrainResult train(RelationalKennModel& model, const GraphDataset& data, const TrainConfig& cfg) {
  return cfg.strategy == Strategy::EndToEnd ? train_end_to_end(model, data, cfg) : train_greedy(model, data, cfg);
}

Matrix GraphDataset::one_hot() const {
  Matrix out(labels.size(), n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes) throw ValidationError("node label outside the class range");
    out(i, labels[i]) = 1.0;
  }
  return out;
}

std::vector<std::size_t> GraphDataset::train_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < train_mask.size(); ++i)
    if (train_mask[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> GraphDataset::test_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < test_mask.size(); ++i)
    if (test_mask[i]) out.push_back(i);
  return out;
}

void GraphDataset::validate() const {
  const std::size_t n = size();
  if (features.rows() != n) throw ValidationError("feature rows do not match the node count");
  if (train_mask.size() != n || test_mask.size() != n) throw ValidationError("split masks do not match the node count");
  for (std::size_t i = 0; i < n; ++i) {
    if (train_mask[i] && test_mask[i]) throw ValidationError("node " + std::to_string(i) + " is in both splits");
    if (!train_mask[i] && !test_mask[i]) throw ValidationError("node " + std::to_string(i) + " is in neither split");
    if (labels[i] >= n_classes) throw ValidationError("node label outside the class range");
  }
  if (edges.sx.size() != edges.sy.size() || binary.rows() != edges.size()) {
    throw ValidationError("edge columns do not line up");
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges.sx[e] >= n || edges.sy[e] >= n) throw ValidationError("edge references a missing node");
  }
}

namespace {

std::vector<bool> train_membership(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("train fraction must lie in (0, 1)");
  const auto order = permutation(n, seed);
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
  return in_train;
}

GraphDataset induced(const GraphDataset& data, const std::vector<bool>& keep, bool as_train) {
  std::vector<std::size_t> remap(data.size(), SIZE_MAX);
  GraphDataset out;
  out.n_classes = data.n_classes;
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = nodes.size();
    nodes.push_back(i);
    out.labels.push_back(data.labels[i]);
  }
  out.features = select_rows(data.features, nodes);
  std::vector<std::size_t> edge_rows;
  for (std::size_t e = 0; e < data.edges.size(); ++e) {
    const std::size_t a = remap[data.edges.sx[e]];
    const std::size_t b = remap[data.edges.sy[e]];
    if (a == SIZE_MAX || b == SIZE_MAX) continue;
    out.edges.sx.push_back(a);
    out.edges.sy.push_back(b);
    edge_rows.push_back(e);
  }
  out.binary = select_rows(data.binary, edge_rows);
  out.train_mask.assign(nodes.size(), as_train);
  out.test_mask.assign(nodes.size(), !as_train);
  return out;
}

}  // namespace

GraphDataset split_transductive(const GraphDataset& data, double train_fraction, std::uint64_t seed) {
  GraphDataset out = data;
  out.train_mask = train_membership(data.size(), train_fraction, seed);
  out.test_mask.assign(data.size(), false);
  for (std::size_t i = 0; i < data.size(); ++i) out.test_mask[i] = !out.train_mask[i];
  return out;
}

std::pair<GraphDataset, GraphDataset> split_inductive(const GraphDataset& data, double train_fraction,
                                                      std::uint64_t seed) {
  const auto in_train = train_membership(data.size(), train_fraction, seed);
  std::vector<bool> in_test(in_train.size());
  for (std::size_t i = 0; i < in_train.size(); ++i) in_test[i] = !in_train[i];
  return {induced(data, in_train, true), induced(data, in_test, false)};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(std::size_t n, double train_fraction,
                                                                         std::uint64_t seed) {
  const auto in_train = train_membership(n, train_fraction, seed);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? out.first : out.second).push_back(i);
  return out;
}

MultiLabelData select_rows(const MultiLabelData& data, std::span<const std::size_t> rows) {
  return {select_rows(data.features, rows), select_rows(data.labels, rows)};
}

namespace {

bool bit(double v) { return v >= kPredictionThreshold; }

}  // namespace

double hamming_loss(const Matrix& predictions, const Matrix& targets) {
  check_targets(predictions, targets, "hamming_loss");
  if (predictions.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    wrong += bit(predictions.data()[i]) != bit(targets.data()[i]) ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

double subset_accuracy(const Matrix& predictions, const Matrix& targets) {
  check_targets(predictions, targets, "subset_accuracy");
  if (predictions.rows() == 0) return 0.0;
  std::size_t right = 0;
  for (std::size_t r = 0; r < predictions.rows(); ++r) {
    bool all = true;
    for (std::size_t j = 0; j < predictions.cols(); ++j) all = all && bit(predictions(r, j)) == bit(targets(r, j));
    right += all ? 1 : 0;
  }
  return static_cast<double>(right) / static_cast<double>(predictions.rows());
}

double label_accuracy(const Matrix& predictions, const Matrix& targets) {
  return 1.0 - hamming_loss(predictions, targets);
}

double class_accuracy(const Matrix& probabilities, const std::vector<std::size_t>& targets,
                      const std::vector<std::size_t>& rows) {
  if (probabilities.rows() != targets.size()) throw ShapeError("class_accuracy: row count mismatch");
  const std::vector<std::size_t> picked = rows.empty() ? iota_rows(targets.size()) : rows;
  if (picked.empty()) return 0.0;
  std::size_t right = 0;
  for (std::size_t r : picked) {
    auto row = probabilities.row(r);
    const auto arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    right += arg == targets.at(r) ? 1 : 0;
  }
  return static_cast<double>(right) / static_cast<double>(picked.size());
}

}  // namespace kenn
