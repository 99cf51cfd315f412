#pragma once

// Losses, RMSProp, the two training strategies, splits and metrics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kenn/autodiff.hpp"
#include "kenn/model.hpp"
#include "kenn/relational.hpp"

namespace kenn {

inline constexpr double kLossClamp = 1e-12;

/// Binary cross-entropy averaged over every (example, label) cell.
Var bce_loss(Var predictions, const Matrix& targets);
/// Categorical cross-entropy averaged over rows.
Var ce_loss(Var probabilities, const Matrix& one_hot);

enum class Strategy { EndToEnd, Greedy };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

struct TrainConfig {
  Strategy strategy = Strategy::EndToEnd;
  double lr = 1e-3;
  double rho = 0.9;
  double opt_epsilon = 1e-7;
  std::size_t epochs = 100;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;

  void validate() const;
};

class RmsProp {
 public:
  explicit RmsProp(const TrainConfig& cfg) : lr_(cfg.lr), rho_(cfg.rho), eps_(cfg.opt_epsilon) {}

  /// s <- rho s + (1 - rho) g^2; theta <- theta - lr g / (sqrt(s) + eps) for
  /// the listed parameters only. State is created on first use.
  void step(ParameterSet& params, std::span<const std::size_t> ids, const std::vector<Matrix>& grads);

 private:
  double lr_;
  double rho_;
  double eps_;
  std::vector<Matrix> state_;
};

/// Builds the loss for one batch of example rows on a fresh tape.
using BatchLoss = std::function<Var(Tape&, std::span<const Var> bound, std::span<const std::size_t> rows)>;

/// Runs cfg.epochs of RMSProp over `rows` on the listed parameters. Batches
/// are reshuffled each epoch from cfg.seed. Returns the mean loss per epoch.
std::vector<double> optimize(ParameterSet& params, std::span<const std::size_t> trainable, const BatchLoss& loss,
                             std::vector<std::size_t> rows, const TrainConfig& cfg);

struct MultiLabelData {
  Matrix features;
  Matrix labels;  // 0/1
};

/// Node classification data. Binary preactivations are per edge, in schema
/// order of the binary predicates.
struct GraphDataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t n_classes = 0;
  EdgeList edges;
  Matrix binary;
  std::vector<bool> train_mask;
  std::vector<bool> test_mask;

  std::size_t size() const { return labels.size(); }
  Matrix one_hot() const;
  std::vector<std::size_t> train_nodes() const;
  std::vector<std::size_t> test_nodes() const;
  /// Throws ValidationError when masks overlap or miss a node, or edges are
  /// out of range.
  void validate() const;
};

struct TrainResult {
  std::vector<double> loss_curve;
  std::vector<double> clause_loss_curve;  // greedy phase 2 only
};

TrainResult train_end_to_end(KennModel& model, const MultiLabelData& data, const TrainConfig& cfg);
/// Phase 1 fits the base network on one half of the rows, phase 2 fits the
/// clause weights on the other half with the base frozen.
TrainResult train_greedy(KennModel& model, const MultiLabelData& data, const TrainConfig& cfg);
TrainResult train(KennModel& model, const MultiLabelData& data, const TrainConfig& cfg);

/// Forward passes the whole graph; the loss uses training nodes only.
TrainResult train_end_to_end(RelationalKennModel& model, const GraphDataset& data, const TrainConfig& cfg);
TrainResult train_greedy(RelationalKennModel& model, const GraphDataset& data, const TrainConfig& cfg);
TrainResult train(RelationalKennModel& model, const GraphDataset& data, const TrainConfig& cfg);

/// One graph; the first round(fraction * n) nodes of a seeded permutation
/// train, the rest test. All edges are kept.
GraphDataset split_transductive(const GraphDataset& data, double train_fraction, std::uint64_t seed);

/// Two disjoint graphs with nodes renumbered: the training graph holds the
/// training nodes and the edges among them, the test graph the test nodes and
/// the edges among them. Crossing edges are dropped.
std::pair<GraphDataset, GraphDataset> split_inductive(const GraphDataset& data, double train_fraction,
                                                      std::uint64_t seed);

/// Same seeded permutation as the graph splits, as sorted (train, test) row
/// lists for flat data.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(std::size_t n, double train_fraction,
                                                                         std::uint64_t seed);
MultiLabelData select_rows(const MultiLabelData& data, std::span<const std::size_t> rows);

inline constexpr double kTrainFractionPresets[] = {0.10, 0.25, 0.50, 0.75, 0.90};
inline constexpr double kPredictionThreshold = 0.5;

/// Predictions are thresholded at 0.5 (>= counts as set).
double hamming_loss(const Matrix& predictions, const Matrix& targets);
/// Fraction of rows where every label is right.
double subset_accuracy(const Matrix& predictions, const Matrix& targets);
/// Fraction of (row, label) cells that are right: 1 - hamming_loss.
double label_accuracy(const Matrix& predictions, const Matrix& targets);
/// Fraction of rows whose argmax equals the target class; `rows` selects a
/// subset when nonempty.
double class_accuracy(const Matrix& probabilities, const std::vector<std::size_t>& targets,
                      const std::vector<std::size_t>& rows = {});

}  // namespace kenn
