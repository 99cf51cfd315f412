#pragma once

// Base networks and full KENN models.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kenn/autodiff.hpp"
#include "kenn/enhancer.hpp"
#include "kenn/logic.hpp"
#include "kenn/relational.hpp"

namespace kenn {

enum class Head { Sigmoid, Softmax };

const char* head_name(Head head);
Head parse_head(const std::string& name);

/// Affine layers with ReLU between them and no activation after the last.
/// A single layer is logistic regression once a sigmoid head is applied.
struct MlpConfig {
  std::size_t input_width = 0;
  std::vector<std::size_t> layer_widths;
  std::uint64_t seed = 0;
};

class Mlp {
 public:
  Mlp() = default;
  /// Weights are Glorot-uniform from `cfg.seed`, biases zero.
  Mlp(const MlpConfig& cfg, ParameterSet& params, const std::string& prefix = "base.");

  const MlpConfig& config() const { return cfg_; }
  std::size_t output_width() const { return cfg_.layer_widths.back(); }
  const std::vector<std::size_t>& parameter_ids() const { return param_ids_; }

  /// Raw preactivations, no head.
  Var forward(std::span<const Var> bound, Var x) const;

 private:
  MlpConfig cfg_;
  std::vector<std::size_t> param_ids_;  // W0, b0, W1, b1, ...
};

inline constexpr double kDefaultInputEpsilon = 1e-3;

/// logit(clamp(x, eps, 1 - eps)). Entries must lie in [0,1].
Matrix inject_input_atoms(const Matrix& atoms, double epsilon = kDefaultInputEpsilon);

/// A feature column whose value is also a truth value the knowledge can use.
struct InputAtom {
  std::string predicate;
  std::size_t feature_column = 0;
};

struct KennConfig {
  MlpConfig base;
  Head head = Head::Sigmoid;
  std::vector<std::string> predicted;  // names of the base network's outputs
  std::vector<InputAtom> input_atoms;
  double epsilon = kDefaultInputEpsilon;
};

/// Base network followed by a knowledge enhancer over the layout
/// [input atoms | predicted]. Predictions cover predicted columns only.
class KennModel {
 public:
  KennModel(KennConfig cfg, Knowledge knowledge);

  const KennConfig& config() const { return cfg_; }
  const Knowledge& knowledge() const { return knowledge_; }
  const KnowledgeEnhancer& enhancer() const { return enhancer_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const std::vector<std::size_t>& base_parameters() const { return base_.parameter_ids(); }
  std::vector<std::size_t> clause_parameters() const { return enhancer_.weight_parameters(); }

  Var base_preactivations(std::span<const Var> bound, Var x) const;
  /// Enhanced preactivations of the predicted columns.
  Var preactivations(std::span<const Var> bound, Var x) const;
  /// Head applied to preactivations().
  Var forward(std::span<const Var> bound, Var x) const;

  Matrix predict(const Matrix& x) const;
  /// (clause text, effective weight) for every clause, in knowledge order.
  std::vector<std::pair<std::string, double>> clause_weights() const;

 private:
  KennConfig cfg_;
  Knowledge knowledge_;
  ParameterSet params_;
  Mlp base_;
  KnowledgeEnhancer enhancer_;
};

struct RelationalKennConfig {
  MlpConfig base;
  Head head = Head::Softmax;
  std::vector<bool> clamped;  // per binary predicate; empty = none
};

/// Node classifier: the base network maps node features to unary
/// preactivations, then the relational enhancer revises them using the edges.
class RelationalKennModel {
 public:
  RelationalKennModel(RelationalKennConfig cfg, Knowledge knowledge);

  const RelationalKennConfig& config() const { return cfg_; }
  const Knowledge& knowledge() const { return enhancer_.knowledge(); }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const std::vector<std::size_t>& base_parameters() const { return base_.parameter_ids(); }
  std::vector<std::size_t> clause_parameters() const { return enhancer_.weight_parameters(); }

  Var base_preactivations(std::span<const Var> bound, Var features) const;
  RelationalEnhancer::Output preactivations(std::span<const Var> bound, Var features, const EdgeList& edges,
                                            Var binary) const;
  /// Head applied to the enhanced unary preactivations.
  Var forward(std::span<const Var> bound, Var features, const EdgeList& edges, Var binary) const;

  Matrix predict(const Matrix& features, const EdgeList& edges, const Matrix& binary) const;
  std::vector<std::pair<std::string, double>> clause_weights() const;

 private:
  RelationalKennConfig cfg_;
  ParameterSet params_;
  Mlp base_;
  RelationalEnhancer enhancer_;
};

Var apply_head(Head head, Var z);

}  // namespace kenn
