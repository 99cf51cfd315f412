#pragma once

// Clause Enhancer and Knowledge Enhancer layers.
//
// Both operate on a preactivation matrix whose rows are groundings and whose
// columns follow a Layout. For a clause with index/sign form (p, s) and weight
// w the clause delta is
//
//   scatter(w * softmax(gather(Z, p, s)), p, s)
//
// and the knowledge enhancer adds the deltas of all its clauses to Z.
// Negation is a sign flip on preactivations since 1 - sigmoid(z) = sigmoid(-z).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kenn/autodiff.hpp"
#include "kenn/logic.hpp"

namespace kenn {

class ClauseEnhancer {
 public:
  /// Learnable weights read parameter `weight_param` of the bound set and use
  /// max(value, 0). Fixed weights never touch the parameter set.
  ClauseEnhancer(Clause clause, VectorClause vector_clause, std::optional<std::size_t> weight_param);

  const Clause& clause() const { return clause_; }
  const VectorClause& vector_clause() const { return vector_clause_; }
  std::optional<std::size_t> weight_parameter() const { return weight_param_; }

  Var weight(Tape& tape, std::span<const Var> bound) const;
  double weight_value(const ParameterSet& params) const;

  /// Delta on Z (same shape). Columns outside the clause are exactly zero.
  Var delta(std::span<const Var> bound, Var z) const;

 private:
  Clause clause_;
  VectorClause vector_clause_;
  std::optional<std::size_t> weight_param_;
};

class KnowledgeEnhancer {
 public:
  KnowledgeEnhancer() = default;
  /// Registers one parameter per learnable clause, named `prefix` + clause
  /// position, initialised to the clause's initial weight.
  KnowledgeEnhancer(std::span<const Clause> clauses, Layout layout, ParameterSet& params, const std::string& prefix);

  const Layout& layout() const { return layout_; }
  std::size_t width() const { return layout_.size(); }
  bool empty() const { return enhancers_.empty(); }
  const std::vector<ClauseEnhancer>& clause_enhancers() const { return enhancers_; }
  std::vector<std::size_t> weight_parameters() const;

  /// Sum of all clause deltas; a zero constant when there are no clauses.
  Var delta(std::span<const Var> bound, Var z) const;
  /// Z' = Z + delta(Z).
  Var enhance(std::span<const Var> bound, Var z) const;
  /// (Z', sigmoid(Z')).
  std::pair<Var, Var> forward(std::span<const Var> bound, Var z) const;
  /// (Z', row-softmax(Z')) for mutually exclusive classes.
  std::pair<Var, Var> forward_softmax_head(std::span<const Var> bound, Var z) const;

 private:
  void check_width(Var z) const;

  Layout layout_;
  std::vector<ClauseEnhancer> enhancers_;
};

}  // namespace kenn
