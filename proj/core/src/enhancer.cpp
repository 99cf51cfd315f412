#include "kenn/enhancer.hpp"

#include <algorithm>

#include "kenn/error.hpp"

namespace kenn {

ClauseEnhancer::ClauseEnhancer(Clause clause, VectorClause vector_clause, std::optional<std::size_t> weight_param)
    : clause_(std::move(clause)), vector_clause_(std::move(vector_clause)), weight_param_(weight_param) {}

Var ClauseEnhancer::weight(Tape& tape, std::span<const Var> bound) const {
  if (!weight_param_) return tape.constant(Matrix(1, 1, clause_.weight.value));
  if (*weight_param_ >= bound.size()) throw ShapeError("clause weight parameter is not bound on this tape");
  return relu(bound[*weight_param_]);
}

double ClauseEnhancer::weight_value(const ParameterSet& params) const {
  if (!weight_param_) return clause_.weight.value;
  return std::max(params.value(*weight_param_)(0, 0), 0.0);
}

Var ClauseEnhancer::delta(std::span<const Var> bound, Var z) const {
  const auto& p = vector_clause_.columns;
  const auto& s = vector_clause_.signs;
  Var literals = gather_cols_signed(z, p, s);
  Var boosted = scale(softmax_rows(literals), weight(*z.tape, bound));
  return scatter_cols_signed(boosted, p, s, z.cols());
}

KnowledgeEnhancer::KnowledgeEnhancer(std::span<const Clause> clauses, Layout layout, ParameterSet& params,
                                     const std::string& prefix)
    : layout_(std::move(layout)) {
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const Clause& c = clauses[i];
    VectorClause vc = to_vector_clause(c, layout_);
    std::optional<std::size_t> param;
    if (c.weight.is_learnable()) param = params.add(prefix + std::to_string(i), Matrix(1, 1, c.weight.value));
    enhancers_.emplace_back(c, std::move(vc), param);
  }
}

std::vector<std::size_t> KnowledgeEnhancer::weight_parameters() const {
  std::vector<std::size_t> ids;
  for (const auto& ce : enhancers_)
    if (ce.weight_parameter()) ids.push_back(*ce.weight_parameter());
  return ids;
}

void KnowledgeEnhancer::check_width(Var z) const {
  if (z.cols() != width()) {
    throw ShapeError("knowledge enhancer expects " + std::to_string(width()) + " columns, got " +
                     std::to_string(z.cols()));
  }
}

Var KnowledgeEnhancer::delta(std::span<const Var> bound, Var z) const {
  check_width(z);
  if (enhancers_.empty()) return z.tape->constant(Matrix(z.rows(), z.cols()));
  std::vector<Var> deltas;
  deltas.reserve(enhancers_.size());
  for (const auto& ce : enhancers_) deltas.push_back(ce.delta(bound, z));
  return sum_nodes(deltas);
}

Var KnowledgeEnhancer::enhance(std::span<const Var> bound, Var z) const {
  check_width(z);
  if (enhancers_.empty()) return z;
  return add(z, delta(bound, z));
}

std::pair<Var, Var> KnowledgeEnhancer::forward(std::span<const Var> bound, Var z) const {
  Var z_prime = enhance(bound, z);
  return {z_prime, sigmoid(z_prime)};
}

std::pair<Var, Var> KnowledgeEnhancer::forward_softmax_head(std::span<const Var> bound, Var z) const {
  Var z_prime = enhance(bound, z);
  return {z_prime, softmax_rows(z_prime)};
}

}  // namespace kenn
