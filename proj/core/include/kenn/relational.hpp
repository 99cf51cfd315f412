#pragma once

// Relational domains as two tables.
//
//   U: one row per object, one column per unary predicate.
//   B: one row per (directed) pair, one column per binary predicate, with
//      foreign keys sx, sy into the rows of U.
//
// Binary clauses are evaluated on the joined matrix M whose row r is
// [U[sx[r]] | U[sy[r]] | B[r]]; their deltas are routed back to U by summing
// the x and y blocks per object (GROUP BY sx / sy). Unary clauses act on U
// directly. Final preactivations are U' = U + dU_u + dU_x + dU_y and
// B' = B + dB.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kenn/autodiff.hpp"
#include "kenn/enhancer.hpp"
#include "kenn/logic.hpp"

namespace kenn {

/// Foreign keys of the binary table: row positions into U.
struct EdgeList {
  std::vector<std::size_t> sx;
  std::vector<std::size_t> sy;

  std::size_t size() const { return sx.size(); }
};

struct UnaryTable {
  std::vector<std::int64_t> index;  // object id of each row
  Matrix z;                          // n_objects x n_unary
};

struct BinaryTable {
  EdgeList edges;
  Matrix z;  // n_edges x n_binary
};

/// Preactivation used for binary atoms that are given as true.
inline constexpr double kKnownTruePreactivation = 25.0;

/// Joined matrix [U[sx] | U[sy] | B]. Throws ShapeError on bad keys.
Var join(Var unary, const EdgeList& edges, Var binary);

struct SplitDeltas {
  Var unary_x;  // n_objects x n_unary, summed over outgoing edges
  Var unary_y;  // n_objects x n_unary, summed over incoming edges
  Var binary;   // n_edges x n_binary
};

SplitDeltas split_deltas(Var joined_delta, const EdgeList& edges, std::size_t n_objects, std::size_t n_unary,
                         std::size_t n_binary);

class RelationalEnhancer {
 public:
  RelationalEnhancer() = default;
  /// `clamped` marks binary predicates (schema order) that are given rather
  /// than predicted; their deltas are discarded. Empty means none clamped.
  RelationalEnhancer(const Knowledge& knowledge, ParameterSet& params, const std::string& prefix,
                     std::vector<bool> clamped = {});

  const Knowledge& knowledge() const { return knowledge_; }
  const KnowledgeEnhancer& unary_enhancer() const { return unary_; }
  const KnowledgeEnhancer& binary_enhancer() const { return binary_; }
  std::vector<std::size_t> weight_parameters() const;

  struct Output {
    Var unary;   // U'
    Var binary;  // B'
  };
  Output forward(std::span<const Var> bound, Var unary, const EdgeList& edges, Var binary) const;

 private:
  Knowledge knowledge_;
  std::vector<bool> clamped_;
  KnowledgeEnhancer unary_;
  KnowledgeEnhancer binary_;
};

/// Value-level forward with the knowledge's own clause weights (learnable
/// weights at their initial value).
std::pair<Matrix, Matrix> relational_ke_forward(const UnaryTable& u, const BinaryTable& b, const Knowledge& k,
                                                const std::vector<bool>& clamped = {});

/// Reference implementation: one clause enhancer per grounded clause over a
/// flat vector of grounded atoms, deltas summed per atom. Intended for small
/// instances only.
inline constexpr std::size_t kOracleMaxGroundings = 1000;
std::pair<Matrix, Matrix> naive_grounding_oracle(const UnaryTable& u, const BinaryTable& b, const Knowledge& k,
                                                 const std::vector<bool>& clamped = {});

}  // namespace kenn
