#pragma once

// Desk-scale synthetic datasets.

#include <cstddef>
#include <cstdint>

#include "kenn/train.hpp"

namespace kenn {

/// Homophilous citation graph. Every node gets a class, features drawn around
/// a per-class Gaussian centre, and round(edge_density * n_nodes) undirected
/// citations, each stored as two directed edges. A fraction `homophily` of
/// citations join same-class nodes; the rest join nodes of different classes.
/// The single binary predicate (Cite) is known true on every edge.
struct SyntheticGraphSpec {
  std::size_t n_nodes = 200;
  std::size_t n_classes = 4;
  std::size_t n_features = 16;
  double homophily = 0.9;
  double edge_density = 2.0;
  double feature_noise = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// All nodes start in the training mask.
GraphDataset make_synthetic_citations(const SyntheticGraphSpec& spec);

/// Two-label datasets for the clause A -> B (clause !A | B).
enum class ImplicationKind {
  /// B = A or C with A and C separate half-planes of the features; the
  /// clause always holds and logistic regression cannot fit B alone.
  Holds,
  /// 95% of examples have A set and B unset; the clause is mostly violated.
  Violated,
};

MultiLabelData make_implication_data(ImplicationKind kind, std::size_t n, std::uint64_t seed);

}  // namespace kenn
