#pragma once

// Apriori mining of association rules over multi-label targets. Every example
// becomes a transaction holding exactly one signed item per label: +l when the
// label is set, -l otherwise. Mined implications a1 & ... & an -> c turn into
// clauses !a1 | ... | !an | c.

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "kenn/logic.hpp"
#include "kenn/matrix.hpp"

namespace kenn {

struct SignedLabel {
  std::size_t label = 0;
  bool positive = true;

  SignedLabel negated() const { return {label, !positive}; }
  friend auto operator<=>(const SignedLabel&, const SignedLabel&) = default;
};

/// Sorted, duplicate-free.
using Itemset = std::vector<SignedLabel>;
using Transaction = Itemset;
/// Frequent itemsets and their supports in [0,1].
using FrequentSets = std::map<Itemset, double>;

struct MinedRule {
  Itemset antecedent;
  SignedLabel consequent;
  double support = 0.0;
  double confidence = 0.0;
};

struct MiningPreset {
  double support;
  double confidence;
};

inline constexpr MiningPreset kYeastPreset{0.2, 0.99};
inline constexpr MiningPreset kEmotionsPreset{0.2, 0.7};
inline constexpr std::size_t kDefaultMaxItemsetSize = 4;
inline constexpr std::size_t kBruteForceMaxLabels = 12;

/// Y must hold only 0/1 entries.
std::vector<Transaction> transactions_from_labels(const Matrix& labels);
Matrix labels_from_transactions(const std::vector<Transaction>& transactions, std::size_t n_labels);

/// Level-wise candidate generation with downward-closure pruning. `max_size`
/// bounds itemset length; 0 means unbounded. Requires 0 < min_support <= 1.
FrequentSets apriori_frequent(const std::vector<Transaction>& transactions, double min_support,
                              std::size_t max_size = kDefaultMaxItemsetSize);

/// Exhaustive enumeration of all signed itemsets; rejects more than
/// kBruteForceMaxLabels labels.
FrequentSets brute_force_frequent(const std::vector<Transaction>& transactions, double min_support,
                                  std::size_t max_size = kDefaultMaxItemsetSize);

/// One rule I\{x} -> x per frequent itemset I and item x with
/// supp(I) / supp(I\{x}) >= min_confidence. Rules with empty antecedent are
/// not produced.
std::vector<MinedRule> rules_from_frequent(const FrequentSets& frequent, double min_confidence);

/// Clausal form of the rules with learnable weights, duplicates removed
/// (literal order ignored). Label names map label indices to predicates.
std::vector<Clause> rules_to_clauses(const std::vector<MinedRule>& rules, const std::vector<std::string>& label_names);

}  // namespace kenn
