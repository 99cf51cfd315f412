#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "kenn/error.hpp"
#include "kenn/miner.hpp"
#include "support.hpp"

namespace kenn {
namespace {

constexpr SignedLabel pos(std::size_t l) { return {l, true}; }
constexpr SignedLabel neg(std::size_t l) { return {l, false}; }

// Rows: AB, AB, A, B.
const Matrix kTiny{{1, 1}, {1, 1}, {1, 0}, {0, 1}};

// Support counted straight from the label matrix.
double direct_support(const Matrix& y, const Itemset& items) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    bool all = true;
    for (const auto& it : items) all = all && (y(r, it.label) == 1.0) == it.positive;
    hits += all ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(y.rows());
}

// Every consistent signed itemset up to max_size, by counting in base 3.
FrequentSets oracle_frequent(const Matrix& y, double min_support, std::size_t max_size) {
  FrequentSets out;
  const std::size_t l = y.cols();
  std::size_t total = 1;
  for (std::size_t i = 0; i < l; ++i) total *= 3;
  for (std::size_t code = 1; code < total; ++code) {
    Itemset items;
    std::size_t c = code;
    for (std::size_t i = 0; i < l; ++i, c /= 3) {
      if (c % 3 == 1) items.push_back(pos(i));
      if (c % 3 == 2) items.push_back(neg(i));
    }
    if (items.size() > max_size) continue;
    std::sort(items.begin(), items.end());
    const double s = direct_support(y, items);
    if (s >= min_support) out[items] = s;
  }
  return out;
}

Matrix random_labels(testing::Gen& g) {
  const std::size_t rows = g.between(1, 40);
  const std::size_t cols = g.between(1, 6);
  return g.bits(rows, cols, g.uniform(0.1, 0.9));
}

TEST(Transactions, OneSignedItemPerLabel) {
  const auto t = transactions_from_labels(kTiny);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], (Transaction{pos(0), pos(1)}));
  EXPECT_EQ(t[2], (Transaction{pos(0), neg(1)}));
  EXPECT_EQ(t[3], (Transaction{neg(0), pos(1)}));
  EXPECT_EQ(labels_from_transactions(t, 2), kTiny);
}

TEST(Transactions, RoundTripProperty) {
  testing::Gen g(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix y = random_labels(g);
    EXPECT_EQ(labels_from_transactions(transactions_from_labels(y), y.cols()), y);
  }
}

TEST(Transactions, Errors) {
  EXPECT_THROW(transactions_from_labels(Matrix{{0.5}}), ValidationError);
  EXPECT_THROW(labels_from_transactions({{pos(3)}}, 2), ValidationError);
}

TEST(Apriori, TinyExample) {
  const auto f = apriori_frequent(transactions_from_labels(kTiny), 0.5);
  EXPECT_DOUBLE_EQ(f.at({pos(0)}), 0.75);
  EXPECT_DOUBLE_EQ(f.at({pos(1)}), 0.75);
  EXPECT_DOUBLE_EQ(f.at({pos(0), pos(1)}), 0.5);
  EXPECT_EQ(f.size(), 3u);
}

TEST(Rules, TinyExample) {
  const auto f = apriori_frequent(transactions_from_labels(kTiny), 0.5);
  const auto rules = rules_from_frequent(f, 0.6);
  ASSERT_EQ(rules.size(), 2u);
  for (const auto& r : rules) {
    EXPECT_EQ(r.antecedent.size(), 1u);
    EXPECT_DOUBLE_EQ(r.support, 0.5);
    EXPECT_NEAR(r.confidence, 2.0 / 3.0, 1e-15);
  }
  EXPECT_TRUE(rules_from_frequent(f, 1.0).empty());
}

TEST(Rules, NoEmptyAntecedent) {
  const Matrix all_set{{1, 1}, {1, 1}};
  const auto f = apriori_frequent(transactions_from_labels(all_set), 0.5);
  const auto rules = rules_from_frequent(f, 1.0);
  EXPECT_EQ(rules.size(), 2u);
  for (const auto& r : rules) EXPECT_FALSE(r.antecedent.empty());
}

TEST(Rules, ToClauses) {
  const std::vector<MinedRule> rules{{{pos(0)}, pos(1), 0.5, 0.7},
                                     {{neg(1)}, neg(0), 0.5, 0.7},  // contrapositive: same clause
                                     {{pos(0), neg(2)}, pos(1), 0.3, 0.9}};
  const auto clauses = rules_to_clauses(rules, {"A", "B", "C"});
  ASSERT_EQ(clauses.size(), 2u);
  EXPECT_EQ(serialize_clause(clauses[0]), "_:nA(x),B(x)");
  EXPECT_EQ(serialize_clause(clauses[1]), "_:nA(x),C(x),B(x)");
  for (const auto& c : clauses) EXPECT_TRUE(c.weight.is_learnable());
  EXPECT_THROW(rules_to_clauses(rules, {"A"}), ValidationError);
}

TEST(Apriori, MatchesExhaustiveCount) {
  testing::Gen g(2);
  for (int trial = 0; trial < 150; ++trial) {
    const Matrix y = random_labels(g);
    const double support = g.uniform(0.05, 0.8);
    const std::size_t max_size = g.between(0, 4);
    const auto t = transactions_from_labels(y);
    const auto got = apriori_frequent(t, support, max_size);
    const auto expect = oracle_frequent(y, support, max_size == 0 ? y.cols() : max_size);
    ASSERT_EQ(got.size(), expect.size()) << "trial " << trial;
    for (const auto& [items, s] : expect) {
      ASSERT_TRUE(got.contains(items));
      EXPECT_NEAR(got.at(items), s, 1e-12);
    }
    EXPECT_EQ(brute_force_frequent(t, support, max_size), got);
  }
}

TEST(Apriori, DownwardClosure) {
  testing::Gen g(3);
  for (int trial = 0; trial < 150; ++trial) {
    const Matrix y = random_labels(g);
    const auto f = apriori_frequent(transactions_from_labels(y), g.uniform(0.05, 0.6), 0);
    for (const auto& [items, s] : f) {
      for (std::size_t drop = 0; items.size() > 1 && drop < items.size(); ++drop) {
        Itemset sub = items;
        sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
        ASSERT_TRUE(f.contains(sub));
        EXPECT_GE(f.at(sub), s);
      }
    }
  }
}

TEST(Rules, RecountedSupportAndConfidence) {
  testing::Gen g(4);
  for (int trial = 0; trial < 150; ++trial) {
    const Matrix y = random_labels(g);
    const double min_conf = g.uniform(0.3, 1.0);
    const auto f = apriori_frequent(transactions_from_labels(y), g.uniform(0.05, 0.6));
    for (const auto& r : rules_from_frequent(f, min_conf)) {
      Itemset all = r.antecedent;
      all.push_back(r.consequent);
      std::sort(all.begin(), all.end());
      const double joint = direct_support(y, all);
      EXPECT_NEAR(r.support, joint, 1e-12);
      EXPECT_NEAR(r.confidence, joint / direct_support(y, r.antecedent), 1e-12);
      EXPECT_GE(r.confidence, min_conf - 1e-12);
      EXPECT_FALSE(r.antecedent.empty());
    }
  }
}

TEST(Rules, ClausesParseBack) {
  testing::Gen g(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix y = random_labels(g);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < y.cols(); ++i) names.push_back("L" + std::to_string(i));
    const auto rules = rules_from_frequent(apriori_frequent(transactions_from_labels(y), 0.1), 0.5);
    const auto clauses = rules_to_clauses(rules, names);
    std::set<std::multiset<std::pair<std::string, int>>> keys;
    for (const auto& c : clauses) {
      std::multiset<std::pair<std::string, int>> key;
      for (const auto& l : c.literals) key.emplace(l.predicate, l.sign);
      EXPECT_TRUE(keys.insert(key).second) << "duplicate clause";
    }
    const PredicateSchema schema(names, {});
    const auto k = make_knowledge(schema, clauses);
    EXPECT_EQ(parse_knowledge(serialize_knowledge(k), schema), k);
  }
}

TEST(Apriori, Errors) {
  const auto t = transactions_from_labels(kTiny);
  EXPECT_THROW(apriori_frequent(t, 0.0), ValidationError);
  EXPECT_THROW(apriori_frequent(t, 1.5), ValidationError);
  EXPECT_THROW(rules_from_frequent({}, 1.5), ValidationError);
  EXPECT_THROW(brute_force_frequent(transactions_from_labels(Matrix(2, 13)), 0.5), ValidationError);
  EXPECT_TRUE(apriori_frequent({}, 0.5).empty());
}

}  // namespace
}  // namespace kenn
