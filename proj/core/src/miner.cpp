#include "kenn/miner.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

#include "kenn/error.hpp"

namespace kenn {

namespace {

void check_support(double min_support) {
  if (!(min_support > 0.0 && min_support <= 1.0)) throw ValidationError("min_support must lie in (0, 1]");
}

bool frequent_enough(std::size_t count, std::size_t total, double min_support) {
  return static_cast<double>(count) / static_cast<double>(total) >= min_support;
}

std::size_t label_count(const std::vector<Transaction>& transactions) {
  std::size_t n = 0;
  for (const auto& t : transactions)
    for (const auto& item : t) n = std::max(n, item.label + 1);
  return n;
}

// Transaction-id sets as packed bits.
class TidSet {
 public:
  explicit TidSet(std::size_t n = 0) : bits_((n + 63) / 64, 0) {}
  void set(std::size_t i) { bits_[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : bits_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }
  TidSet operator&(const TidSet& o) const {
    TidSet r;
    r.bits_.resize(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] & o.bits_[i];
    return r;
  }

 private:
  std::vector<std::uint64_t> bits_;
};

}  // namespace

std::vector<Transaction> transactions_from_labels(const Matrix& labels) {
  std::vector<Transaction> out;
  out.reserve(labels.rows());
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    Transaction t;
    for (std::size_t j = 0; j < labels.cols(); ++j) {
      const double v = labels(r, j);
      if (v != 0.0 && v != 1.0) throw ValidationError("label matrix must hold only 0 and 1");
      t.push_back({j, v == 1.0});
    }
    out.push_back(std::move(t));
  }
  return out;
}

Matrix labels_from_transactions(const std::vector<Transaction>& transactions, std::size_t n_labels) {
  Matrix y(transactions.size(), n_labels);
  for (std::size_t r = 0; r < transactions.size(); ++r) {
    for (const auto& item : transactions[r]) {
      if (item.label >= n_labels) throw ValidationError("transaction item outside the label range");
      y(r, item.label) = item.positive ? 1.0 : 0.0;
    }
  }
  return y;
}

FrequentSets apriori_frequent(const std::vector<Transaction>& transactions, double min_support, std::size_t max_size) {
  check_support(min_support);
  FrequentSets result;
  const std::size_t total = transactions.size();
  if (total == 0) return result;

  std::map<SignedLabel, TidSet> item_tids;
  for (std::size_t r = 0; r < total; ++r)
    for (const auto& item : transactions[r]) item_tids.try_emplace(item, total).first->second.set(r);

  std::map<Itemset, TidSet> level;
  for (const auto& [item, tids] : item_tids) {
    const std::size_t c = tids.count();
    if (frequent_enough(c, total, min_support)) {
      level.emplace(Itemset{item}, tids);
      result.emplace(Itemset{item}, static_cast<double>(c) / static_cast<double>(total));
    }
  }

  for (std::size_t size = 2; !level.empty() && (max_size == 0 || size <= max_size); ++size) {
    std::map<Itemset, TidSet> next;
    for (auto a = level.begin(); a != level.end(); ++a) {
      for (auto b = std::next(a); b != level.end(); ++b) {
        // Join sets sharing all but their last item; the map keeps them adjacent.
        if (!std::equal(a->first.begin(), a->first.end() - 1, b->first.begin())) break;
        Itemset candidate = a->first;
        candidate.push_back(b->first.back());
        bool closed = true;
        for (std::size_t drop = 0; drop + 2 < candidate.size() && closed; ++drop) {
          Itemset subset;
          for (std::size_t i = 0; i < candidate.size(); ++i)
            if (i != drop) subset.push_back(candidate[i]);
          closed = level.count(subset) > 0;
        }
        if (!closed) continue;
        TidSet tids = a->second & item_tids.at(candidate.back());
        const std::size_t c = tids.count();
        if (c == 0 || !frequent_enough(c, total, min_support)) continue;
        result.emplace(candidate, static_cast<double>(c) / static_cast<double>(total));
        next.emplace(std::move(candidate), std::move(tids));
      }
    }
    level = std::move(next);
  }
  return result;
}

FrequentSets brute_force_frequent(const std::vector<Transaction>& transactions, double min_support,
                                  std::size_t max_size) {
  check_support(min_support);
  FrequentSets result;
  if (transactions.empty()) return result;
  const std::size_t n_labels = label_count(transactions);
  if (n_labels > kBruteForceMaxLabels) {
    throw ValidationError("brute force enumeration limited to " + std::to_string(kBruteForceMaxLabels) + " labels");
  }
  std::vector<std::set<SignedLabel>> sets;
  for (const auto& t : transactions) sets.emplace_back(t.begin(), t.end());

  // Each label is absent, positive or negative: 3^L assignments.
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n_labels; ++i) combos *= 3;
  for (std::size_t code = 1; code < combos; ++code) {
    Itemset items;
    std::size_t rest = code;
    for (std::size_t label = 0; label < n_labels; ++label, rest /= 3) {
      const std::size_t digit = rest % 3;
      if (digit == 1) items.push_back({label, true});
      if (digit == 2) items.push_back({label, false});
    }
    if (max_size != 0 && items.size() > max_size) continue;
    std::sort(items.begin(), items.end());
    std::size_t count = 0;
    for (const auto& s : sets) {
      bool all = true;
      for (const auto& item : items) all = all && s.count(item) > 0;
      count += all ? 1 : 0;
    }
    if (count > 0 && frequent_enough(count, transactions.size(), min_support)) {
      result.emplace(std::move(items), static_cast<double>(count) / static_cast<double>(transactions.size()));
    }
  }
  return result;
}

std::vector<MinedRule> rules_from_frequent(const FrequentSets& frequent, double min_confidence) {
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) throw ValidationError("min_confidence must lie in [0, 1]");
  std::vector<MinedRule> rules;
  for (const auto& [itemset, support] : frequent) {
    if (itemset.size() < 2) continue;
    for (std::size_t i = 0; i < itemset.size(); ++i) {
      Itemset antecedent;
      for (std::size_t j = 0; j < itemset.size(); ++j)
        if (j != i) antecedent.push_back(itemset[j]);
      auto it = frequent.find(antecedent);
      if (it == frequent.end()) continue;
      const double confidence = support / it->second;
      if (confidence >= min_confidence) rules.push_back({std::move(antecedent), itemset[i], support, confidence});
    }
  }
  return rules;
}

std::vector<Clause> rules_to_clauses(const std::vector<MinedRule>& rules, const std::vector<std::string>& label_names) {
  std::vector<Clause> clauses;
  std::set<std::vector<std::pair<std::string, int>>> seen;
  auto literal = [&](const SignedLabel& item, bool negate) {
    if (item.label >= label_names.size()) throw ValidationError("rule refers to an unnamed label");
    const bool positive = negate ? !item.positive : item.positive;
    return Literal{label_names[item.label], positive ? 1 : -1, VarSlot::X};
  };
  for (const auto& rule : rules) {
    Clause c;
    c.weight = ClauseWeight::learnable();
    for (const auto& item : rule.antecedent) c.literals.push_back(literal(item, true));
    c.literals.push_back(literal(rule.consequent, false));
    std::vector<std::pair<std::string, int>> key;
    for (const auto& l : c.literals) key.emplace_back(l.predicate, l.sign);
    std::sort(key.begin(), key.end());
    if (seen.insert(std::move(key)).second) clauses.push_back(std::move(c));
  }
  return clauses;
}

}  // namespace kenn
