#pragma once

// Small random generators shared by the property tests.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kenn/logic.hpp"
#include "kenn/matrix.hpp"
#include "kenn/relational.hpp"

namespace kenn::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::size_t between(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return uniform() < p; }
  int sign() { return coin() ? 1 : -1; }

  Matrix matrix(std::size_t rows, std::size_t cols, double sd = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = normal(sd);
    return m;
  }

  Matrix bits(std::size_t rows, std::size_t cols, double p = 0.5) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = coin(p) ? 1.0 : 0.0;
    return m;
  }

  EdgeList edges(std::size_t n_nodes, std::size_t n_edges) {
    EdgeList e;
    for (std::size_t i = 0; i < n_edges; ++i) {
      e.sx.push_back(index(n_nodes));
      e.sy.push_back(index(n_nodes));
    }
    return e;
  }

  PredicateSchema schema(std::size_t n_unary, std::size_t n_binary) {
    std::vector<std::string> u, b;
    for (std::size_t i = 0; i < n_unary; ++i) u.push_back("P" + std::to_string(i));
    for (std::size_t i = 0; i < n_binary; ++i) b.push_back("R" + std::to_string(i));
    return PredicateSchema(u, b);
  }

  ClauseWeight weight() {
    switch (index(3)) {
      case 0:
        return ClauseWeight::learnable();
      case 1:
        return ClauseWeight::learnable(uniform(0.0, 3.0));
      default:
        return ClauseWeight::fixed(coin() ? static_cast<double>(between(0, 20)) : uniform(0.0, 10.0));
    }
  }

  // Unary clause over x, no repeated predicate.
  Clause unary_clause(const PredicateSchema& s, std::size_t max_len = 4) {
    auto names = s.unary_names();
    std::shuffle(names.begin(), names.end(), rng_);
    const std::size_t len = between(1, std::min(max_len, names.size()));
    Clause c;
    for (std::size_t i = 0; i < len; ++i) c.literals.push_back({names[i], sign(), VarSlot::X});
    c.weight = weight();
    return c;
  }

  // Binary clause: at least one binary literal, unary literals on x or y.
  Clause binary_clause(const PredicateSchema& s, std::size_t max_len = 4) {
    Clause c;
    const auto& bn = s.binary_names();
    c.literals.push_back({bn[index(bn.size())], sign(), VarSlot::XY});
    std::vector<Literal> pool;
    for (const auto& n : s.unary_names()) {
      pool.push_back({n, 1, VarSlot::X});
      pool.push_back({n, 1, VarSlot::Y});
    }
    std::shuffle(pool.begin(), pool.end(), rng_);
    const std::size_t extra = between(0, std::min(max_len - 1, pool.size()));
    for (std::size_t i = 0; i < extra; ++i) {
      pool[i].sign = sign();
      c.literals.push_back(pool[i]);
    }
    std::shuffle(c.literals.begin(), c.literals.end(), rng_);
    c.weight = weight();
    return c;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace kenn::testing
