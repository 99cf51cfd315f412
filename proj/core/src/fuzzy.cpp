#include "kenn/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "kenn/error.hpp"

namespace kenn {

namespace {

void check_truth(std::span<const double> t) {
  if (t.empty()) throw ValidationError("truth vector is empty");
  for (double v : t) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("truth value " + std::to_string(v) + " outside [0,1]");
  }
}

std::size_t first_argmax(std::span<const double> x) {
  return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

constexpr double kBoxTolerance = 1e-12;

}  // namespace

double godel(std::span<const double> t) {
  check_truth(t);
  return *std::max_element(t.begin(), t.end());
}

std::vector<double> boost_hard(double f_val, std::span<const double> t) {
  const double top = godel(t);
  if (!(f_val >= 0.0) || f_val > 1.0 - top + kBoxTolerance) {
    throw ValidationError("boost " + std::to_string(f_val) + " outside [0, 1 - max t]");
  }
  std::vector<double> delta(t.size(), 0.0);
  delta[first_argmax(t)] = f_val;
  return delta;
}

std::vector<double> boost_uniform(double f_val, std::span<const double> t) {
  const double top = godel(t);
  if (!(f_val >= 0.0) || f_val > 1.0 - top + kBoxTolerance) {
    throw ValidationError("boost " + std::to_string(f_val) + " outside [0, 1 - max t]");
  }
  return std::vector<double>(t.size(), f_val / static_cast<double>(t.size()));
}

std::vector<double> boost_soft(double w, std::span<const double> v) {
  if (!(w >= 0.0)) throw ValidationError("clause weight must be >= 0");
  if (v.empty()) return {};
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    total += out[i];
  }
  for (double& x : out) x = w * x / total;
  return out;
}

double lp_norm(std::span<const double> x, double p) {
  if (!(p >= 1.0)) throw ValidationError("norm order must be >= 1");
  double acc = 0.0;
  for (double v : x) acc += std::pow(std::abs(v), p);
  return std::pow(acc, 1.0 / p);
}

std::optional<std::vector<double>> minimality_witness_search(std::span<const double> t, std::span<const double> delta,
                                                             double p, std::size_t trials, std::uint64_t seed) {
  if (!(p >= 1.0)) throw ValidationError("norm order must be >= 1");
  check_truth(t);
  if (delta.size() != t.size()) throw ValidationError("delta and truth vector differ in length");
  std::vector<double> boosted(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (delta[i] < 0.0 || t[i] + delta[i] > 1.0 + kBoxTolerance) {
      throw ValidationError("delta is not a valid boost for t");
    }
    boosted[i] = std::min(1.0, t[i] + delta[i]);
  }
  const double target = godel(boosted);
  const double radius = (1.0 - 1e-6) * lp_norm(delta, p);
  if (radius <= 0.0) return std::nullopt;

  // |g| with density proportional to exp(-|g|^p), normalised in l_p, is
  // uniform on the l_p sphere; taking magnitudes restricts it to the
  // non-negative orthant.
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(1.0 / p, 1.0);
  std::vector<double> candidate(t.size());
  std::vector<double> moved(t.size());
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (double& c : candidate) c = std::pow(gamma(rng), 1.0 / p);
    const double norm = lp_norm(candidate, p);
    if (norm <= 0.0) continue;
    for (std::size_t i = 0; i < t.size(); ++i) {
      candidate[i] = std::clamp(candidate[i] * radius / norm, 0.0, 1.0 - t[i]);
      moved[i] = t[i] + candidate[i];
    }
    if (godel(moved) >= target) return candidate;
  }
  return std::nullopt;
}

double collision_mc(int n, int m, std::size_t samples, std::uint64_t seed) {
  if (n < 2 || m < 2) throw ValidationError("clauses need at least two literals each");
  if (samples == 0) throw ValidationError("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double shared = uniform(rng);
    bool first = true;
    for (int i = 1; i < n; ++i) first = (uniform(rng) < shared) && first;
    bool second = true;
    for (int i = 1; i < m; ++i) second = (uniform(rng) < 1.0 - shared) && second;
    hits += (first && second) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

double collision_probability(int n, int m) {
  if (n < 1 || m < 1) throw ValidationError("literal counts must be positive");
  return std::beta(static_cast<double>(n), static_cast<double>(m));
}

}  // namespace kenn
