#pragma once

// Gödel t-conorm and its boost functions.
//
// A boost function takes literal truth values t and returns non-negative
// increments delta with t + delta still in [0,1] such that the t-conorm of the
// clause does not decrease. boost_hard is the minimal one for the Gödel
// t-conorm: it puts the whole increment on the strongest literal. boost_soft is
// the differentiable surrogate used inside the network, applied to
// preactivations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kenn {

/// max_i t_i. Throws ValidationError on empty input or values outside [0,1].
double godel(std::span<const double> t);

/// Increment `f_val` on the first argmax of t, zero elsewhere. Requires
/// 0 <= f_val <= 1 - max(t).
std::vector<double> boost_hard(double f_val, std::span<const double> t);

/// Spreads `f_val` evenly over all literals. Not minimal; used as a control
/// when probing minimality.
std::vector<double> boost_uniform(double f_val, std::span<const double> t);

/// w * softmax(v).
std::vector<double> boost_soft(double w, std::span<const double> v);

double lp_norm(std::span<const double> x, double p);

/// Looks for a boost delta' with ||delta'||_p < ||delta||_p whose Gödel value
/// godel(t + delta') is at least godel(t + delta). Candidates are drawn from
/// the non-negative part of the l_p sphere of radius (1 - 1e-6)||delta||_p and
/// clipped into [0, 1 - t_i]. Returns the first hit, or nothing after
/// `trials` draws.
std::optional<std::vector<double>> minimality_witness_search(std::span<const double> t, std::span<const double> delta,
                                                             double p, std::size_t trials, std::uint64_t seed);

/// Monte Carlo estimate of the chance that two clauses of n and m literals,
/// sharing one atom with opposite signs, push that atom in opposite directions
/// when all truth values are i.i.d. uniform.
double collision_mc(int n, int m, std::size_t samples, std::uint64_t seed);

/// Closed form of the collision probability: B(n, m) = (n-1)!(m-1)!/(n+m-1)!.
double collision_probability(int n, int m);

}  // namespace kenn
