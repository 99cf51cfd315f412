#pragma once

// Define-by-run reverse-mode differentiation over dense matrices.
//
// A Tape records one forward pass. Nodes are appended in creation order, which
// is a topological order, so backward() walks the tape in reverse. Parameters
// live in a ParameterSet outside any tape and are bound as leaves per pass.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kenn/matrix.hpp"

namespace kenn {

class Tape;

/// Handle to a node recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Named trainable matrices that persist across forward passes.
class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix init);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  Matrix& value(std::size_t i) { return values_.at(i); }
  const Matrix& value(std::size_t i) const { return values_.at(i); }
  std::optional<std::size_t> find(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

class Tape {
 public:
  /// Called during backward with the node's own id; it reads grad(self) and
  /// accumulates into its parents' gradients.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(Matrix value);
  /// One leaf per parameter, in ParameterSet order.
  std::vector<Var> bind(const ParameterSet& params);

  /// Appends an interior node. It requires grad iff any parent does; the
  /// backward function is dropped otherwise.
  Var record(std::string op, Matrix value, std::vector<Var> parents, BackwardFn backward);

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  const Matrix& grad(std::size_t id) const { return nodes_.at(id).grad; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  const std::string& op(std::size_t id) const { return nodes_.at(id).op; }
  std::size_t size() const { return nodes_.size(); }

  /// Adds `g` into the gradient of node `id` if that node requires grad.
  void accumulate(std::size_t id, const Matrix& g);
  /// Gradient buffer for scatter-style accumulation. Callers must check
  /// requires_grad(id) first.
  Matrix& grad_buffer(std::size_t id) { return nodes_.at(id).grad; }

  /// Seeds d(loss)/d(loss) = 1 and runs all backward functions in reverse
  /// creation order. `loss` must be 1x1.
  void backward(Var loss);

  /// Gradients of the leaves returned by bind(), in the same order.
  std::vector<Matrix> gradients(std::span<const Var> leaves) const;

 private:
  struct Node {
    std::string op;
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
};

// Operators. All throw ShapeError on incompatible shapes.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// a + bias where bias is 1 x cols(a), broadcast over rows.
Var add_row_broadcast(Var a, Var bias);
Var relu(Var a);
Var sigmoid(Var a);
Var concat_cols(Var a, Var b);
/// Elementwise sum of same-shape nodes. The list must be nonempty.
Var sum_nodes(std::span<const Var> nodes);
/// Row-wise softmax with max subtraction.
Var softmax_rows(Var a);
/// Output column i = signs[i] * a[:, columns[i]].
Var gather_cols_signed(Var a, std::span<const std::size_t> columns, std::span<const int> signs);
/// Output column columns[i] += signs[i] * d[:, i]; other columns are zero.
Var scatter_cols_signed(Var d, std::span<const std::size_t> columns, std::span<const int> signs,
                        std::size_t out_width);
/// Output row k = sum of rows r of `a` with segment_ids[r] == k.
Var segment_sum_rows(Var a, std::span<const std::size_t> segment_ids, std::size_t n_segments);
/// Output row r = a[row_ids[r]].
Var gather_rows(Var a, std::span<const std::size_t> row_ids);
/// a * s where s is a 1x1 node.
Var scale(Var a, Var s);

/// Any Var produced by `fn` from the given inputs must be a 1x1 scalar.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

/// Relative-error floor used by finite_diff_check: errors are measured as
/// |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline constexpr double kGradCheckFloor = 1e-4;

/// Compares reverse-mode gradients of `fn` against central differences with
/// step `h` over every entry of every input. Returns the max relative error.
double finite_diff_check(const ScalarFn& fn, const std::vector<Matrix>& inputs, double h = 1e-5);

}  // namespace kenn
