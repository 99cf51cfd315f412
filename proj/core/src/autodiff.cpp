#include "kenn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kenn/error.hpp"

namespace kenn {

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

std::size_t ParameterSet::add(std::string name, Matrix init) {
  if (find(name)) throw ValidationError("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return values_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

Var Tape::constant(Matrix value) {
  Matrix grad = Matrix::zeros_like(value);
  nodes_.push_back({"constant", std::move(value), std::move(grad), {}, nullptr, false});
  return {this, nodes_.size() - 1};
}

Var Tape::param(Matrix value) {
  Matrix grad = Matrix::zeros_like(value);
  nodes_.push_back({"param", std::move(value), std::move(grad), {}, nullptr, true});
  return {this, nodes_.size() - 1};
}

std::vector<Var> Tape::bind(const ParameterSet& params) {
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) leaves.push_back(param(params.value(i)));
  return leaves;
}

Var Tape::record(std::string op, Matrix value, std::vector<Var> parents, BackwardFn backward) {
  Node node;
  node.op = std::move(op);
  node.grad = Matrix::zeros_like(value);
  node.value = std::move(value);
  for (const Var& p : parents) {
    if (p.tape != this) throw ShapeError("operand '" + node.op + "' mixes tapes");
    node.parents.push_back(p.id);
    node.requires_grad = node.requires_grad || nodes_[p.id].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& node = nodes_.at(id);
  if (!node.requires_grad) return;
  node.grad += g;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ShapeError("loss belongs to another tape");
  const Matrix& v = value(loss.id);
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("backward needs a 1x1 loss, got " + v.shape_string());
  for (Node& node : nodes_) std::fill(node.grad.data().begin(), node.grad.data().end(), 0.0);
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
}

std::vector<Matrix> Tape::gradients(std::span<const Var> leaves) const {
  std::vector<Matrix> out;
  out.reserve(leaves.size());
  for (const Var& v : leaves) out.push_back(grad(v.id));
  return out;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

std::string shapes(const char* op, const Matrix& a, const Matrix& b) {
  return std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string();
}

}  // namespace

Var matmul(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.cols() == y.rows(), shapes("matmul", x, y));
  Matrix out(x.rows(), y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      for (std::size_t j = 0; j < y.cols(); ++j) out(i, j) += xik * y(k, j);
    }
  }
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record("matmul", std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& x = t.value(ia);
    const Matrix& y = t.value(ib);
    if (t.requires_grad(ia)) {
      Matrix& gx = t.grad_buffer(ia);
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          for (std::size_t k = 0; k < x.cols(); ++k) gx(i, k) += gij * y(k, j);
        }
    }
    if (t.requires_grad(ib)) {
      Matrix& gy = t.grad_buffer(ib);
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t k = 0; k < x.cols(); ++k) {
          const double xik = x(i, k);
          if (xik == 0.0) continue;
          for (std::size_t j = 0; j < y.cols(); ++j) gy(k, j) += xik * g(i, j);
        }
    }
  });
}

Var add(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.same_shape(y), shapes("add", x, y));
  Matrix out = x;
  out += y;
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record("add", std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var add_row_broadcast(Var a, Var bias) {
  const Matrix& x = a.value();
  const Matrix& b = bias.value();
  require(b.rows() == 1 && b.cols() == x.cols(), shapes("add_row_broadcast", x, b));
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
  const std::size_t ia = a.id, ib = bias.id;
  return a.tape->record("add_row_broadcast", std::move(out), {a, bias}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    t.accumulate(ia, g);
    if (t.requires_grad(ib)) {
      Matrix& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
    }
  });
}

Var relu(Var a) {
  Matrix out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t ia = a.id;
  return a.tape->record("relu", std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& x = t.value(ia);
    Matrix& gx = t.grad_buffer(ia);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x.data()[i] > 0.0) gx.data()[i] += g.data()[i];
  });
}

Var sigmoid(Var a) {
  Matrix out = a.value();
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  const std::size_t ia = a.id;
  return a.tape->record("sigmoid", std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& s = t.value(self);
    Matrix& gx = t.grad_buffer(ia);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double si = s.data()[i];
      gx.data()[i] += g.data()[i] * si * (1.0 - si);
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  require(x.rows() == y.rows(), shapes("concat_cols", x, y));
  Matrix out(x.rows(), x.cols() + y.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::copy(x.row(i).begin(), x.row(i).end(), out.row(i).begin());
    std::copy(y.row(i).begin(), y.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(x.cols()));
  }
  const std::size_t ia = a.id, ib = b.id;
  const std::size_t split = x.cols();
  return a.tape->record("concat_cols", std::move(out), {a, b}, [ia, ib, split](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) {
      Matrix& gx = t.grad_buffer(ia);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < split; ++j) gx(i, j) += g(i, j);
    }
    if (t.requires_grad(ib)) {
      Matrix& gy = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = split; j < g.cols(); ++j) gy(i, j - split) += g(i, j);
    }
  });
}

Var sum_nodes(std::span<const Var> nodes) {
  require(!nodes.empty(), "sum_nodes: empty list");
  Matrix out = nodes.front().value();
  std::vector<Var> parents(nodes.begin(), nodes.end());
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    require(nodes[k].value().same_shape(out), shapes("sum_nodes", out, nodes[k].value()));
    out += nodes[k].value();
  }
  std::vector<std::size_t> ids;
  for (const Var& v : nodes) ids.push_back(v.id);
  return nodes.front().tape->record("sum_nodes", std::move(out), std::move(parents),
                                    [ids = std::move(ids)](Tape& t, std::size_t self) {
                                      for (std::size_t id : ids) t.accumulate(id, t.grad(self));
                                    });
}

Var softmax_rows(Var a) {
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    if (r.empty()) continue;
    const double m = *std::max_element(r.begin(), r.end());
    double total = 0.0;
    for (double& v : r) {
      v = std::exp(v - m);
      total += v;
    }
    for (double& v : r) v /= total;
  }
  const std::size_t ia = a.id;
  return a.tape->record("softmax_rows", std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& s = t.value(self);
    Matrix& gx = t.grad_buffer(ia);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < s.cols(); ++j) dot += g(i, j) * s(i, j);
      for (std::size_t j = 0; j < s.cols(); ++j) gx(i, j) += s(i, j) * (g(i, j) - dot);
    }
  });
}

namespace {

void check_signed_columns(const char* op, std::span<const std::size_t> columns, std::span<const int> signs,
                          std::size_t width) {
  require(columns.size() == signs.size(), std::string(op) + ": index and sign lists differ in length");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    require(columns[i] < width, std::string(op) + ": column " + std::to_string(columns[i]) + " out of range for width " +
                                    std::to_string(width));
    require(signs[i] == 1 || signs[i] == -1, std::string(op) + ": signs must be +1 or -1");
  }
}

}  // namespace

Var gather_cols_signed(Var a, std::span<const std::size_t> columns, std::span<const int> signs) {
  const Matrix& x = a.value();
  check_signed_columns("gather_cols_signed", columns, signs, x.cols());
  Matrix out(x.rows(), columns.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < columns.size(); ++k) out(i, k) = signs[k] * x(i, columns[k]);
  std::vector<std::size_t> p(columns.begin(), columns.end());
  std::vector<int> s(signs.begin(), signs.end());
  const std::size_t ia = a.id;
  return a.tape->record("gather_cols_signed", std::move(out), {a},
                        [ia, p = std::move(p), s = std::move(s)](Tape& t, std::size_t self) {
                          const Matrix& g = t.grad(self);
                          Matrix& gx = t.grad_buffer(ia);
                          for (std::size_t i = 0; i < g.rows(); ++i)
                            for (std::size_t k = 0; k < p.size(); ++k) gx(i, p[k]) += s[k] * g(i, k);
                        });
}

Var scatter_cols_signed(Var d, std::span<const std::size_t> columns, std::span<const int> signs,
                        std::size_t out_width) {
  const Matrix& x = d.value();
  require(x.cols() == columns.size(), "scatter_cols_signed: input has " + std::to_string(x.cols()) +
                                          " columns but " + std::to_string(columns.size()) + " indices");
  check_signed_columns("scatter_cols_signed", columns, signs, out_width);
  Matrix out(x.rows(), out_width);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < columns.size(); ++k) out(i, columns[k]) += signs[k] * x(i, k);
  std::vector<std::size_t> p(columns.begin(), columns.end());
  std::vector<int> s(signs.begin(), signs.end());
  const std::size_t id = d.id;
  return d.tape->record("scatter_cols_signed", std::move(out), {d},
                        [id, p = std::move(p), s = std::move(s)](Tape& t, std::size_t self) {
                          const Matrix& g = t.grad(self);
                          Matrix& gd = t.grad_buffer(id);
                          for (std::size_t i = 0; i < g.rows(); ++i)
                            for (std::size_t k = 0; k < p.size(); ++k) gd(i, k) += s[k] * g(i, p[k]);
                        });
}

Var segment_sum_rows(Var a, std::span<const std::size_t> segment_ids, std::size_t n_segments) {
  const Matrix& x = a.value();
  require(segment_ids.size() == x.rows(), "segment_sum_rows: " + std::to_string(segment_ids.size()) +
                                              " segment ids for " + std::to_string(x.rows()) + " rows");
  Matrix out(n_segments, x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    require(segment_ids[r] < n_segments, "segment_sum_rows: segment id " + std::to_string(segment_ids[r]) +
                                             " out of range " + std::to_string(n_segments));
    auto dst = out.row(segment_ids[r]);
    auto src = x.row(r);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  std::vector<std::size_t> ids(segment_ids.begin(), segment_ids.end());
  const std::size_t ia = a.id;
  return a.tape->record("segment_sum_rows", std::move(out), {a}, [ia, ids = std::move(ids)](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad_buffer(ia);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      auto src = g.row(ids[r]);
      auto dst = gx.row(r);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
  });
}

Var gather_rows(Var a, std::span<const std::size_t> row_ids) {
  const Matrix& x = a.value();
  Matrix out(row_ids.size(), x.cols());
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    require(row_ids[r] < x.rows(), "gather_rows: row " + std::to_string(row_ids[r]) + " out of range " +
                                       std::to_string(x.rows()));
    std::copy(x.row(row_ids[r]).begin(), x.row(row_ids[r]).end(), out.row(r).begin());
  }
  std::vector<std::size_t> ids(row_ids.begin(), row_ids.end());
  const std::size_t ia = a.id;
  return a.tape->record("gather_rows", std::move(out), {a}, [ia, ids = std::move(ids)](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad_buffer(ia);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      auto src = g.row(r);
      auto dst = gx.row(ids[r]);
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
  });
}

Var scale(Var a, Var s) {
  const Matrix& x = a.value();
  const Matrix& w = s.value();
  require(w.rows() == 1 && w.cols() == 1, shapes("scale", x, w));
  Matrix out = x;
  for (double& v : out.data()) v *= w(0, 0);
  const std::size_t ia = a.id, is = s.id;
  return a.tape->record("scale", std::move(out), {a, s}, [ia, is](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) {
      const double w = t.value(is)(0, 0);
      Matrix& gx = t.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += w * g.data()[i];
    }
    if (t.requires_grad(is)) {
      const Matrix& x = t.value(ia);
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += g.data()[i] * x.data()[i];
      t.grad_buffer(is)(0, 0) += dot;
    }
  });
}

double finite_diff_check(const ScalarFn& fn, const std::vector<Matrix>& inputs, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_diff_check: step must be positive");
  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const Matrix& m : inputs) leaves.push_back(tape.param(m));
    Var loss = fn(tape, leaves);
    tape.backward(loss);
    analytic = tape.gradients(leaves);
  }
  auto evaluate = [&](const std::vector<Matrix>& xs) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Matrix& m : xs) leaves.push_back(tape.constant(m));
    return fn(tape, leaves).value()(0, 0);
  };
  std::vector<Matrix> probe = inputs;
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (std::size_t i = 0; i < probe[k].size(); ++i) {
      const double original = probe[k].data()[i];
      probe[k].data()[i] = original + h;
      const double up = evaluate(probe);
      probe[k].data()[i] = original - h;
      const double down = evaluate(probe);
      probe[k].data()[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = analytic[k].data()[i];
      const double denom = std::max({std::abs(exact), std::abs(numeric), kGradCheckFloor});
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace kenn
