#include "kenn/relational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kenn/error.hpp"

namespace kenn {

namespace {

std::vector<std::size_t> column_range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> cols(end - begin);
  std::iota(cols.begin(), cols.end(), begin);
  return cols;
}

Var select_cols(Var a, std::size_t begin, std::size_t end) {
  const auto cols = column_range(begin, end);
  const std::vector<int> signs(cols.size(), 1);
  return gather_cols_signed(a, cols, signs);
}

void check_edges(const EdgeList& edges, std::size_t n_objects) {
  if (edges.sx.size() != edges.sy.size()) throw ShapeError("edge key columns differ in length");
  for (std::size_t r = 0; r < edges.size(); ++r) {
    if (edges.sx[r] >= n_objects || edges.sy[r] >= n_objects) {
      throw ShapeError("edge " + std::to_string(r) + " references an object outside the unary table");
    }
  }
}

std::vector<bool> normalise_clamp(std::vector<bool> clamped, std::size_t n_binary) {
  if (clamped.empty()) clamped.assign(n_binary, false);
  if (clamped.size() != n_binary) throw ShapeError("clamp mask must have one entry per binary predicate");
  return clamped;
}

}  // namespace

Var join(Var unary, const EdgeList& edges, Var binary) {
  check_edges(edges, unary.rows());
  if (binary.rows() != edges.size()) {
    throw ShapeError("binary table has " + std::to_string(binary.rows()) + " rows for " +
                     std::to_string(edges.size()) + " edges");
  }
  Var ux = gather_rows(unary, edges.sx);
  Var uy = gather_rows(unary, edges.sy);
  return concat_cols(concat_cols(ux, uy), binary);
}

SplitDeltas split_deltas(Var joined_delta, const EdgeList& edges, std::size_t n_objects, std::size_t n_unary,
                         std::size_t n_binary) {
  if (joined_delta.cols() != 2 * n_unary + n_binary) {
    throw ShapeError("joined delta has " + std::to_string(joined_delta.cols()) + " columns, expected " +
                     std::to_string(2 * n_unary + n_binary));
  }
  if (joined_delta.rows() != edges.size()) throw ShapeError("joined delta rows do not match the edge list");
  check_edges(edges, n_objects);
  SplitDeltas out;
  out.unary_x = segment_sum_rows(select_cols(joined_delta, 0, n_unary), edges.sx, n_objects);
  out.unary_y = segment_sum_rows(select_cols(joined_delta, n_unary, 2 * n_unary), edges.sy, n_objects);
  out.binary = select_cols(joined_delta, 2 * n_unary, 2 * n_unary + n_binary);
  return out;
}

RelationalEnhancer::RelationalEnhancer(const Knowledge& knowledge, ParameterSet& params, const std::string& prefix,
                                       std::vector<bool> clamped)
    : knowledge_(knowledge),
      clamped_(normalise_clamp(std::move(clamped), knowledge.schema.binary_names().size())),
      unary_(knowledge.unary, unary_layout(knowledge.schema), params, prefix + "unary"),
      binary_(knowledge.binary, joined_layout(knowledge.schema), params, prefix + "binary") {}

std::vector<std::size_t> RelationalEnhancer::weight_parameters() const {
  auto ids = unary_.weight_parameters();
  const auto more = binary_.weight_parameters();
  ids.insert(ids.end(), more.begin(), more.end());
  return ids;
}

RelationalEnhancer::Output RelationalEnhancer::forward(std::span<const Var> bound, Var unary, const EdgeList& edges,
                                                       Var binary) const {
  const std::size_t n_unary = knowledge_.schema.unary_names().size();
  const std::size_t n_binary = knowledge_.schema.binary_names().size();
  if (unary.cols() != n_unary) throw ShapeError("unary table width does not match the schema");
  if (binary.cols() != n_binary) throw ShapeError("binary table width does not match the schema");
  check_edges(edges, unary.rows());
  if (binary.rows() != edges.size()) throw ShapeError("binary table rows do not match the edge list");

  std::vector<Var> unary_parts{unary};
  if (!unary_.empty()) unary_parts.push_back(unary_.delta(bound, unary));
  Var binary_out = binary;
  if (!binary_.empty()) {
    Var joined = join(unary, edges, binary);
    SplitDeltas parts = split_deltas(binary_.delta(bound, joined), edges, unary.rows(), n_unary, n_binary);
    unary_parts.push_back(parts.unary_x);
    unary_parts.push_back(parts.unary_y);
    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < n_binary; ++j)
      if (!clamped_[j]) free_cols.push_back(j);
    if (!free_cols.empty()) {
      const std::vector<int> signs(free_cols.size(), 1);
      Var kept = scatter_cols_signed(gather_cols_signed(parts.binary, free_cols, signs), free_cols, signs, n_binary);
      binary_out = add(binary, kept);
    }
  }
  Var unary_out = unary_parts.size() == 1 ? unary : sum_nodes(unary_parts);
  return {unary_out, binary_out};
}

std::pair<Matrix, Matrix> relational_ke_forward(const UnaryTable& u, const BinaryTable& b, const Knowledge& k,
                                                const std::vector<bool>& clamped) {
  ParameterSet params;
  RelationalEnhancer enhancer(k, params, "w_", clamped);
  Tape tape;
  const auto bound = tape.bind(params);
  auto out = enhancer.forward(bound, tape.constant(u.z), b.edges, tape.constant(b.z));
  return {out.unary.value(), out.binary.value()};
}

std::pair<Matrix, Matrix> naive_grounding_oracle(const UnaryTable& u, const BinaryTable& b, const Knowledge& k,
                                                 const std::vector<bool>& clamped_in) {
  const std::size_t n_objects = u.z.rows();
  const std::size_t n_unary = k.schema.unary_names().size();
  const std::size_t n_binary = k.schema.binary_names().size();
  const std::size_t n_edges = b.edges.size();
  if (u.z.cols() != n_unary || b.z.cols() != n_binary || b.z.rows() != n_edges) {
    throw ShapeError("tables do not match the schema");
  }
  check_edges(b.edges, n_objects);
  const std::vector<bool> clamped = normalise_clamp(clamped_in, n_binary);
  const std::size_t groundings = k.unary.size() * n_objects + k.binary.size() * n_edges;
  if (groundings > kOracleMaxGroundings) {
    throw ValidationError("oracle limited to " + std::to_string(kOracleMaxGroundings) + " grounded clauses");
  }

  // Flat atom vector: unary atoms object-major, then binary atoms edge-major.
  std::vector<double> atoms;
  atoms.reserve(n_objects * n_unary + n_edges * n_binary);
  atoms.insert(atoms.end(), u.z.data().begin(), u.z.data().end());
  atoms.insert(atoms.end(), b.z.data().begin(), b.z.data().end());
  auto unary_atom = [&](std::size_t object, std::size_t pred) { return object * n_unary + pred; };
  auto binary_atom = [&](std::size_t edge, std::size_t pred) { return n_objects * n_unary + edge * n_binary + pred; };

  std::vector<double> delta(atoms.size(), 0.0);
  auto apply_grounded = [&](const Clause& c, const std::vector<std::size_t>& atom_ids) {
    const double w = c.weight.value;
    std::vector<double> lit(atom_ids.size());
    double top = -INFINITY;
    for (std::size_t i = 0; i < lit.size(); ++i) {
      lit[i] = c.literals[i].sign * atoms[atom_ids[i]];
      top = std::max(top, lit[i]);
    }
    double total = 0.0;
    for (double& v : lit) total += (v = std::exp(v - top));
    for (std::size_t i = 0; i < lit.size(); ++i) delta[atom_ids[i]] += c.literals[i].sign * w * lit[i] / total;
  };

  for (const Clause& c : k.unary) {
    for (std::size_t obj = 0; obj < n_objects; ++obj) {
      std::vector<std::size_t> ids;
      for (const Literal& l : c.literals) ids.push_back(unary_atom(obj, *k.schema.unary_index(l.predicate)));
      apply_grounded(c, ids);
    }
  }
  for (const Clause& c : k.binary) {
    for (std::size_t e = 0; e < n_edges; ++e) {
      std::vector<std::size_t> ids;
      for (const Literal& l : c.literals) {
        switch (l.slot) {
          case VarSlot::X:
            ids.push_back(unary_atom(b.edges.sx[e], *k.schema.unary_index(l.predicate)));
            break;
          case VarSlot::Y:
            ids.push_back(unary_atom(b.edges.sy[e], *k.schema.unary_index(l.predicate)));
            break;
          case VarSlot::XY:
            ids.push_back(binary_atom(e, *k.schema.binary_index(l.predicate)));
            break;
        }
      }
      apply_grounded(c, ids);
    }
  }

  Matrix u_out = u.z;
  Matrix b_out = b.z;
  for (std::size_t obj = 0; obj < n_objects; ++obj)
    for (std::size_t j = 0; j < n_unary; ++j) u_out(obj, j) += delta[unary_atom(obj, j)];
  for (std::size_t e = 0; e < n_edges; ++e)
    for (std::size_t j = 0; j < n_binary; ++j)
      if (!clamped[j]) b_out(e, j) += delta[binary_atom(e, j)];
  return {u_out, b_out};
}

}  // namespace kenn
