#pragma once

// Text data formats.
//
// Node CSV:        id,feat1,...,featF,label       (label = class index)
// Edge list CSV:   src_id,dst_id[,v1,...,vB]      (binary truth values in [0,1])
// Multi-label CSV: feat1,...,featF,|,bit1,...,bitL (a literal '|' column)
//
// A first line whose first field is not numeric is treated as a header.
// Edges without values mark every binary predicate as known true.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kenn/matrix.hpp"
#include "kenn/train.hpp"

namespace kenn {

struct NodeTable {
  std::vector<std::int64_t> ids;
  Matrix features;
  std::vector<std::size_t> labels;
};

NodeTable read_node_csv(std::istream& in);
/// Edges reference node ids; the result's keys are row positions in `nodes`.
/// Values are converted to preactivations with the input-atom logit.
BinaryTable read_edge_csv(std::istream& in, const NodeTable& nodes, std::size_t n_binary);
MultiLabelData read_multilabel_csv(std::istream& in);

void write_node_csv(std::ostream& out, const GraphDataset& data);
void write_edge_csv(std::ostream& out, const GraphDataset& data);
void write_multilabel_csv(std::ostream& out, const MultiLabelData& data);

/// All nodes start in the training mask.
GraphDataset make_graph_dataset(const NodeTable& nodes, BinaryTable edges, std::size_t n_classes);

std::string read_file(const std::string& path);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

}  // namespace kenn
