#include "kenn/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "kenn/error.hpp"
#include "kenn/model.hpp"

namespace kenn {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && begin != end;
}

double number(const std::string& s, std::size_t line, std::size_t column) {
  double v = 0.0;
  if (!parse_double(s, v)) throw ParseError("expected a number, got '" + s + "'", line, column);
  return v;
}

std::int64_t integer(const std::string& s, std::size_t line, std::size_t column) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("expected an integer, got '" + s + "'", line, column);
  }
  return v;
}

// Data rows with their 1-based line numbers; blank lines and a leading header
// are skipped.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_fields(line);
    double probe = 0.0;
    if (rows.empty() && line_no == 1 && !parse_double(fields.front(), probe)) continue;
    rows.emplace_back(line_no, std::move(fields));
  }
  return rows;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

NodeTable read_node_csv(std::istream& in) {
  NodeTable table;
  const auto rows = read_rows(in);
  std::size_t width = 0;
  std::vector<double> values;
  for (const auto& [line, fields] : rows) {
    if (fields.size() < 3) throw ParseError("node rows need id, at least one feature and a label", line, 1);
    if (width == 0) width = fields.size() - 2;
    if (fields.size() - 2 != width) throw ParseError("inconsistent feature count", line, 1);
    table.ids.push_back(integer(fields[0], line, 1));
    for (std::size_t j = 1; j + 1 < fields.size(); ++j) values.push_back(number(fields[j], line, j + 1));
    const auto label = integer(fields.back(), line, fields.size());
    if (label < 0) throw ParseError("labels must be non-negative class indices", line, fields.size());
    table.labels.push_back(static_cast<std::size_t>(label));
  }
  table.features = Matrix(table.ids.size(), width, std::move(values));
  std::map<std::int64_t, std::size_t> seen;
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    if (!seen.emplace(table.ids[i], i).second) {
      throw ParseError("duplicate node id " + std::to_string(table.ids[i]), 0, 0);
    }
  }
  return table;
}

BinaryTable read_edge_csv(std::istream& in, const NodeTable& nodes, std::size_t n_binary) {
  std::map<std::int64_t, std::size_t> position;
  for (std::size_t i = 0; i < nodes.ids.size(); ++i) position.emplace(nodes.ids[i], i);
  BinaryTable table;
  std::vector<double> values;
  for (const auto& [line, fields] : read_rows(in)) {
    if (fields.size() != 2 && fields.size() != 2 + n_binary) {
      throw ParseError("edge rows need src,dst and optionally " + std::to_string(n_binary) + " values", line, 1);
    }
    for (std::size_t k = 0; k < 2; ++k) {
      const auto id = integer(fields[k], line, k + 1);
      auto it = position.find(id);
      if (it == position.end()) throw ParseError("unknown node id " + std::to_string(id), line, k + 1);
      (k == 0 ? table.edges.sx : table.edges.sy).push_back(it->second);
    }
    if (fields.size() == 2) {
      values.insert(values.end(), n_binary, kKnownTruePreactivation);
      continue;
    }
    Matrix truth(1, n_binary);
    for (std::size_t j = 0; j < n_binary; ++j) {
      truth(0, j) = number(fields[2 + j], line, 3 + j);
      if (!(truth(0, j) >= 0.0 && truth(0, j) <= 1.0)) throw ParseError("edge values must lie in [0,1]", line, 3 + j);
    }
    const Matrix z = inject_input_atoms(truth);
    values.insert(values.end(), z.data().begin(), z.data().end());
  }
  table.z = Matrix(table.edges.size(), n_binary, std::move(values));
  return table;
}

MultiLabelData read_multilabel_csv(std::istream& in) {
  std::vector<double> features;
  std::vector<double> labels;
  std::size_t n_features = 0;
  std::size_t n_labels = 0;
  std::size_t rows_read = 0;
  for (const auto& [line, fields] : read_rows(in)) {
    std::size_t bar = 0;
    while (bar < fields.size() && fields[bar] != "|") ++bar;
    if (bar == fields.size()) throw ParseError("missing '|' separator column", line, 1);
    if (rows_read == 0) {
      n_features = bar;
      n_labels = fields.size() - bar - 1;
    }
    if (bar != n_features || fields.size() - bar - 1 != n_labels) throw ParseError("inconsistent column count", line, 1);
    for (std::size_t j = 0; j < bar; ++j) features.push_back(number(fields[j], line, j + 1));
    for (std::size_t j = bar + 1; j < fields.size(); ++j) {
      const double v = number(fields[j], line, j + 1);
      if (v != 0.0 && v != 1.0) throw ParseError("label bits must be 0 or 1", line, j + 1);
      labels.push_back(v);
    }
    ++rows_read;
  }
  return {Matrix(rows_read, n_features, std::move(features)), Matrix(rows_read, n_labels, std::move(labels))};
}

void write_node_csv(std::ostream& out, const GraphDataset& data) {
  out << "id";
  for (std::size_t j = 0; j < data.features.cols(); ++j) out << ",f" << j;
  out << ",label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i;
    for (double v : data.features.row(i)) out << ',' << format_number(v);
    out << ',' << data.labels[i] << '\n';
  }
}

void write_edge_csv(std::ostream& out, const GraphDataset& data) {
  out << "src,dst\n";
  for (std::size_t e = 0; e < data.edges.size(); ++e) out << data.edges.sx[e] << ',' << data.edges.sy[e] << '\n';
}

void write_multilabel_csv(std::ostream& out, const MultiLabelData& data) {
  for (std::size_t j = 0; j < data.features.cols(); ++j) out << (j ? "," : "") << 'f' << j;
  out << ",|";
  for (std::size_t j = 0; j < data.labels.cols(); ++j) out << ",l" << j;
  out << '\n';
  for (std::size_t r = 0; r < data.features.rows(); ++r) {
    for (std::size_t j = 0; j < data.features.cols(); ++j) out << (j ? "," : "") << format_number(data.features(r, j));
    out << ",|";
    for (std::size_t j = 0; j < data.labels.cols(); ++j) out << ',' << static_cast<int>(data.labels(r, j));
    out << '\n';
  }
}

GraphDataset make_graph_dataset(const NodeTable& nodes, BinaryTable edges, std::size_t n_classes) {
  GraphDataset data;
  data.features = nodes.features;
  data.labels = nodes.labels;
  data.n_classes = n_classes;
  data.edges = std::move(edges.edges);
  data.binary = std::move(edges.z);
  data.train_mask.assign(data.size(), true);
  data.test_mask.assign(data.size(), false);
  data.validate();
  return data;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace kenn
