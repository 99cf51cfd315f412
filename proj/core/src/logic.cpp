#include "kenn/logic.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <tuple>

#include "kenn/error.hpp"

namespace kenn {

namespace {

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::optional<std::size_t> index_of(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  // Keep a decimal point so fixed weights never read as bare integers.
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos) s += ".0";
  return s;
}

const char* slot_text(VarSlot slot) {
  switch (slot) {
    case VarSlot::X:
      return "x";
    case VarSlot::Y:
      return "y";
    case VarSlot::XY:
      return "x,y";
  }
  return "?";
}

// Returns an error message, or nothing when the clause is valid.
std::optional<std::string> clause_problem(const Clause& clause, const PredicateSchema& schema) {
  if (clause.literals.empty()) return "clause has no literals";
  if (!std::isfinite(clause.weight.value) || clause.weight.value < 0.0) {
    return "clause weight must be a finite value >= 0";
  }
  std::set<std::tuple<std::string, int, VarSlot>> seen;
  for (const Literal& lit : clause.literals) {
    if (lit.sign != 1 && lit.sign != -1) return "literal sign must be +1 or -1";
    const bool unary = schema.unary_index(lit.predicate).has_value();
    const bool binary = schema.binary_index(lit.predicate).has_value();
    if (!unary && !binary) return "unknown predicate '" + lit.predicate + "'";
    if (binary && lit.slot != VarSlot::XY) return "binary predicate '" + lit.predicate + "' needs (x,y)";
    if (unary && lit.slot == VarSlot::XY) return "unary predicate '" + lit.predicate + "' takes a single variable";
    if (!seen.emplace(lit.predicate, lit.sign, lit.slot).second) {
      return "repeated literal " + std::string(lit.sign < 0 ? "n" : "") + lit.predicate + "(" + slot_text(lit.slot) +
             ")";
    }
  }
  return std::nullopt;
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no, const PredicateSchema& schema)
      : line_(line), line_no_(line_no), schema_(schema) {}

  Clause parse() {
    Clause clause;
    skip_space();
    clause.weight = parse_weight();
    skip_space();
    expect(':');
    while (true) {
      skip_space();
      const std::size_t start = pos_;
      Literal lit = parse_literal();
      for (const Literal& prev : clause.literals) {
        if (prev == lit) fail("repeated literal", start + 1);
      }
      clause.literals.push_back(std::move(lit));
      skip_space();
      if (at_end()) break;
      expect(',');
    }
    if (auto problem = clause_problem(clause, schema_)) fail(*problem, 1);
    return clause;
  }

 private:
  [[noreturn]] void fail(const std::string& message, std::size_t column) const {
    throw ParseError(message, line_no_, column);
  }
  [[noreturn]] void fail(const std::string& message) const { fail(message, pos_ + 1); }

  bool at_end() const { return pos_ >= line_.size(); }
  char peek() const { return at_end() ? '\0' : line_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  double parse_number() {
    double value = 0.0;
    const char* begin = line_.data() + pos_;
    const char* end = line_.data() + line_.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - line_.data());
    return value;
  }

  ClauseWeight parse_weight() {
    const std::size_t start = pos_ + 1;
    if (peek() == '_') {
      ++pos_;
      if (peek() != '(') return ClauseWeight::learnable();
      ++pos_;
      skip_space();
      const double init = parse_number();
      skip_space();
      expect(')');
      if (!std::isfinite(init) || init < 0.0) fail("initial weight must be >= 0", start);
      return ClauseWeight::learnable(init);
    }
    const double value = parse_number();
    if (!std::isfinite(value) || value < 0.0) fail("fixed weight must be >= 0", start);
    return ClauseWeight::fixed(value);
  }

  Literal parse_literal() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    const std::string_view token = line_.substr(start, pos_ - start);
    if (!valid_name(token)) fail("expected a predicate name", start + 1);

    Literal lit;
    if (schema_.contains(token)) {
      lit.predicate = std::string(token);
    } else if (token.size() > 1 && token[0] == 'n' && schema_.contains(token.substr(1))) {
      lit.predicate = std::string(token.substr(1));
      lit.sign = -1;
    } else {
      fail("unknown predicate '" + std::string(token) + "'", start + 1);
    }

    skip_space();
    expect('(');
    skip_space();
    const char var = peek();
    if (var != 'x' && var != 'y') fail("expected variable 'x' or 'y'");
    ++pos_;
    skip_space();
    if (peek() == ',') {
      if (var != 'x') fail("binary atoms are written (x,y)");
      ++pos_;
      skip_space();
      if (peek() != 'y') fail("binary atoms are written (x,y)");
      ++pos_;
      skip_space();
      lit.slot = VarSlot::XY;
    } else {
      lit.slot = var == 'x' ? VarSlot::X : VarSlot::Y;
    }
    expect(')');

    const bool binary = schema_.binary_index(lit.predicate).has_value();
    if (binary && lit.slot != VarSlot::XY) fail("binary predicate '" + lit.predicate + "' needs (x,y)", start + 1);
    if (!binary && lit.slot == VarSlot::XY) {
      fail("unary predicate '" + lit.predicate + "' takes a single variable", start + 1);
    }
    return lit;
  }

  std::string_view line_;
  std::size_t line_no_;
  const PredicateSchema& schema_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  return line;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

PredicateSchema::PredicateSchema(std::vector<std::string> unary, std::vector<std::string> binary)
    : unary_(std::move(unary)), binary_(std::move(binary)) {
  std::set<std::string> names;
  for (const auto* list : {&unary_, &binary_}) {
    for (const std::string& name : *list) {
      if (!valid_name(name)) throw ValidationError("invalid predicate name '" + name + "'");
      if (!names.insert(name).second) throw ValidationError("duplicate predicate name '" + name + "'");
    }
  }
  for (const std::string& name : names) {
    if (name.size() > 1 && name[0] == 'n' && names.count(name.substr(1))) {
      throw ValidationError("predicate names '" + name + "' and '" + name.substr(1) +
                            "' make negated literals ambiguous");
    }
  }
}

std::optional<std::size_t> PredicateSchema::unary_index(std::string_view name) const { return index_of(unary_, name); }

std::optional<std::size_t> PredicateSchema::binary_index(std::string_view name) const {
  return index_of(binary_, name);
}

bool Clause::is_unary() const {
  return std::all_of(literals.begin(), literals.end(), [](const Literal& l) { return l.slot == VarSlot::X; });
}

Layout unary_layout(const PredicateSchema& schema) {
  Layout layout;
  for (const auto& name : schema.unary_names()) layout.push_back({name, VarSlot::X});
  return layout;
}

Layout joined_layout(const PredicateSchema& schema) {
  Layout layout;
  for (const auto& name : schema.unary_names()) layout.push_back({name, VarSlot::X});
  for (const auto& name : schema.unary_names()) layout.push_back({name, VarSlot::Y});
  for (const auto& name : schema.binary_names()) layout.push_back({name, VarSlot::XY});
  return layout;
}

void validate_clause(const Clause& clause, const PredicateSchema& schema) {
  if (auto problem = clause_problem(clause, schema)) throw ValidationError(*problem);
}

Knowledge make_knowledge(PredicateSchema schema, std::vector<Clause> clauses) {
  Knowledge k;
  k.schema = std::move(schema);
  for (Clause& c : clauses) {
    validate_clause(c, k.schema);
    (c.is_unary() ? k.unary : k.binary).push_back(std::move(c));
  }
  return k;
}

PredicateSchema parse_schema(std::string_view text) {
  std::optional<std::vector<std::string>> unary;
  std::optional<std::vector<std::string>> binary;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = strip_comment(lines[i]);
    if (blank(line)) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError("expected 'unary:' or 'binary:'", i + 1, 1);
    const std::string_view key = trim(line.substr(0, colon));
    std::vector<std::string> names;
    std::string_view rest = line.substr(colon + 1);
    if (!blank(rest)) {
      std::size_t start = 0;
      while (true) {
        const auto comma = rest.find(',', start);
        const std::string_view item = trim(rest.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (!valid_name(item)) {
          throw ParseError("invalid predicate name '" + std::string(item) + "'", i + 1, colon + 2 + start);
        }
        names.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    std::optional<std::vector<std::string>>* slot = nullptr;
    if (key == "unary") {
      slot = &unary;
    } else if (key == "binary") {
      slot = &binary;
    } else {
      throw ParseError("unknown schema key '" + std::string(key) + "'", i + 1, 1);
    }
    if (slot->has_value()) throw ParseError("duplicate '" + std::string(key) + "' line", i + 1, 1);
    *slot = std::move(names);
  }
  try {
    return PredicateSchema(unary.value_or(std::vector<std::string>{}), binary.value_or(std::vector<std::string>{}));
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0, 0);
  }
}

std::string serialize_schema(const PredicateSchema& schema) {
  auto join = [](const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
    return out;
  };
  return "unary: " + join(schema.unary_names()) + "\nbinary: " + join(schema.binary_names()) + "\n";
}

Knowledge parse_knowledge(std::string_view text, const PredicateSchema& schema) {
  Knowledge k;
  k.schema = schema;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = strip_comment(lines[i]);
    if (blank(line)) continue;
    Clause c = LineParser(line, i + 1, schema).parse();
    (c.is_unary() ? k.unary : k.binary).push_back(std::move(c));
  }
  return k;
}

std::string serialize_clause(const Clause& clause) {
  std::string out;
  if (clause.weight.is_learnable()) {
    out = clause.weight.value == kDefaultLearnableWeight ? "_" : "_(" + format_double(clause.weight.value) + ")";
  } else {
    out = format_double(clause.weight.value);
  }
  out += ':';
  for (std::size_t i = 0; i < clause.literals.size(); ++i) {
    const Literal& lit = clause.literals[i];
    if (i) out += ',';
    if (lit.sign < 0) out += 'n';
    out += lit.predicate + "(" + slot_text(lit.slot) + ")";
  }
  return out;
}

std::string serialize_knowledge(const Knowledge& knowledge) {
  std::string out;
  for (const auto* list : {&knowledge.unary, &knowledge.binary})
    for (const Clause& c : *list) out += serialize_clause(c) + "\n";
  return out;
}

VectorClause to_vector_clause(const Clause& clause, const Layout& layout) {
  VectorClause vc;
  for (const Literal& lit : clause.literals) {
    auto it = std::find(layout.begin(), layout.end(), AtomKey{lit.predicate, lit.slot});
    if (it == layout.end()) {
      throw ValidationError("literal " + lit.predicate + "(" + slot_text(lit.slot) + ") has no column in the layout");
    }
    vc.columns.push_back(static_cast<std::size_t>(it - layout.begin()));
    vc.signs.push_back(lit.sign);
  }
  return vc;
}

}  // namespace kenn
