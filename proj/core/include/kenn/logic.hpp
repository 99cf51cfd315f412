#pragma once

// Clause language: predicates, signed literals, weighted clauses, and the
// text formats used to store them.
//
// Clause file, one clause per line, '#' starts a comment:
//
//   line    := weight ':' literal (',' literal)*
//   weight  := '_' | '_(' FLOAT ')' | FLOAT
//   literal := 'n'? NAME '(' ('x' | 'y' | 'x,y') ')'
//
// '_' is a learnable weight with the default initial value, '_(v)' a learnable
// weight starting at v, and a bare number a fixed weight. A leading 'n' negates
// the literal.
//
// Schema file: two lines, `unary: A,B,C` and `binary: R,S`.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kenn {

inline constexpr double kDefaultLearnableWeight = 0.5;

class PredicateSchema {
 public:
  PredicateSchema() = default;
  /// Throws ValidationError on duplicate or malformed names, or when one
  /// name is another prefixed with 'n' (the negated form would be ambiguous).
  PredicateSchema(std::vector<std::string> unary, std::vector<std::string> binary);

  const std::vector<std::string>& unary_names() const { return unary_; }
  const std::vector<std::string>& binary_names() const { return binary_; }

  std::optional<std::size_t> unary_index(std::string_view name) const;
  std::optional<std::size_t> binary_index(std::string_view name) const;
  bool contains(std::string_view name) const { return unary_index(name) || binary_index(name); }

  friend bool operator==(const PredicateSchema&, const PredicateSchema&) = default;

 private:
  std::vector<std::string> unary_;
  std::vector<std::string> binary_;
};

/// Which variables an atom uses: unary on x, unary on y, or binary on (x,y).
enum class VarSlot { X, Y, XY };

struct Literal {
  std::string predicate;
  int sign = 1;  // +1 or -1
  VarSlot slot = VarSlot::X;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct ClauseWeight {
  enum class Kind { Fixed, Learnable };
  Kind kind = Kind::Learnable;
  double value = kDefaultLearnableWeight;  // fixed value or initial value

  static ClauseWeight fixed(double v) { return {Kind::Fixed, v}; }
  static ClauseWeight learnable(double init = kDefaultLearnableWeight) { return {Kind::Learnable, init}; }
  bool is_learnable() const { return kind == Kind::Learnable; }

  friend bool operator==(const ClauseWeight&, const ClauseWeight&) = default;
};

struct Clause {
  std::vector<Literal> literals;
  ClauseWeight weight;

  /// Unary iff every literal is on x.
  bool is_unary() const;
  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Knowledge {
  PredicateSchema schema;
  std::vector<Clause> unary;
  std::vector<Clause> binary;

  std::size_t clause_count() const { return unary.size() + binary.size(); }
  friend bool operator==(const Knowledge&, const Knowledge&) = default;
};

/// Index/sign form of a clause against one matrix layout. Indices are 0-based.
struct VectorClause {
  std::vector<std::size_t> columns;
  std::vector<int> signs;

  std::size_t size() const { return columns.size(); }
  friend bool operator==(const VectorClause&, const VectorClause&) = default;
};

/// A column of a preactivation matrix: a predicate applied to a slot.
struct AtomKey {
  std::string predicate;
  VarSlot slot = VarSlot::X;

  friend bool operator==(const AtomKey&, const AtomKey&) = default;
};

using Layout = std::vector<AtomKey>;

/// Columns are the unary predicates on x, in schema order.
Layout unary_layout(const PredicateSchema& schema);
/// Layout of the joined edge matrix: [unary on x | unary on y | binary].
Layout joined_layout(const PredicateSchema& schema);

/// Checks a clause against the schema: known predicates, slots matching
/// arity, no repeated literal, non-negative weight. Throws ValidationError.
void validate_clause(const Clause& clause, const PredicateSchema& schema);

/// Validates and partitions clauses into unary and binary sets.
Knowledge make_knowledge(PredicateSchema schema, std::vector<Clause> clauses);

PredicateSchema parse_schema(std::string_view text);
std::string serialize_schema(const PredicateSchema& schema);

/// Throws ParseError (with line and column) on syntax errors and on semantic
/// errors found while reading a line.
Knowledge parse_knowledge(std::string_view text, const PredicateSchema& schema);
std::string serialize_clause(const Clause& clause);
/// Unary clauses first, then binary, one per line.
std::string serialize_knowledge(const Knowledge& knowledge);

/// Throws ValidationError when a literal has no column in `layout`.
VectorClause to_vector_clause(const Clause& clause, const Layout& layout);

}  // namespace kenn
