#include <gtest/gtest.h>

#include "kenn/error.hpp"
#include "kenn/logic.hpp"
#include "support.hpp"

namespace kenn {
namespace {

const PredicateSchema kSmokers({"S", "C"}, {"F"});

TEST(Schema, RejectsDuplicatesAndNegationClashes) {
  EXPECT_THROW(PredicateSchema({"A", "A"}, {}), ValidationError);
  EXPECT_THROW(PredicateSchema({"A"}, {"A"}), ValidationError);
  EXPECT_THROW(PredicateSchema({"A", "nA"}, {}), ValidationError);
  EXPECT_THROW(PredicateSchema({"1A"}, {}), ValidationError);
  EXPECT_NO_THROW(PredicateSchema({"night", "day"}, {}));
}

TEST(Schema, ParseAndSerialize) {
  const auto s = parse_schema("# predicates\nunary: S, C\nbinary: F\n");
  EXPECT_EQ(s, kSmokers);
  EXPECT_EQ(serialize_schema(s), "unary: S,C\nbinary: F\n");
  EXPECT_EQ(parse_schema(serialize_schema(s)), s);
  EXPECT_EQ(parse_schema("unary: A\n").binary_names().size(), 0u);
}

TEST(Schema, ParseErrors) {
  EXPECT_THROW(parse_schema("ternary: T\n"), ParseError);
  EXPECT_THROW(parse_schema("unary: A\nunary: B\n"), ParseError);
  EXPECT_THROW(parse_schema("A, B\n"), ParseError);
}

TEST(Knowledge, LearnableUnaryClause) {
  const auto k = parse_knowledge("_:nS(x),C(x)", PredicateSchema({"S", "C"}, {}));
  ASSERT_EQ(k.unary.size(), 1u);
  EXPECT_TRUE(k.binary.empty());
  const Clause& c = k.unary[0];
  EXPECT_TRUE(c.weight.is_learnable());
  EXPECT_EQ(c.weight.value, kDefaultLearnableWeight);
  ASSERT_EQ(c.literals.size(), 2u);
  EXPECT_EQ(c.literals[0], (Literal{"S", -1, VarSlot::X}));
  EXPECT_EQ(c.literals[1], (Literal{"C", 1, VarSlot::X}));
}

TEST(Knowledge, FixedBinaryClause) {
  const auto k = parse_knowledge("10.0:nRide(x,y),On(x,y)", PredicateSchema({}, {"Ride", "On"}));
  ASSERT_EQ(k.binary.size(), 1u);
  const Clause& c = k.binary[0];
  EXPECT_EQ(c.weight, ClauseWeight::fixed(10.0));
  EXPECT_EQ(c.literals[0], (Literal{"Ride", -1, VarSlot::XY}));
  EXPECT_EQ(c.literals[1], (Literal{"On", 1, VarSlot::XY}));
}

TEST(Knowledge, MixedSlots) {
  const auto k = parse_knowledge("_:nS(x),nF(x,y),S(y)", kSmokers);
  ASSERT_EQ(k.binary.size(), 1u);
  const auto& lits = k.binary[0].literals;
  EXPECT_EQ(lits[0].slot, VarSlot::X);
  EXPECT_EQ(lits[1].slot, VarSlot::XY);
  EXPECT_EQ(lits[2].slot, VarSlot::Y);
  EXPECT_FALSE(k.binary[0].is_unary());
}

TEST(Knowledge, WeightForms) {
  const auto k = parse_knowledge("_(1.25):S(x)\n2:C(x)\n  # comment only\n\n_ : S(x) , C(x) # trailing\n", kSmokers);
  ASSERT_EQ(k.unary.size(), 3u);
  EXPECT_EQ(k.unary[0].weight, ClauseWeight::learnable(1.25));
  EXPECT_EQ(k.unary[1].weight, ClauseWeight::fixed(2.0));
  EXPECT_EQ(k.unary[2].weight, ClauseWeight::learnable());
}

TEST(Knowledge, EmptyTextIsEmptyKnowledge) {
  const auto k = parse_knowledge("", kSmokers);
  EXPECT_EQ(k.clause_count(), 0u);
  EXPECT_EQ(k.schema, kSmokers);
}

struct BadClause {
  const char* text;
  std::size_t column;
};

TEST(Knowledge, ErrorsCarryLineAndColumn) {
  const BadClause cases[] = {
      {"_:Q(x)", 3},           // unknown predicate
      {"_:S(x),S(x)", 8},      // repeated literal
      {"_:F(x)", 3},           // binary predicate on one variable
      {"_:S(x,y)", 3},         // unary predicate on a pair
      {"-1.0:S(x)", 1},        // negative fixed weight
      {"_ S(x)", 3},           // missing colon
      {"_:S(z)", 5},           // bad variable
      {"_:S(x),", 8},          // dangling comma
      {"_(-0.5):S(x)", 1},     // negative initial weight
  };
  for (const auto& bad : cases) {
    try {
      parse_knowledge(std::string("_:S(x)\n") + bad.text, kSmokers);
      ADD_FAILURE() << "accepted: " << bad.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u) << bad.text;
      EXPECT_GE(e.column(), 1u) << bad.text;
      EXPECT_EQ(e.column(), bad.column) << bad.text << ": " << e.what();
    }
  }
}

TEST(Knowledge, PartitionMatchesSlots) {
  testing::Gen g(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto schema = g.schema(g.between(1, 4), g.between(1, 2));
    std::vector<Clause> clauses;
    for (std::size_t i = 0; i < g.between(0, 6); ++i) {
      clauses.push_back(g.coin() ? g.unary_clause(schema) : g.binary_clause(schema));
    }
    const auto k = make_knowledge(schema, clauses);
    for (const auto& c : k.unary) {
      for (const auto& l : c.literals) EXPECT_EQ(l.slot, VarSlot::X);
    }
    for (const auto& c : k.binary) {
      bool all_x = true;
      for (const auto& l : c.literals) all_x = all_x && l.slot == VarSlot::X;
      EXPECT_FALSE(all_x);
    }
    EXPECT_EQ(k.clause_count(), clauses.size());
  }
}

TEST(Knowledge, RoundTripProperty) {
  testing::Gen g(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto schema = g.schema(g.between(1, 5), g.between(0, 2));
    std::vector<Clause> clauses;
    for (std::size_t i = 0; i < g.between(0, 8); ++i) {
      const bool binary = !schema.binary_names().empty() && g.coin();
      clauses.push_back(binary ? g.binary_clause(schema) : g.unary_clause(schema));
    }
    const auto k = make_knowledge(schema, clauses);
    const auto text = serialize_knowledge(k);
    const auto back = parse_knowledge(text, schema);
    ASSERT_EQ(back, k) << text;
    EXPECT_EQ(serialize_knowledge(back), text);
  }
}

TEST(Knowledge, SerializeClauseForms) {
  Clause c{{{"S", -1, VarSlot::X}, {"F", -1, VarSlot::XY}, {"S", 1, VarSlot::Y}}, ClauseWeight::learnable()};
  EXPECT_EQ(serialize_clause(c), "_:nS(x),nF(x,y),S(y)");
  c.weight = ClauseWeight::learnable(0.75);
  EXPECT_EQ(serialize_clause(c), "_(0.75):nS(x),nF(x,y),S(y)");
  c.weight = ClauseWeight::fixed(10.0);
  EXPECT_EQ(serialize_clause(c), "10.0:nS(x),nF(x,y),S(y)");
}

TEST(VectorClause, ZeroBasedPositionsAndSigns) {
  const PredicateSchema s({"A1", "A2", "A3"}, {});
  const auto k = parse_knowledge("_:A1(x),nA3(x)", s);
  EXPECT_EQ(to_vector_clause(k.unary[0], unary_layout(s)), (VectorClause{{0, 2}, {1, -1}}));

  const auto sc = parse_knowledge("_:S(x),C(x)", kSmokers);
  EXPECT_EQ(to_vector_clause(sc.unary[0], unary_layout(kSmokers)), (VectorClause{{0, 1}, {1, 1}}));
}

TEST(VectorClause, JoinedLayout) {
  const Layout layout = joined_layout(kSmokers);
  const Layout expected{{"S", VarSlot::X}, {"C", VarSlot::X}, {"S", VarSlot::Y}, {"C", VarSlot::Y}, {"F", VarSlot::XY}};
  EXPECT_EQ(layout, expected);
  const auto k = parse_knowledge("_:nS(x),nF(x,y),S(y)", kSmokers);
  EXPECT_EQ(to_vector_clause(k.binary[0], layout), (VectorClause{{0, 4, 2}, {-1, -1, 1}}));
}

TEST(VectorClause, UnresolvableLiteral) {
  const auto k = parse_knowledge("_:nS(x),nF(x,y),S(y)", kSmokers);
  EXPECT_THROW(to_vector_clause(k.binary[0], unary_layout(kSmokers)), ValidationError);
}

TEST(VectorClause, LengthMatchesLiterals) {
  testing::Gen g(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto schema = g.schema(g.between(1, 5), 1);
    const Clause c = g.coin() ? g.unary_clause(schema) : g.binary_clause(schema);
    const auto v = to_vector_clause(c, joined_layout(schema));
    ASSERT_EQ(v.columns.size(), c.literals.size());
    ASSERT_EQ(v.signs.size(), c.literals.size());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.signs[i], c.literals[i].sign);
  }
}

}  // namespace
}  // namespace kenn
