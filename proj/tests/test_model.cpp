#include <gtest/gtest.h>

#include <cmath>

#include "kenn/demos.hpp"
#include "kenn/error.hpp"
#include "kenn/model.hpp"
#include "kenn/train.hpp"
#include "support.hpp"

namespace kenn {
namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void zero_parameters(ParameterSet& params, const std::vector<std::size_t>& ids) {
  for (std::size_t id : ids) {
    for (double& v : params.value(id).data()) v = 0.0;
  }
}

Knowledge empty_knowledge(const std::vector<std::string>& names) { return {PredicateSchema(names, {}), {}, {}}; }

TEST(Mlp, ZeroWeightsGiveZeroPreactivations) {
  ParameterSet params;
  const Mlp mlp({3, {4, 2}, 1}, params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double& v : params.value(i).data()) v = 0.0;
  }
  Tape tape;
  const auto bound = tape.bind(params);
  const Matrix out = mlp.forward(bound, tape.constant(testing::Gen(1).matrix(5, 3))).value();
  EXPECT_EQ(out, Matrix(5, 2));
}

TEST(Mlp, SingleLayerIsAffine) {
  ParameterSet params;
  const Mlp mlp({3, {2}, 4}, params);
  ASSERT_EQ(params.size(), 2u);
  EXPECT_EQ(params.name(0), "base.W0");
  EXPECT_EQ(params.name(1), "base.b0");
  params.value(1) = Matrix{{0.5, -1.0}};
  const Matrix x = testing::Gen(2).matrix(6, 3);
  Tape tape;
  const auto bound = tape.bind(params);
  const Matrix out = mlp.forward(bound, tape.constant(x)).value();
  const Matrix& w = params.value(0);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      double expect = params.value(1)(0, c);
      for (std::size_t k = 0; k < 3; ++k) expect += x(r, k) * w(k, c);
      EXPECT_NEAR(out(r, c), expect, 1e-12);
    }
  }
}

TEST(Mlp, GlorotBoundsAndZeroBiases) {
  ParameterSet params;
  const Mlp mlp({10, {30, 5}, 7}, params);
  const double bound0 = std::sqrt(6.0 / 40.0);
  for (double v : params.value(0).data()) EXPECT_LE(std::abs(v), bound0);
  for (double v : params.value(1).data()) EXPECT_EQ(v, 0.0);
  const double bound1 = std::sqrt(6.0 / 35.0);
  for (double v : params.value(2).data()) EXPECT_LE(std::abs(v), bound1);
}

TEST(Mlp, SeedDeterminesWeights) {
  ParameterSet a, b, c;
  const Mlp ma({4, {3}, 5}, a), mb({4, {3}, 5}, b), mc({4, {3}, 6}, c);
  EXPECT_EQ(a.value(0), b.value(0));
  EXPECT_NE(a.value(0), c.value(0));
}

TEST(Mlp, ConfigErrors) {
  ParameterSet params;
  EXPECT_THROW(Mlp({3, {}, 0}, params), ValidationError);
  EXPECT_THROW(Mlp({0, {2}, 0}, params), ValidationError);
  EXPECT_THROW(Mlp({3, {2, 0}, 0}, params), ValidationError);
  const Mlp mlp({3, {2}, 0}, params);
  Tape tape;
  const auto bound = tape.bind(params);
  EXPECT_THROW(mlp.forward(bound, tape.constant(Matrix(2, 4))), ShapeError);
}

TEST(InputAtoms, LogitWithClamp) {
  const Matrix z = inject_input_atoms(Matrix{{0.5, 1.0, 0.0, 0.999}});
  const double l = std::log(0.999 / 0.001);
  EXPECT_NEAR(z(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(z(0, 1), l, 1e-12);
  EXPECT_NEAR(z(0, 1), 6.9068, 1e-4);
  EXPECT_NEAR(z(0, 2), -l, 1e-12);
  EXPECT_NEAR(z(0, 3), l, 1e-12);
}

TEST(InputAtoms, Errors) {
  EXPECT_THROW(inject_input_atoms(Matrix{{1.5}}), ValidationError);
  EXPECT_THROW(inject_input_atoms(Matrix{{-0.1}}), ValidationError);
  EXPECT_THROW(inject_input_atoms(Matrix{{0.5}}, 0.0), ValidationError);
  EXPECT_THROW(inject_input_atoms(Matrix{{0.5}}, 0.5), ValidationError);
}

TEST(Head, Names) {
  EXPECT_EQ(parse_head("sigmoid"), Head::Sigmoid);
  EXPECT_EQ(parse_head("softmax"), Head::Softmax);
  EXPECT_STREQ(head_name(Head::Softmax), "softmax");
  EXPECT_THROW(parse_head("tanh"), ValidationError);
}

// XOR through fixed clauses: every clause revises y from the unrevised
// preactivations, and the deltas add up.
TEST(KennModel, XorConstructionMatchesScalarOracle) {
  KennConfig cfg;
  cfg.base = {2, {1}, 0};
  cfg.predicted = {"y"};
  cfg.input_atoms = {{"x1", 0}, {"x2", 1}};
  KennModel model(cfg, xor_knowledge());
  zero_parameters(model.parameters(), model.base_parameters());

  const Matrix x{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const Matrix out = model.predict(x);
  ASSERT_EQ(out.rows(), 4u);
  ASSERT_EQ(out.cols(), 1u);

  const double l = std::log(0.999 / 0.001);
  const int signs[4][3] = {{-1, -1, -1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}};
  for (std::size_t r = 0; r < 4; ++r) {
    const double z[3] = {x(r, 0) > 0.5 ? l : -l, x(r, 1) > 0.5 ? l : -l, 0.0};
    double delta = 0.0;
    for (const auto& s : signs) {
      double v[3], total = 0.0;
      for (int i = 0; i < 3; ++i) total += (v[i] = std::exp(s[i] * z[i]));
      delta += 10.0 * s[2] * v[2] / total;
    }
    EXPECT_NEAR(out(r, 0), logistic(delta), 1e-12) << r;
    const double target = (x(r, 0) > 0.5) != (x(r, 1) > 0.5) ? 1.0 : 0.0;
    EXPECT_LT(std::abs(out(r, 0) - target), 0.1) << r;
  }
}

TEST(KennModel, EmptyKnowledgeEqualsBaseHead) {
  for (Head head : {Head::Sigmoid, Head::Softmax}) {
    KennConfig cfg;
    cfg.base = {4, {5, 3}, 3};
    cfg.head = head;
    cfg.predicted = {"A", "B", "C"};
    const KennModel plain(cfg, empty_knowledge(cfg.predicted));
    const KennModel with(cfg, parse_knowledge("_:nA(x),B(x)\n_:A(x),C(x),nB(x)\n", PredicateSchema(cfg.predicted, {})));
    const Matrix x = testing::Gen(5).matrix(7, 4);
    Tape tape;
    const auto bound = tape.bind(plain.parameters());
    const Matrix head_of_base = apply_head(head, plain.base_preactivations(bound, tape.constant(x))).value();
    EXPECT_EQ(plain.predict(x), head_of_base);

    KennModel zeroed(cfg, parse_knowledge("_:nA(x),B(x)\n_:A(x),C(x),nB(x)\n", PredicateSchema(cfg.predicted, {})));
    zero_parameters(zeroed.parameters(), zeroed.clause_parameters());
    EXPECT_EQ(zeroed.predict(x), plain.predict(x));
    EXPECT_NE(with.predict(x), plain.predict(x));
  }
}

TEST(KennModel, OutputsPredictedColumnsOnly) {
  KennConfig cfg;
  cfg.base = {3, {2}, 0};
  cfg.predicted = {"P", "Q"};
  cfg.input_atoms = {{"R", 2}};
  const KennModel model(cfg, parse_knowledge("_:nR(x),P(x)\n", PredicateSchema({"R", "P", "Q"}, {})));
  const Matrix x{{0.1, 0.2, 1.0}, {0.3, -0.2, 0.0}};
  const Matrix out = model.predict(x);
  EXPECT_EQ(out.rows(), 2u);
  EXPECT_EQ(out.cols(), 2u);
  // An input atom set to true pushes P up; set to false it leaves P alone.
  KennModel plain(cfg, parse_knowledge("", PredicateSchema({"R", "P", "Q"}, {})));
  const Matrix base = plain.predict(x);
  EXPECT_GT(out(0, 0), base(0, 0));
  EXPECT_NEAR(out(1, 0), base(1, 0), 1e-3);
  EXPECT_EQ(out(0, 1), base(0, 1));
}

TEST(KennModel, SoftmaxRowsSumToOne) {
  KennConfig cfg;
  cfg.base = {4, {6, 3}, 9};
  cfg.head = Head::Softmax;
  cfg.predicted = {"A", "B", "C"};
  const KennModel model(cfg, parse_knowledge("_:nA(x),nB(x)\n_:A(x),B(x),C(x)\n", PredicateSchema(cfg.predicted, {})));
  const Matrix out = model.predict(testing::Gen(4).matrix(10, 4, 3.0));
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double s = 0.0;
    for (double v : out.row(r)) {
      EXPECT_GT(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(KennModel, ClauseWeightsReport) {
  KennConfig cfg;
  cfg.base = {2, {2}, 0};
  cfg.predicted = {"A", "B"};
  KennModel model(cfg, parse_knowledge("_:nA(x),B(x)\n3.0:A(x),B(x)\n", PredicateSchema(cfg.predicted, {})));
  const auto w = model.clause_weights();
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].first, "nA(x),B(x)");
  EXPECT_DOUBLE_EQ(w[0].second, 0.5);
  EXPECT_DOUBLE_EQ(w[1].second, 3.0);
  model.parameters().value(model.clause_parameters()[0]) = Matrix{{-2.0}};
  EXPECT_EQ(model.clause_weights()[0].second, 0.0);
}

TEST(KennModel, ConfigErrors) {
  const PredicateSchema s({"A", "B"}, {});
  KennConfig cfg;
  cfg.base = {2, {3}, 0};
  cfg.predicted = {"A", "B"};
  EXPECT_THROW(KennModel(cfg, parse_knowledge("", s)), ValidationError);
  cfg.base.layer_widths = {2};
  cfg.epsilon = 0.7;
  EXPECT_THROW(KennModel(cfg, parse_knowledge("", s)), ValidationError);
  cfg.epsilon = kDefaultInputEpsilon;
  EXPECT_THROW(KennModel(cfg, parse_knowledge("_:A(x),nF(x,y)", PredicateSchema({"A", "B"}, {"F"}))),
               ValidationError);
  cfg.input_atoms = {{"A", 5}};
  EXPECT_THROW(KennModel(cfg, parse_knowledge("", s)), ValidationError);
  cfg.input_atoms = {{"A", 0}};
  EXPECT_THROW(KennModel(cfg, parse_knowledge("", s)), ValidationError);
}

TEST(KennModel, FullModelGradientsMatchFiniteDifferences) {
  testing::Gen g(31);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    KennConfig cfg;
    cfg.base = {3, {4, 3}, seed};
    cfg.predicted = {"A", "B", "C"};
    const PredicateSchema s(cfg.predicted, {});
    KennModel model(cfg, parse_knowledge("_:nA(x),B(x)\n_:A(x),nB(x),C(x)\n2.0:nC(x),A(x)\n", s));
    // Nonzero biases keep the hidden preactivations off the ReLU kink.
    for (std::size_t id : model.base_parameters()) {
      if (model.parameters().name(id).starts_with("base.b")) {
        for (double& v : model.parameters().value(id).data()) v = g.normal(0.5);
      }
    }
    for (std::size_t id : model.clause_parameters()) model.parameters().value(id) = Matrix{{g.uniform(0.2, 2.0)}};
    const Matrix x = g.matrix(5, 3);
    const Matrix targets = g.bits(5, 3);

    std::vector<Matrix> inputs;
    for (std::size_t i = 0; i < model.parameters().size(); ++i) inputs.push_back(model.parameters().value(i));
    const auto fn = [&](Tape& tape, std::span<const Var> vars) {
      return bce_loss(model.forward(vars, tape.constant(x)), targets);
    };
    EXPECT_LT(finite_diff_check(fn, inputs), 1e-5) << seed;
  }
}

TEST(RelationalModel, NoEdgesEqualsFlatModel) {
  const PredicateSchema flat_schema({"A", "B", "C"}, {});
  const PredicateSchema rel_schema({"A", "B", "C"}, {"R"});
  const std::string unary = "_(0.7):nA(x),B(x)\n_(1.3):A(x),C(x)\n";
  KennConfig flat_cfg;
  flat_cfg.base = {4, {5, 3}, 12};
  flat_cfg.head = Head::Softmax;
  flat_cfg.predicted = {"A", "B", "C"};
  const KennModel flat(flat_cfg, parse_knowledge(unary, flat_schema));
  RelationalKennConfig rel_cfg;
  rel_cfg.base = flat_cfg.base;
  const RelationalKennModel rel(rel_cfg, parse_knowledge(unary + "_:nA(x),nR(x,y),A(y)\n", rel_schema));

  const Matrix x = testing::Gen(6).matrix(8, 4);
  const Matrix a = flat.predict(x);
  const Matrix b = rel.predict(x, EdgeList{}, Matrix(0, 1));
  EXPECT_LT(max_abs_diff(a, b), 1e-12);
}

TEST(RelationalModel, ClauseParameterNames) {
  RelationalKennConfig cfg;
  cfg.base = {2, {2}, 0};
  const RelationalKennModel model(cfg, parse_knowledge("_:nA(x),B(x)\n_:nA(x),nR(x,y),A(y)\n",
                                                       PredicateSchema({"A", "B"}, {"R"})));
  const auto w = model.clause_weights();
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[1].first, "nA(x),nR(x,y),A(y)");
  EXPECT_THROW(RelationalKennModel(RelationalKennConfig{{2, {3}, 0}, Head::Softmax, {}},
                                   parse_knowledge("", PredicateSchema({"A", "B"}, {"R"}))),
               ValidationError);
}

TEST(RelationalModel, GradientCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_LT(relational_gradcheck(seed), kGradcheckTolerance) << seed;
}

}  // namespace
}  // namespace kenn
