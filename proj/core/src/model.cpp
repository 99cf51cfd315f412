#include "kenn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kenn/error.hpp"

namespace kenn {

const char* head_name(Head head) { return head == Head::Sigmoid ? "sigmoid" : "softmax"; }

Head parse_head(const std::string& name) {
  if (name == "sigmoid") return Head::Sigmoid;
  if (name == "softmax") return Head::Softmax;
  throw ValidationError("unknown head '" + name + "'");
}

Var apply_head(Head head, Var z) { return head == Head::Sigmoid ? sigmoid(z) : softmax_rows(z); }

Mlp::Mlp(const MlpConfig& cfg, ParameterSet& params, const std::string& prefix) : cfg_(cfg) {
  if (cfg.layer_widths.empty()) throw ValidationError("network needs at least one layer");
  if (cfg.input_width == 0) throw ValidationError("network input width must be positive");
  for (std::size_t w : cfg.layer_widths) {
    if (w == 0) throw ValidationError("layer widths must be positive");
  }
  std::mt19937_64 rng(cfg.seed);
  std::size_t fan_in = cfg.input_width;
  for (std::size_t l = 0; l < cfg.layer_widths.size(); ++l) {
    const std::size_t fan_out = cfg.layer_widths[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (double& v : w.data()) v = uniform(rng);
    param_ids_.push_back(params.add(prefix + "W" + std::to_string(l), std::move(w)));
    param_ids_.push_back(params.add(prefix + "b" + std::to_string(l), Matrix(1, fan_out)));
    fan_in = fan_out;
  }
}

Var Mlp::forward(std::span<const Var> bound, Var x) const {
  if (x.cols() != cfg_.input_width) {
    throw ShapeError("network expects " + std::to_string(cfg_.input_width) + " features, got " +
                     std::to_string(x.cols()));
  }
  Var h = x;
  const std::size_t layers = cfg_.layer_widths.size();
  for (std::size_t l = 0; l < layers; ++l) {
    h = add_row_broadcast(matmul(h, bound[param_ids_[2 * l]]), bound[param_ids_[2 * l + 1]]);
    if (l + 1 < layers) h = relu(h);
  }
  return h;
}

Matrix inject_input_atoms(const Matrix& atoms, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("epsilon must lie in (0, 0.5)");
  Matrix out = atoms;
  for (double& v : out.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("input atom value " + std::to_string(v) + " outside [0,1]");
    const double c = std::clamp(v, epsilon, 1.0 - epsilon);
    v = std::log(c / (1.0 - c));
  }
  return out;
}

namespace {

Var take_last_cols(Var z, std::size_t count) {
  std::vector<std::size_t> cols(count);
  for (std::size_t i = 0; i < count; ++i) cols[i] = z.cols() - count + i;
  const std::vector<int> signs(count, 1);
  return gather_cols_signed(z, cols, signs);
}

Layout flat_layout(const KennConfig& cfg) {
  Layout layout;
  for (const auto& atom : cfg.input_atoms) layout.push_back({atom.predicate, VarSlot::X});
  for (const auto& name : cfg.predicted) layout.push_back({name, VarSlot::X});
  return layout;
}

const KennConfig& validated(const KennConfig& cfg, const Knowledge& k) {
  if (cfg.base.layer_widths.empty() || cfg.base.layer_widths.back() != cfg.predicted.size()) {
    throw ValidationError("last layer width must equal the number of predicted predicates");
  }
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw ValidationError("epsilon must lie in (0, 0.5)");
  if (!k.binary.empty()) throw ValidationError("a flat model cannot use binary clauses");
  for (const auto& atom : cfg.input_atoms) {
    if (atom.feature_column >= cfg.base.input_width) {
      throw ValidationError("input atom '" + atom.predicate + "' refers to a missing feature column");
    }
    if (std::find(cfg.predicted.begin(), cfg.predicted.end(), atom.predicate) != cfg.predicted.end()) {
      throw ValidationError("input atom '" + atom.predicate + "' is also a predicted predicate");
    }
  }
  auto layout = flat_layout(cfg);
  for (std::size_t i = 0; i < layout.size(); ++i)
    for (std::size_t j = i + 1; j < layout.size(); ++j)
      if (layout[i] == layout[j]) throw ValidationError("predicate '" + layout[i].predicate + "' listed twice");
  return cfg;
}

std::vector<std::pair<std::string, double>> weights_of(const std::vector<const KnowledgeEnhancer*>& enhancers,
                                                       const ParameterSet& params) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto* ke : enhancers)
    for (const auto& ce : ke->clause_enhancers()) {
      const std::string text = serialize_clause(ce.clause());
      out.emplace_back(text.substr(text.find(':') + 1), ce.weight_value(params));
    }
  return out;
}

}  // namespace

KennModel::KennModel(KennConfig cfg, Knowledge knowledge)
    : cfg_(validated(cfg, knowledge)),
      knowledge_(std::move(knowledge)),
      base_(cfg_.base, params_),
      enhancer_(knowledge_.unary, flat_layout(cfg_), params_, "clause.") {}

Var KennModel::base_preactivations(std::span<const Var> bound, Var x) const { return base_.forward(bound, x); }

Var KennModel::preactivations(std::span<const Var> bound, Var x) const {
  Var z = base_.forward(bound, x);
  if (cfg_.input_atoms.empty()) return enhancer_.enhance(bound, z);
  const Matrix& features = x.value();
  Matrix atoms(features.rows(), cfg_.input_atoms.size());
  for (std::size_t r = 0; r < features.rows(); ++r)
    for (std::size_t k = 0; k < cfg_.input_atoms.size(); ++k) atoms(r, k) = features(r, cfg_.input_atoms[k].feature_column);
  Var zx = x.tape->constant(inject_input_atoms(atoms, cfg_.epsilon));
  Var enhanced = enhancer_.enhance(bound, concat_cols(zx, z));
  return take_last_cols(enhanced, cfg_.predicted.size());
}

Var KennModel::forward(std::span<const Var> bound, Var x) const { return apply_head(cfg_.head, preactivations(bound, x)); }

Matrix KennModel::predict(const Matrix& x) const {
  Tape tape;
  const auto bound = tape.bind(params_);
  return forward(bound, tape.constant(x)).value();
}

std::vector<std::pair<std::string, double>> KennModel::clause_weights() const {
  return weights_of({&enhancer_}, params_);
}

RelationalKennModel::RelationalKennModel(RelationalKennConfig cfg, Knowledge knowledge)
    : cfg_(std::move(cfg)), base_(cfg_.base, params_), enhancer_(knowledge, params_, "clause.", cfg_.clamped) {
  if (base_.output_width() != knowledge.schema.unary_names().size()) {
    throw ValidationError("last layer width must equal the number of unary predicates");
  }
}

Var RelationalKennModel::base_preactivations(std::span<const Var> bound, Var features) const {
  return base_.forward(bound, features);
}

RelationalEnhancer::Output RelationalKennModel::preactivations(std::span<const Var> bound, Var features,
                                                               const EdgeList& edges, Var binary) const {
  return enhancer_.forward(bound, base_.forward(bound, features), edges, binary);
}

Var RelationalKennModel::forward(std::span<const Var> bound, Var features, const EdgeList& edges, Var binary) const {
  return apply_head(cfg_.head, preactivations(bound, features, edges, binary).unary);
}

Matrix RelationalKennModel::predict(const Matrix& features, const EdgeList& edges, const Matrix& binary) const {
  Tape tape;
  const auto bound = tape.bind(params_);
  return forward(bound, tape.constant(features), edges, tape.constant(binary)).value();
}

std::vector<std::pair<std::string, double>> RelationalKennModel::clause_weights() const {
  return weights_of({&enhancer_.unary_enhancer(), &enhancer_.binary_enhancer()}, params_);
}

}  // namespace kenn
