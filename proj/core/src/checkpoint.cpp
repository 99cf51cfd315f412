#include "kenn/checkpoint.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"
#include "kenn/error.hpp"

namespace kenn {

namespace {

using Json = nlohmann::ordered_json;

Json mlp_json(const MlpConfig& cfg) {
  return Json{{"input_width", cfg.input_width}, {"layer_widths", cfg.layer_widths}, {"seed", cfg.seed}};
}

MlpConfig mlp_from(const Json& j) {
  MlpConfig cfg;
  cfg.input_width = j.at("input_width").get<std::size_t>();
  cfg.layer_widths = j.at("layer_widths").get<std::vector<std::size_t>>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

Json parameters_json(const ParameterSet& params) {
  Json list = Json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& m = params.value(i);
    list.push_back(Json{{"name", params.name(i)}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}});
  }
  return list;
}

void restore_parameters(ParameterSet& params, const Json& list) {
  if (list.size() != params.size()) throw ParseError("checkpoint parameter count does not match the model", 0, 0);
  for (const Json& entry : list) {
    const auto name = entry.at("name").get<std::string>();
    const auto id = params.find(name);
    if (!id) throw ParseError("checkpoint has unknown parameter '" + name + "'", 0, 0);
    Matrix m(entry.at("rows").get<std::size_t>(), entry.at("cols").get<std::size_t>(),
             entry.at("data").get<std::vector<double>>());
    if (!m.same_shape(params.value(*id))) throw ParseError("parameter '" + name + "' has the wrong shape", 0, 0);
    params.value(*id) = std::move(m);
  }
}

void write(std::ostream& out, const char* kind, Json config, const Knowledge& k, const ParameterSet& params,
           const CheckpointMeta& meta) {
  Json doc;
  doc["format"] = "kenn-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["kind"] = kind;
  doc["config"] = std::move(config);
  doc["schema"] = serialize_schema(k.schema);
  doc["knowledge"] = serialize_knowledge(k);
  doc["parameters"] = parameters_json(params);
  Json m = Json::object();
  for (const auto& [key, value] : meta) m[key] = value;
  doc["meta"] = std::move(m);
  out << doc.dump(1) << '\n';
}

}  // namespace

void save_checkpoint(std::ostream& out, const KennModel& model, const CheckpointMeta& meta) {
  const KennConfig& cfg = model.config();
  Json atoms = Json::array();
  for (const auto& a : cfg.input_atoms) atoms.push_back(Json{{"predicate", a.predicate}, {"feature_column", a.feature_column}});
  Json config{{"base", mlp_json(cfg.base)},
              {"head", head_name(cfg.head)},
              {"predicted", cfg.predicted},
              {"input_atoms", std::move(atoms)},
              {"epsilon", cfg.epsilon}};
  write(out, "flat", std::move(config), model.knowledge(), model.parameters(), meta);
}

void save_checkpoint(std::ostream& out, const RelationalKennModel& model, const CheckpointMeta& meta) {
  const RelationalKennConfig& cfg = model.config();
  Json config{{"base", mlp_json(cfg.base)}, {"head", head_name(cfg.head)}, {"clamped", cfg.clamped}};
  write(out, "relational", std::move(config), model.knowledge(), model.parameters(), meta);
}

LoadedCheckpoint load_checkpoint(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what(), 0, 0);
  }
  try {
    if (doc.at("format") != "kenn-checkpoint") throw ParseError("not a KENN checkpoint", 0, 0);
    if (doc.at("version") != kCheckpointVersion) {
      throw ParseError("unsupported checkpoint version " + doc.at("version").dump(), 0, 0);
    }
    const PredicateSchema schema = parse_schema(doc.at("schema").get<std::string>());
    Knowledge knowledge = parse_knowledge(doc.at("knowledge").get<std::string>(), schema);
    CheckpointMeta meta;
    for (const auto& [key, value] : doc.at("meta").items()) meta[key] = value.get<std::string>();
    const Json& config = doc.at("config");
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "flat") {
      KennConfig cfg;
      cfg.base = mlp_from(config.at("base"));
      cfg.head = parse_head(config.at("head").get<std::string>());
      cfg.predicted = config.at("predicted").get<std::vector<std::string>>();
      for (const Json& a : config.at("input_atoms")) {
        cfg.input_atoms.push_back({a.at("predicate").get<std::string>(), a.at("feature_column").get<std::size_t>()});
      }
      cfg.epsilon = config.at("epsilon").get<double>();
      KennModel model(std::move(cfg), std::move(knowledge));
      restore_parameters(model.parameters(), doc.at("parameters"));
      return {std::move(model), std::move(meta)};
    }
    if (kind == "relational") {
      RelationalKennConfig cfg;
      cfg.base = mlp_from(config.at("base"));
      cfg.head = parse_head(config.at("head").get<std::string>());
      cfg.clamped = config.at("clamped").get<std::vector<bool>>();
      RelationalKennModel model(std::move(cfg), std::move(knowledge));
      restore_parameters(model.parameters(), doc.at("parameters"));
      return {std::move(model), std::move(meta)};
    }
    throw ParseError("unknown model kind '" + kind + "'", 0, 0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what(), 0, 0);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("checkpoint describes an invalid model: ") + e.what(), 0, 0);
  }
}

}  // namespace kenn
