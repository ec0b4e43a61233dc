#include <fstream>
#include <sstream>

#include "isac/error.hpp"
#include "isac/gating.hpp"
#include "json.hpp"

namespace isac {

namespace {

using nlohmann::json;

ExpertSpec parse_expert(const json& j) {
  ExpertSpec e;
  e.id = j.at("id").get<std::string>();
  e.feature_kind = parse_feature_kind(j.at("feature").get<std::string>());
  e.classifier_kind = parse_classifier_kind(j.at("classifier").get<std::string>());
  e.required_rate = j.at("required_rate").get<double>();
  if (j.contains("knn")) e.knn.k = j["knn"].value("k", e.knn.k);
  if (j.contains("svm")) {
    const auto& s = j["svm"];
    e.svm.epochs = s.value("epochs", e.svm.epochs);
    e.svm.step = s.value("step", e.svm.step);
    e.svm.decay = s.value("decay", e.svm.decay);
    e.svm.l2 = s.value("l2", e.svm.l2);
  }
  if (j.contains("forest")) {
    const auto& f = j["forest"];
    e.forest.num_trees = f.value("num_trees", e.forest.num_trees);
    e.forest.max_depth = f.value("max_depth", e.forest.max_depth);
    e.forest.bootstrap = f.value("bootstrap", e.forest.bootstrap);
  }
  return e;
}

}  // namespace

Registry parse_registry(std::string_view json_text) {
  Registry registry;
  try {
    const auto doc = json::parse(json_text);
    for (const auto& item : doc.at("experts")) registry.push_back(parse_expert(item));
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("registry config: ") + ex.what());
  }
  validate_registry(registry);
  return registry;
}

Registry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open registry config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_registry(buf.str());
}

std::string registry_to_json(const Registry& registry) {
  json experts = json::array();
  for (const auto& e : registry) {
    experts.push_back({
        {"id", e.id},
        {"feature", std::string(to_string(e.feature_kind))},
        {"classifier", std::string(to_string(e.classifier_kind))},
        {"required_rate", e.required_rate},
        {"knn", {{"k", e.knn.k}}},
        {"svm", {{"epochs", e.svm.epochs}, {"step", e.svm.step}, {"decay", e.svm.decay}, {"l2", e.svm.l2}}},
        {"forest",
         {{"num_trees", e.forest.num_trees}, {"max_depth", e.forest.max_depth}, {"bootstrap", e.forest.bootstrap}}},
    });
  }
  return json{{"experts", experts}}.dump(2) + "\n";
}

}  // namespace isac
