#include <sstream>

#include "json.hpp"

#include "msprp/errors.hpp"
#include "msprp/heuristic.hpp"

namespace msprp {

namespace {

using ojson = nlohmann::ordered_json;
constexpr const char* kSolutionSchema = "msprp-solution-v1";

ojson step_to_json(const StepRecord& rec) {
  ojson records = ojson::array();
  for (int m : rec.pick_order) {
    records.push_back({{"agent", m},
                       {"shelf", rec.locations[m]},
                       {"sku", rec.action.sku[m]},
                       {"quantity", rec.quantities[m]}});
  }
  ojson j;
  j["records"] = records;
  j["shelf_choice"] = rec.action.shelf;
  j["shelf_order"] = rec.shelf_order;
  j["shelf_drawn"] = rec.shelf_drawn;
  j["shelf_override"] = rec.shelf_override;
  j["sku_order"] = rec.sku_order;
  j["log_prob"] = rec.log_prob;
  return j;
}

template <typename T>
T get_field(const ojson& node, const char* key) {
  if (!node.contains(key)) throw ParseError(std::string("missing field '") + key + "'", key);
  try {
    return node.at(key).get<T>();
  } catch (const ojson::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type", key);
  }
}

}  // namespace

std::string write_solution(const Solution& sol) {
  std::ostringstream os;
  auto kv = [&](const char* key, const ojson& value, bool last = false) {
    os << "  \"" << key << "\": " << value.dump() << (last ? "\n" : ",\n");
  };
  os << "{\n";
  kv("version", kSolutionSchema);
  kv("instance_id", sol.instance_id);
  kv("objective", sol.objective);
  kv("total_distance", sol.total_distance);
  kv("log_prob", sol.log_prob);
  kv("meta", ojson{{"policy", sol.meta.policy},
                   {"decode", sol.meta.decode},
                   {"seed", sol.meta.seed},
                   {"samples", sol.meta.samples},
                   {"seconds", sol.meta.seconds}});
  os << "  \"tours\": [";
  for (std::size_t m = 0; m < sol.tours.size(); ++m) os << (m ? ",\n    " : "\n    ") << ojson(sol.tours[m]).dump();
  os << (sol.tours.empty() ? "],\n" : "\n  ],\n");
  os << "  \"steps\": [";
  for (std::size_t t = 0; t < sol.steps.size(); ++t) {
    os << (t ? ",\n    " : "\n    ") << step_to_json(sol.steps[t]).dump();
  }
  os << (sol.steps.empty() ? "]\n" : "\n  ]\n");
  os << "}\n";
  return os.str();
}

Solution read_solution(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("malformed solution text: ") + e.what());
  }
  if (get_field<std::string>(doc, "version") != kSolutionSchema) {
    throw ParseError("unsupported solution schema", "version");
  }
  Solution sol;
  if (doc.contains("instance_id")) sol.instance_id = get_field<std::string>(doc, "instance_id");
  sol.objective = get_field<double>(doc, "objective");
  sol.total_distance = doc.contains("total_distance") ? get_field<double>(doc, "total_distance") : 0.0;
  sol.log_prob = doc.contains("log_prob") ? get_field<double>(doc, "log_prob") : 0.0;
  if (doc.contains("meta")) {
    const auto& meta = doc["meta"];
    sol.meta.policy = meta.value("policy", "");
    sol.meta.decode = meta.value("decode", "");
    sol.meta.seed = meta.value("seed", std::uint64_t{0});
    sol.meta.samples = meta.value("samples", 1);
    sol.meta.seconds = meta.value("seconds", 0.0);
  }
  sol.tours = get_field<std::vector<std::vector<int>>>(doc, "tours");
  const auto steps = get_field<ojson>(doc, "steps");
  if (!steps.is_array()) throw ParseError("field 'steps' must be an array", "steps");
  const int agents = static_cast<int>(sol.tours.size());
  for (const auto& step : steps) {
    StepRecord rec;
    rec.locations.assign(agents, -1);
    rec.quantities.assign(agents, 0);
    rec.action.sku.assign(agents, -1);
    for (const auto& r : get_field<ojson>(step, "records")) {
      const int m = get_field<int>(r, "agent");
      if (m < 0 || m >= agents) throw ParseError("record agent out of range", "agent");
      rec.pick_order.push_back(m);
      rec.locations[m] = get_field<int>(r, "shelf");
      rec.action.sku[m] = get_field<int>(r, "sku");
      rec.quantities[m] = get_field<int>(r, "quantity");
    }
    if (step.contains("shelf_choice")) rec.action.shelf = get_field<std::vector<int>>(step, "shelf_choice");
    if (step.contains("shelf_order")) rec.shelf_order = get_field<std::vector<int>>(step, "shelf_order");
    if (step.contains("shelf_drawn")) rec.shelf_drawn = get_field<std::vector<int>>(step, "shelf_drawn");
    if (step.contains("shelf_override")) rec.shelf_override = get_field<int>(step, "shelf_override");
    if (step.contains("sku_order")) rec.sku_order = get_field<std::vector<int>>(step, "sku_order");
    if (step.contains("log_prob")) rec.log_prob = get_field<double>(step, "log_prob");
    sol.steps.push_back(std::move(rec));
  }
  return sol;
}

}  // namespace msprp
