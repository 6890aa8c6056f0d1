#include "msprp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "msprp/errors.hpp"
#include "msprp/rng.hpp"

namespace msprp {

namespace {

using nlohmann::json;

struct PresetFamily {
  const char* name;
  int shelves;
  std::vector<int> storage;
  std::vector<int> skus;
  std::vector<int> capacity;
};

const std::vector<PresetFamily>& families() {
  static const std::vector<PresetFamily> table = {
      {"msprp10", 10, {20, 20, 20}, {3, 6, 9}, {6, 9, 9}},
      {"msprp25", 25, {50, 50, 50}, {12, 15, 18}, {12, 12, 15}},
      {"msprp40", 40, {100, 100, 100}, {15, 20, 30}, {12, 15, 15}},
      {"msprp50", 50, {200, 500, 1000}, {100, 250, 500}, {15, 15, 15}},
  };
  return table;
}

std::vector<Point> draw_points(Rng& rng, int n) {
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.x = rng.uniform01();
    p.y = rng.uniform01();
  }
  return pts;
}

// Shelves on a near-square grid inside the unit square, stations spread along
// the bottom edge.
void grid_points(int num_stations, int num_shelves, std::vector<Point>& stations,
                 std::vector<Point>& shelves) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_shelves))));
  const int rows = (num_shelves + cols - 1) / cols;
  shelves.clear();
  for (int i = 0; i < num_shelves; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    shelves.push_back({(c + 0.5) / cols, (r + 1.0) / (rows + 1.0)});
  }
  stations.clear();
  for (int s = 0; s < num_stations; ++s) stations.push_back({(s + 0.5) / num_stations, 0.0});
}

int draw_mean_uniform(Rng& rng, double mean) {
  const auto hi = std::max<std::int64_t>(1, std::llround(2.0 * mean - 1.0));
  return static_cast<int>(rng.uniform_int(1, hi));
}

}  // namespace

Instance Instance::create(std::vector<Point> stations, std::vector<Point> shelves,
                          Matrix<int> supply, std::vector<int> demand, int capacity,
                          std::string id) {
  const std::size_t num_locations = stations.size() + shelves.size();
  if (stations.empty()) throw ValidationError("instance needs at least one packing station");
  if (capacity < 1) throw ValidationError("capacity must be >= 1, got " + std::to_string(capacity));
  if (supply.rows() != num_locations || supply.cols() != demand.size()) {
    std::ostringstream msg;
    msg << "supply must be " << num_locations << " x " << demand.size() << ", got " << supply.rows()
        << " x " << supply.cols();
    throw ValidationError(msg.str());
  }
  for (std::size_t v = 0; v < supply.rows(); ++v) {
    for (std::size_t p = 0; p < supply.cols(); ++p) {
      const int e = supply(v, p);
      if (e < 0) {
        throw ValidationError("supply[" + std::to_string(v) + "][" + std::to_string(p) +
                              "] is negative (" + std::to_string(e) + ")");
      }
      if (v < stations.size() && e != 0) {
        throw ValidationError("station row " + std::to_string(v) + " of supply must be zero");
      }
    }
  }
  for (std::size_t p = 0; p < demand.size(); ++p) {
    if (demand[p] < 0) throw ValidationError("demand[" + std::to_string(p) + "] is negative");
    long total = 0;
    for (std::size_t v = 0; v < num_locations; ++v) total += supply(v, p);
    if (demand[p] > total) {
      throw ValidationError("demand[" + std::to_string(p) + "] = " + std::to_string(demand[p]) +
                            " exceeds total supply " + std::to_string(total));
    }
  }
  for (const auto& pt : stations) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) throw ValidationError("non-finite coordinate");
  }
  for (const auto& pt : shelves) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) throw ValidationError("non-finite coordinate");
  }

  Instance inst;
  inst.stations_ = std::move(stations);
  inst.shelves_ = std::move(shelves);
  inst.supply_ = std::move(supply);
  inst.demand_ = std::move(demand);
  inst.capacity_ = capacity;
  inst.id_ = std::move(id);
  const int n = inst.num_locations();
  inst.distance_ = Matrix<double>(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Point a = inst.coord(i);
      const Point b = inst.coord(j);
      const double d = std::hypot(a.x - b.x, a.y - b.y);
      inst.distance_(i, j) = d;
      inst.distance_(j, i) = d;
    }
  }
  return inst;
}

Point Instance::coord(int location) const {
  return is_station(location) ? stations_[location] : shelves_[location - num_stations()];
}

int Instance::total_demand() const { return std::accumulate(demand_.begin(), demand_.end(), 0); }

int Instance::num_storage_locations() const {
  return static_cast<int>(std::count_if(supply_.data().begin(), supply_.data().end(),
                                        [](int e) { return e > 0; }));
}

int num_agents(const Instance& inst) {
  const int total = inst.total_demand();
  return (total + inst.capacity() - 1) / inst.capacity();
}

void GenParams::validate() const {
  if (num_shelves < 1 || num_skus < 1 || num_stations < 1 || num_storage_locations < 1) {
    throw std::invalid_argument("shelf, SKU, station and storage-location counts must be >= 1");
  }
  if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  if (static_cast<long>(num_storage_locations) > static_cast<long>(num_shelves) * num_skus) {
    throw std::invalid_argument("num_storage_locations (" + std::to_string(num_storage_locations) +
                                ") exceeds num_shelves * num_skus (" +
                                std::to_string(num_shelves * num_skus) + ")");
  }
  if (!(mean_supply >= 1.0) || !(mean_demand >= 1.0)) {
    throw std::invalid_argument("mean supply and mean demand must be >= 1");
  }
}

Instance generate(const GenParams& params) {
  params.validate();
  Rng rng(params.seed);

  std::vector<Point> stations;
  std::vector<Point> shelves;
  if (params.layout == Layout::Grid) {
    grid_points(params.num_stations, params.num_shelves, stations, shelves);
  } else {
    stations = draw_points(rng, params.num_stations);
    shelves = draw_points(rng, params.num_shelves);
  }

  // Partial Fisher-Yates over the shelf x SKU grid.
  const int grid = params.num_shelves * params.num_skus;
  std::vector<int> cells(static_cast<std::size_t>(grid));
  std::iota(cells.begin(), cells.end(), 0);
  for (int i = 0; i < params.num_storage_locations; ++i) {
    const auto j = static_cast<int>(rng.uniform_int(i, grid - 1));
    std::swap(cells[i], cells[j]);
  }
  std::sort(cells.begin(), cells.begin() + params.num_storage_locations);

  const int num_locations = params.num_stations + params.num_shelves;
  Matrix<int> supply(num_locations, params.num_skus, 0);
  for (int i = 0; i < params.num_storage_locations; ++i) {
    const int shelf = cells[i] / params.num_skus;
    const int sku = cells[i] % params.num_skus;
    supply(params.num_stations + shelf, sku) = draw_mean_uniform(rng, params.mean_supply);
  }

  std::vector<int> demand(static_cast<std::size_t>(params.num_skus));
  for (int p = 0; p < params.num_skus; ++p) {
    int total = 0;
    for (int v = 0; v < num_locations; ++v) total += supply(v, p);
    demand[p] = std::min(draw_mean_uniform(rng, params.mean_demand), total);
  }

  return Instance::create(std::move(stations), std::move(shelves), std::move(supply),
                          std::move(demand), params.capacity,
                          "seed" + std::to_string(params.seed));
}

GenParams preset(std::string_view name, int skus) {
  for (const auto& fam : families()) {
    if (name != fam.name) continue;
    std::size_t col = 0;
    if (skus != 0) {
      auto it = std::find(fam.skus.begin(), fam.skus.end(), skus);
      if (it == fam.skus.end()) {
        std::string allowed;
        for (int s : fam.skus) allowed += (allowed.empty() ? "" : ", ") + std::to_string(s);
        throw std::invalid_argument(std::string(name) + " supports SKU counts {" + allowed + "}");
      }
      col = static_cast<std::size_t>(it - fam.skus.begin());
    }
    GenParams p;
    p.num_shelves = fam.shelves;
    p.num_storage_locations = fam.storage[col];
    p.num_skus = fam.skus[col];
    p.capacity = fam.capacity[col];
    return p;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& fam : families()) names.emplace_back(fam.name);
  return names;
}

std::string serialize(const Instance& inst) {
  auto num = [](double x) { return json(x).dump(); };
  auto points = [&](const std::vector<Point>& pts) {
    std::string out = "[";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out += (i ? ", [" : "[") + num(pts[i].x) + ", " + num(pts[i].y) + "]";
    }
    return out + "]";
  };
  std::ostringstream os;
  os << "{\n";
  os << "  \"version\": " << json(std::string(kInstanceSchema)).dump() << ",\n";
  if (!inst.id().empty()) os << "  \"id\": " << json(inst.id()).dump() << ",\n";
  os << "  \"shelf_coords\": " << points(inst.shelves()) << ",\n";
  os << "  \"station_coords\": " << points(inst.stations()) << ",\n";
  os << "  \"supply\": [";
  const auto& supply = inst.supply();
  for (std::size_t v = 0; v < supply.rows(); ++v) {
    os << (v ? ",\n    [" : "\n    [");
    for (std::size_t p = 0; p < supply.cols(); ++p) os << (p ? ", " : "") << supply(v, p);
    os << "]";
  }
  os << "\n  ],\n";
  os << "  \"demand\": [";
  for (int p = 0; p < inst.num_skus(); ++p) os << (p ? ", " : "") << inst.demand()[p];
  os << "],\n";
  os << "  \"capacity\": " << inst.capacity() << "\n";
  os << "}\n";
  return os.str();
}

namespace {

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Line of the first occurrence of "key" in the raw text; 0 if absent.
int line_of_key(std::string_view text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string_view::npos ? 0 : line_of(text, pos);
}

const json& require(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ParseError("missing field '" + key + "'", key, 0);
  return doc.at(key);
}

std::vector<Point> parse_points(const json& node, std::string_view text, const std::string& key) {
  if (!node.is_array()) throw ParseError("field '" + key + "' must be an array", key, line_of_key(text, key));
  std::vector<Point> pts;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto& p = node[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError("field '" + key + "' entry " + std::to_string(i) + " must be [x, y]", key,
                       line_of_key(text, key));
    }
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

int parse_int(const json& node, std::string_view text, const std::string& key) {
  if (!node.is_number_integer()) {
    throw ParseError("field '" + key + "' must contain integers", key, line_of_key(text, key));
  }
  return node.get<int>();
}

}  // namespace

Instance deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed instance text: ") + e.what(), {},
                     line_of(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw ParseError("instance text must be an object", {}, 1);

  const auto& version = require(doc, "version");
  if (!version.is_string() || version.get<std::string>() != kInstanceSchema) {
    throw ParseError("unsupported schema version (expected \"" + std::string(kInstanceSchema) + "\")",
                     "version", line_of_key(text, "version"));
  }
  auto shelves = parse_points(require(doc, "shelf_coords"), text, "shelf_coords");
  auto stations = parse_points(require(doc, "station_coords"), text, "station_coords");

  const auto& demand_node = require(doc, "demand");
  if (!demand_node.is_array()) throw ParseError("field 'demand' must be an array", "demand", line_of_key(text, "demand"));
  std::vector<int> demand;
  for (const auto& d : demand_node) demand.push_back(parse_int(d, text, "demand"));

  const auto& supply_node = require(doc, "supply");
  if (!supply_node.is_array()) throw ParseError("field 'supply' must be an array", "supply", line_of_key(text, "supply"));
  Matrix<int> supply(supply_node.size(), demand.size(), 0);
  for (std::size_t v = 0; v < supply_node.size(); ++v) {
    const auto& row = supply_node[v];
    if (!row.is_array() || row.size() != demand.size()) {
      throw ParseError("supply row " + std::to_string(v) + " must have " + std::to_string(demand.size()) +
                           " entries",
                       "supply", line_of_key(text, "supply") + static_cast<int>(v) + 1);
    }
    for (std::size_t p = 0; p < demand.size(); ++p) supply(v, p) = parse_int(row[p], text, "supply");
  }

  const int capacity = parse_int(require(doc, "capacity"), text, "capacity");
  std::string id;
  if (doc.contains("id") && doc["id"].is_string()) id = doc["id"].get<std::string>();

  return Instance::create(std::move(stations), std::move(shelves), std::move(supply), std::move(demand),
                          capacity, std::move(id));
}

}  // namespace msprp
