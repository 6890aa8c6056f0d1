#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "msprp/matrix.hpp"

namespace msprp {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr std::string_view kInstanceSchema = "msprp-v1";

// Immutable problem data. Locations are indexed stations first, then shelves:
// location v < num_stations() is a packing station. Supply rows for stations
// are all zero.
class Instance {
 public:
  // Validates every invariant and derives the Euclidean distance matrix.
  // Throws ValidationError on violation.
  static Instance create(std::vector<Point> stations, std::vector<Point> shelves,
                         Matrix<int> supply, std::vector<int> demand, int capacity,
                         std::string id = {});

  int num_stations() const { return static_cast<int>(stations_.size()); }
  int num_shelves() const { return static_cast<int>(shelves_.size()); }
  int num_locations() const { return num_stations() + num_shelves(); }
  int num_skus() const { return static_cast<int>(demand_.size()); }
  bool is_station(int location) const { return location < num_stations(); }

  const std::vector<Point>& stations() const { return stations_; }
  const std::vector<Point>& shelves() const { return shelves_; }
  Point coord(int location) const;

  // |V| x |P|.
  const Matrix<int>& supply() const { return supply_; }
  const std::vector<int>& demand() const { return demand_; }
  int capacity() const { return capacity_; }
  int total_demand() const;

  double distance(int from, int to) const { return distance_(from, to); }
  const Matrix<double>& distances() const { return distance_; }

  // Agents are assigned to stations round-robin.
  int home_station(int agent) const { return agent % num_stations(); }

  // Count of (shelf, SKU) cells with positive supply.
  int num_storage_locations() const;

  const std::string& id() const { return id_; }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.stations_ == b.stations_ && a.shelves_ == b.shelves_ && a.supply_ == b.supply_ &&
           a.demand_ == b.demand_ && a.capacity_ == b.capacity_;
  }

 private:
  Instance() = default;

  std::vector<Point> stations_;
  std::vector<Point> shelves_;
  Matrix<int> supply_;
  std::vector<int> demand_;
  int capacity_ = 1;
  Matrix<double> distance_;
  std::string id_;
};

// ceil(total demand / capacity); zero for an empty order.
int num_agents(const Instance& inst);

enum class Layout { UnitSquare, Grid };

struct GenParams {
  int num_shelves = 10;
  int num_storage_locations = 20;
  int num_skus = 3;
  int capacity = 6;
  int num_stations = 1;
  double mean_supply = 4.0;
  double mean_demand = 5.0;
  std::uint64_t seed = 0;
  Layout layout = Layout::UnitSquare;

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

Instance generate(const GenParams& params);

// Warehouse families. `skus` selects the column of the family; 0 picks the
// smallest one. Throws std::invalid_argument for unknown names or SKU counts.
GenParams preset(std::string_view name, int skus = 0);
std::vector<std::string> preset_names();

std::string serialize(const Instance& inst);
// Throws ParseError (malformed text, missing/mistyped field) or
// ValidationError (invariant violation).
Instance deserialize(std::string_view text);

}  // namespace msprp
