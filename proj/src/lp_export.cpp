#include <cstdio>
#include <sstream>

#include "msprp/errors.hpp"
#include "msprp/exact.hpp"

namespace msprp {

std::uint64_t subtour_rows_per_tour(int n) {
  if (n < 2) return 0;
  return (std::uint64_t{1} << n) - static_cast<std::uint64_t>(n) - 1;
}

namespace {

std::string fmt_coef(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Accumulates "+ c var" terms and wraps lines so no row gets too long.
class RowWriter {
 public:
  explicit RowWriter(std::ostream& os) : os_(os) {}

  void begin(const std::string& name) {
    os_ << " " << name << ":";
    terms_ = 0;
  }
  void term(double coef, const std::string& var) {
    if (terms_ > 0 && terms_ % 8 == 0) os_ << "\n   ";
    if (coef == 1.0) {
      os_ << (terms_ ? " + " : " ") << var;
    } else if (coef == -1.0) {
      os_ << (terms_ ? " - " : " -") << var;
    } else if (coef < 0) {
      os_ << (terms_ ? " - " : " -") << fmt_coef(-coef) << " " << var;
    } else {
      os_ << (terms_ ? " + " : " ") << fmt_coef(coef) << " " << var;
    }
    ++terms_;
  }
  void end(const char* sense, double rhs) { os_ << " " << sense << " " << fmt_coef(rhs) << "\n"; }
  int terms() const { return terms_; }

 private:
  std::ostream& os_;
  int terms_ = 0;
};

}  // namespace

std::string export_lp(const Instance& inst, LpStats* stats) {
  struct Storage {
    int location;
    int sku;
    int units;
  };
  std::vector<Storage> storage;
  for (int v = inst.num_stations(); v < inst.num_locations(); ++v) {
    for (int p = 0; p < inst.num_skus(); ++p) {
      if (inst.supply()(v, p) > 0) storage.push_back({v, p, inst.supply()(v, p)});
    }
  }
  const int ns = static_cast<int>(storage.size());
  if (ns > kMaxLpStorageLocations) {
    throw LimitError("export refused: " + std::to_string(ns) + " storage locations would need " +
                     std::to_string(subtour_rows_per_tour(ns)) + " subtour-elimination subsets per tour (limit " +
                     std::to_string(kMaxLpStorageLocations) + " storage locations)");
  }

  // Model nodes: stations 0..S-1, then storage locations S..S+n-1.
  const int nd = inst.num_stations();
  const int nodes = nd + ns;
  const int tours = num_agents(inst);
  auto loc_of = [&](int node) { return node < nd ? node : storage[node - nd].location; };
  auto dist = [&](int i, int j) { return inst.distance(loc_of(i), loc_of(j)); };
  auto x = [](int i, int j, int b) {
    return "x_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(b);
  };
  auto y = [](int k, int b) { return "y_" + std::to_string(k) + "_" + std::to_string(b); };

  LpStats st;
  st.locations = nodes;
  st.storage_locations = ns;
  st.tours = tours;

  std::ostringstream os;
  os << "\\ min-max mixed-shelves picker routing\n";
  os << "\\ stations " << nd << ", storage locations " << ns << ", tours " << tours << ", capacity "
     << inst.capacity() << "\n";
  for (int k = 0; k < ns; ++k) {
    os << "\\ node " << nd + k << ": location " << storage[k].location << " sku " << storage[k].sku << " units "
       << storage[k].units << "\n";
  }
  os << "Minimize\n obj: Z\nSubject To\n";
  RowWriter row(os);

  // Epigraph of the max over tours.
  for (int b = 0; b < tours; ++b) {
    row.begin("minmax_b" + std::to_string(b));
    row.term(1.0, "Z");
    for (int i = 0; i < nodes; ++i) {
      for (int j = 0; j < nodes; ++j) {
        if (i != j && dist(i, j) != 0.0) row.term(-dist(i, j), x(i, j, b));
      }
    }
    row.end(">=", 0);
    ++st.total_rows;
  }
  for (int b = 0; b < tours; ++b) {
    for (int i = 0; i < nodes; ++i) {
      row.begin("flow_b" + std::to_string(b) + "_n" + std::to_string(i));
      for (int j = 0; j < nodes; ++j) {
        if (j != i) row.term(1.0, x(i, j, b));
      }
      for (int j = 0; j < nodes; ++j) {
        if (j != i) row.term(-1.0, x(j, i, b));
      }
      row.end("=", 0);
      ++st.flow_rows;
      ++st.total_rows;
    }
  }
  for (int b = 0; b < tours; ++b) {
    for (int i = 0; i < nodes; ++i) {
      row.begin("visit_b" + std::to_string(b) + "_n" + std::to_string(i));
      for (int j = 0; j < nodes; ++j) {
        if (j != i) row.term(1.0, x(i, j, b));
      }
      row.end("<=", 1);
      ++st.total_rows;
    }
  }
  for (int b = 0; b < tours; ++b) {
    for (int k = nd; k < nodes; ++k) {
      row.begin("link_b" + std::to_string(b) + "_n" + std::to_string(k));
      for (int i = 0; i < nodes; ++i) {
        if (i != k) row.term(inst.capacity(), x(i, k, b));
      }
      row.term(-1.0, y(k, b));
      row.end(">=", 0);
      ++st.total_rows;
    }
  }
  for (int b = 0; b < tours; ++b) {
    row.begin("depart_b" + std::to_string(b));
    for (int h = 0; h < nd; ++h) {
      for (int k = nd; k < nodes; ++k) row.term(1.0, x(h, k, b));
    }
    row.end("=", 1);
    ++st.total_rows;
  }
  for (int b = 0; b < tours; ++b) {
    for (std::uint32_t subset = 1; subset < (1u << ns); ++subset) {
      const int size = __builtin_popcount(subset);
      if (size < 2) continue;
      char tag[16];
      std::snprintf(tag, sizeof tag, "%x", subset);
      row.begin("subtour_b" + std::to_string(b) + "_s" + tag);
      for (int i = 0; i < ns; ++i) {
        if (!(subset >> i & 1u)) continue;
        for (int j = 0; j < ns; ++j) {
          if (j != i && (subset >> j & 1u)) row.term(1.0, x(nd + i, nd + j, b));
        }
      }
      row.end("<=", size - 1);
      ++st.subtour_rows;
      ++st.total_rows;
    }
  }
  for (int b = 0; b < tours; ++b) {
    if (ns == 0) break;
    row.begin("capacity_b" + std::to_string(b));
    for (int k = nd; k < nodes; ++k) row.term(1.0, y(k, b));
    row.end("<=", inst.capacity());
    ++st.total_rows;
  }
  for (int p = 0; p < inst.num_skus(); ++p) {
    bool any = false;
    for (int k = 0; k < ns; ++k) any |= storage[k].sku == p;
    if (!any || tours == 0) continue;
    row.begin("demand_p" + std::to_string(p));
    for (int k = 0; k < ns; ++k) {
      if (storage[k].sku != p) continue;
      for (int b = 0; b < tours; ++b) row.term(1.0, y(nd + k, b));
    }
    row.end("=", inst.demand()[p]);
    ++st.total_rows;
  }
  for (int k = 0; k < ns && tours > 0; ++k) {
    row.begin("supply_n" + std::to_string(nd + k));
    for (int b = 0; b < tours; ++b) row.term(1.0, y(nd + k, b));
    row.end("<=", storage[k].units);
    ++st.total_rows;
  }

  os << "Bounds\n Z >= 0\n";
  for (int b = 0; b < tours; ++b) {
    for (int k = nd; k < nodes; ++k) os << " " << y(k, b) << " >= 0\n";
  }
  os << "Binaries\n";
  for (int b = 0; b < tours; ++b) {
    for (int i = 0; i < nodes; ++i) {
      for (int j = 0; j < nodes; ++j) {
        if (i != j) os << " " << x(i, j, b) << "\n";
      }
    }
  }
  os << "End\n";
  if (stats) *stats = st;
  return os.str();
}

}  // namespace msprp
