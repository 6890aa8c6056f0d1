#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msprp/errors.hpp"
#include "msprp/exact.hpp"
#include "msprp/heuristic.hpp"
#include "msprp/instance.hpp"
#include "msprp/neural.hpp"

namespace py = pybind11;
using namespace msprp;

namespace {

using InstancePtr = std::shared_ptr<Instance>;

std::shared_ptr<const Policy> policy_from(const std::string& spec) {
  if (spec == "greedy") return std::make_shared<GreedyPolicy>();
  const std::string random = "neural:random:";
  if (spec.rfind(random, 0) == 0) {
    const auto seed = std::stoull(spec.substr(random.size()));
    auto model = std::make_shared<const neural::Model>(neural::init_random(neural::NeuralConfig{}, seed));
    return std::make_shared<neural::NeuralPolicy>(model, spec);
  }
  const std::string path = "neural:";
  if (spec.rfind(path, 0) == 0) {
    auto model = std::make_shared<const neural::Model>(neural::load_weights(spec.substr(path.size())));
    return std::make_shared<neural::NeuralPolicy>(model, spec);
  }
  throw std::invalid_argument("unknown policy '" + spec + "'");
}

}  // namespace

PYBIND11_MODULE(_msprp, m) {
  m.doc() = "Min-max mixed-shelves picker routing toolkit";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<InfeasibleActionError>(m, "InfeasibleActionError", PyExc_ValueError);
  py::register_exception<LimitError>(m, "LimitError", PyExc_RuntimeError);

  py::class_<Instance, InstancePtr>(m, "Instance")
      .def_static("from_json", [](const std::string& text) { return std::make_shared<Instance>(deserialize(text)); })
      .def("to_json", [](const Instance& i) { return serialize(i); })
      .def_property_readonly("id", &Instance::id)
      .def_property_readonly("num_stations", &Instance::num_stations)
      .def_property_readonly("num_shelves", &Instance::num_shelves)
      .def_property_readonly("num_skus", &Instance::num_skus)
      .def_property_readonly("capacity", &Instance::capacity)
      .def_property_readonly("demand", &Instance::demand)
      .def_property_readonly("num_agents", [](const Instance& i) { return num_agents(i); })
      .def_property_readonly("num_storage_locations", &Instance::num_storage_locations)
      .def("distance", &Instance::distance);

  m.def(
      "generate",
      [](const std::string& preset_name, int skus, std::uint64_t seed) {
        GenParams p = preset(preset_name, skus);
        p.seed = seed;
        return std::make_shared<Instance>(generate(p));
      },
      py::arg("preset"), py::arg("skus") = 0, py::arg("seed") = 0);
  m.def(
      "generate_custom",
      [](int shelves, int storage, int skus, int capacity, double mean_supply, double mean_demand, int stations,
         std::uint64_t seed) {
        GenParams p;
        p.num_shelves = shelves;
        p.num_storage_locations = storage;
        p.num_skus = skus;
        p.capacity = capacity;
        p.mean_supply = mean_supply;
        p.mean_demand = mean_demand;
        p.num_stations = stations;
        p.seed = seed;
        return std::make_shared<Instance>(generate(p));
      },
      py::arg("shelves"), py::arg("storage"), py::arg("skus"), py::arg("capacity"), py::arg("mean_supply") = 4.0,
      py::arg("mean_demand") = 5.0, py::arg("stations") = 1, py::arg("seed") = 0);
  m.def("presets", &preset_names);

  py::class_<Solution>(m, "Solution")
      .def_readonly("instance_id", &Solution::instance_id)
      .def_readonly("objective", &Solution::objective)
      .def_readonly("total_distance", &Solution::total_distance)
      .def_readonly("tours", &Solution::tours)
      .def_property_readonly("num_steps", [](const Solution& s) { return s.steps.size(); })
      .def("to_json", [](const Solution& s) { return write_solution(s); })
      .def_static("from_json", [](const std::string& text) { return read_solution(text); });

  m.def(
      "solve",
      [](InstancePtr inst, const std::string& policy, int samples, const std::string& mode, double beta,
         std::uint64_t seed) {
        const auto p = policy_from(policy);
        DecodeConfig dc;
        dc.temperature = beta;
        dc.mode = mode == "greedy" ? DecodeMode::Greedy : DecodeMode::Sample;
        dc.seed = seed;
        py::gil_scoped_release release;
        return dc.mode == DecodeMode::Greedy ? rollout(*p, inst, dc) : sample_best(*p, inst, samples, dc);
      },
      py::arg("instance"), py::arg("policy") = "greedy", py::arg("samples") = 1, py::arg("mode") = "sample",
      py::arg("beta") = 1.0, py::arg("seed") = 0);

  m.def(
      "validate",
      [](const Instance& inst, const Solution& sol) {
        py::dict out;
        for (const auto& c : validate(inst, sol).checks) out[py::str(c.name)] = py::make_tuple(c.passed, c.detail);
        return out;
      },
      py::arg("instance"), py::arg("solution"));

  m.def("export_lp", [](const Instance& inst) { return export_lp(inst); }, py::arg("instance"));

  m.def(
      "brute_force",
      [](InstancePtr inst, bool prune) {
        py::gil_scoped_release release;
        return brute_force(inst, {}, {prune}).solution;
      },
      py::arg("instance"), py::arg("prune") = true);

  m.def(
      "save_random_weights",
      [](const std::string& path, std::uint64_t seed, int embed_dim, int heads, int layers) {
        neural::NeuralConfig cfg;
        cfg.embed_dim = embed_dim;
        cfg.heads = heads;
        cfg.layers = layers;
        neural::save_weights(neural::init_random(cfg, seed), path);
      },
      py::arg("path"), py::arg("seed"), py::arg("embed_dim") = 32, py::arg("heads") = 4, py::arg("layers") = 2);
}
