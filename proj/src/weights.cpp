#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "msprp/errors.hpp"
#include "msprp/neural.hpp"
#include "msprp/rng.hpp"
#include "msprp/util.hpp"

namespace msprp::neural {

void NeuralConfig::validate() const {
  if (embed_dim < 1 || heads < 1 || layers < 0) throw std::invalid_argument("invalid network dimensions");
  if (embed_dim % heads != 0) throw std::invalid_argument("embed_dim must be divisible by heads");
  if (!(clip > 0.0)) throw std::invalid_argument("logit clip scale must be positive");
}

NeuralConfig full_scale_config() { return {256, 8, 4, 10.0}; }

std::vector<TensorSpec> weight_manifest(const NeuralConfig& cfg) {
  cfg.validate();
  const int d = cfg.embed_dim;
  const int h = cfg.heads;
  std::vector<TensorSpec> out;
  auto add = [&](std::string name, std::vector<int> shape, std::string label, InitKind init, int fan_in) {
    out.push_back({std::move(name), std::move(shape), std::move(label), init, fan_in});
  };
  auto linear = [&](const std::string& name, int in, int outd, const std::string& label) {
    add(name + ".weight", {in, outd}, label + " weight", InitKind::FanIn, in);
    add(name + ".bias", {outd}, label + " bias", InitKind::FanIn, in);
  };
  auto attention = [&](const std::string& prefix, const std::string& where) {
    for (const char* part : {"wq", "wk", "wv", "wo"}) {
      const std::string sym = std::string(part) == "wq"   ? "W^Q"
                              : std::string(part) == "wk" ? "W^K"
                              : std::string(part) == "wv" ? "W^V"
                                                          : "W^O";
      add(prefix + "." + part, {d, d}, sym + " " + where, InitKind::FanIn, d);
    }
  };
  auto norm = [&](const std::string& prefix, const std::string& where) {
    add(prefix + ".gamma", {d}, "norm scale " + where, InitKind::Ones, 1);
    add(prefix + ".beta", {d}, "norm offset " + where, InitKind::Zeros, 1);
  };

  linear("input.station", kStationFeatures, d, "station projection");
  linear("input.shelf", kShelfFeatures, d, "shelf projection");
  linear("input.sku", kSkuFeatures, d, "SKU projection");

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string pre = "encoder." + std::to_string(l) + ".";
    const std::string at = "layer " + std::to_string(l);
    attention(pre + "self_loc", "self-attention locations " + at);
    attention(pre + "self_sku", "self-attention SKUs " + at);
    add(pre + "cross.wq", {d, d}, "W^Q " + at, InitKind::FanIn, d);
    add(pre + "cross.wk", {d, d}, "W^K " + at, InitKind::FanIn, d);
    add(pre + "cross.wv_loc", {d, d}, "W^V_V " + at, InitKind::FanIn, d);
    add(pre + "cross.wv_sku", {d, d}, "W^V_P " + at, InitKind::FanIn, d);
    add(pre + "cross.wo_loc", {d, d}, "cross output locations " + at, InitKind::FanIn, d);
    add(pre + "cross.wo_sku", {d, d}, "cross output SKUs " + at, InitKind::FanIn, d);
    for (const char* side : {"mix_loc", "mix_sku"}) {
      const std::string label = std::string(side) == "mix_loc" ? "MLP_V " + at : "MLP_P " + at;
      add(pre + side + ".w1", {h, 2, d}, label + " hidden weight", InitKind::FanIn, 2);
      add(pre + side + ".b1", {h, d}, label + " hidden bias", InitKind::FanIn, 2);
      add(pre + side + ".w2", {h, d}, label + " output weight", InitKind::FanIn, d);
      add(pre + side + ".b2", {h}, label + " output bias", InitKind::FanIn, d);
    }
    for (const char* n : {"norm_self_loc", "norm_self_sku", "norm_cross_loc", "norm_cross_sku", "norm_ff_loc",
                          "norm_ff_sku"}) {
      norm(pre + n, std::string(n) + " " + at);
    }
    for (const char* side : {"ff_loc", "ff_sku"}) {
      linear(pre + side + ".in", d, cfg.ff_dim(), std::string(side) + " " + at + " in");
      linear(pre + side + ".out", cfg.ff_dim(), d, std::string(side) + " " + at + " out");
    }
  }

  linear("agent.capacity", 1, d, "agent capacity projection");
  linear("agent.tour_length", 1, d, "agent tour-length projection");
  linear("agent.total_demand", 1, d, "agent total-demand projection");
  linear("agent.location", d, d, "agent location projection");
  linear("agent.sku_pool", d, d, "agent SKU-pool projection");
  linear("agent.mlp.in", 5 * d, d, "agent context MLP in");
  linear("agent.mlp.out", d, d, "agent context MLP out");
  attention("agent.mhsa", "agent self-attention");
  norm("agent.norm", "agent encoder");

  for (const char* sub : {"shelf", "sku"}) {
    const std::string pre = std::string("decoder.") + sub;
    attention(pre, std::string("decoder ") + sub);
    add(pre + ".wk_pointer", {d, d}, std::string("pointer W^K decoder ") + sub, InitKind::FanIn, d);
    add(pre + ".sentinel", {d}, std::string(sub == std::string("shelf") ? "STAY" : "DUMMY") + " embedding",
        InitKind::FanIn, d);
  }
  return out;
}

namespace {

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

std::string shape_text(const std::vector<int>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) out += (i ? "," : "") + std::to_string(shape[i]);
  return out + "]";
}

}  // namespace

WeightSet::WeightSet(NeuralConfig cfg, std::map<std::string, Tensor> tensors)
    : config_(cfg), tensors_(std::move(tensors)) {
  const auto manifest = weight_manifest(config_);
  if (manifest.size() != tensors_.size()) {
    for (const auto& [name, t] : tensors_) {
      bool known = false;
      for (const auto& spec : manifest) known |= spec.name == name;
      if (!known) throw ValidationError("unexpected tensor '" + name + "'");
    }
  }
  for (const auto& spec : manifest) {
    auto it = tensors_.find(spec.name);
    if (it == tensors_.end()) throw ValidationError("missing tensor " + spec.label + " (" + spec.name + ")");
    if (it->second.shape != spec.shape) {
      throw ValidationError("shape mismatch for " + spec.label + " (" + spec.name + "): expected " +
                            shape_text(spec.shape) + ", got " + shape_text(it->second.shape));
    }
    if (it->second.data.size() != element_count(spec.shape)) {
      throw ValidationError("element count mismatch for " + spec.label + " (" + spec.name + ")");
    }
  }
}

const Tensor& WeightSet::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("no tensor named '" + name + "'");
  return it->second;
}

WeightSet init_random(const NeuralConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::map<std::string, Tensor> tensors;
  for (const auto& spec : weight_manifest(cfg)) {
    Tensor t;
    t.shape = spec.shape;
    t.data.resize(element_count(spec.shape));
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
    for (auto& v : t.data) {
      switch (spec.init) {
        case InitKind::FanIn: v = static_cast<float>((2.0 * rng.uniform01() - 1.0) * bound); break;
        case InitKind::Ones: v = 1.0f; break;
        case InitKind::Zeros: v = 0.0f; break;
      }
    }
    tensors.emplace(spec.name, std::move(t));
  }
  return WeightSet(cfg, std::move(tensors));
}

namespace {

constexpr char kMagic[8] = {'M', 'A', 'H', 'A', 'M', 'W', '1', '\0'};

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>(v >> (8 * i) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>(v >> (8 * i) & 0xFF));
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw ParseError("weight file is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensors(const NeuralConfig& cfg, const std::vector<std::pair<std::string, Tensor>>& tensors) {
  ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(static_cast<std::uint32_t>(cfg.embed_dim));
  w.u32(static_cast<std::uint32_t>(cfg.heads));
  w.u32(static_cast<std::uint32_t>(cfg.layers));
  w.f32(static_cast<float>(cfg.clip));
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.raw(name.data(), name.size());
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (int dim : t.shape) w.u32(static_cast<std::uint32_t>(dim));
    w.u64(offset);
    offset += 4 * t.data.size();
  }
  for (const auto& [name, t] : tensors) {
    for (float f : t.data) w.f32(f);
  }
  return std::move(w.str());
}

std::string encode_weights(const WeightSet& weights) {
  std::vector<std::pair<std::string, Tensor>> ordered;
  for (const auto& spec : weight_manifest(weights.config())) ordered.emplace_back(spec.name, weights.at(spec.name));
  return encode_tensors(weights.config(), ordered);
}

WeightSet decode_weights(const std::string& bytes) {
  ByteReader r(bytes);
  if (r.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) throw ParseError("not a MAHAMW1 weight file");
  NeuralConfig cfg;
  cfg.embed_dim = static_cast<int>(r.u32());
  cfg.heads = static_cast<int>(r.u32());
  cfg.layers = static_cast<int>(r.u32());
  cfg.clip = r.f32();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid config block: ") + e.what());
  }
  const std::uint32_t count = r.u32();
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::uint64_t offset;
  };
  std::vector<Entry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    e.name = r.bytes(r.u32());
    const std::uint32_t ndim = r.u32();
    if (ndim > 8) throw ParseError("tensor '" + e.name + "' has too many dimensions");
    for (std::uint32_t k = 0; k < ndim; ++k) e.shape.push_back(static_cast<int>(r.u32()));
    e.offset = r.u64();
    entries.push_back(std::move(e));
  }
  const std::size_t payload = r.pos();

  const auto manifest = weight_manifest(cfg);
  std::map<std::string, Tensor> tensors;
  for (const auto& e : entries) {
    const TensorSpec* spec = nullptr;
    for (const auto& s : manifest) {
      if (s.name == e.name) spec = &s;
    }
    if (!spec) throw ValidationError("unexpected tensor '" + e.name + "' in weight file");
    if (e.shape != spec->shape) {
      throw ValidationError("shape mismatch for " + spec->label + " (" + e.name + "): expected " +
                            shape_text(spec->shape) + ", got " + shape_text(e.shape));
    }
    const std::size_t n = element_count(e.shape);
    if (payload + e.offset + 4 * n > bytes.size()) throw ParseError("tensor '" + e.name + "' runs past end of file");
    Tensor t;
    t.shape = e.shape;
    t.data.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint32_t u = 0;
      const std::size_t at = payload + e.offset + 4 * k;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
      t.data[k] = std::bit_cast<float>(u);
    }
    tensors.emplace(e.name, std::move(t));
  }
  return WeightSet(cfg, std::move(tensors));
}

void save_weights(const WeightSet& w, const std::string& path) { write_file_atomic(path, encode_weights(w)); }

WeightSet load_weights(const std::string& path) { return decode_weights(read_file(path)); }

}  // namespace msprp::neural
