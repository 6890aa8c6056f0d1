#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msprp/env.hpp"
#include "msprp/heuristic.hpp"
#include "msprp/select.hpp"

namespace msprp::neural {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct NeuralConfig {
  int embed_dim = 32;
  int heads = 4;
  int layers = 2;
  double clip = 10.0;

  int head_dim() const { return embed_dim / heads; }
  int ff_dim() const { return 4 * embed_dim; }
  // Throws std::invalid_argument.
  void validate() const;
  friend bool operator==(const NeuralConfig&, const NeuralConfig&) = default;
};

// Full-size architecture (embedding 256, 8 heads, 4 layers).
NeuralConfig full_scale_config();

inline constexpr int kStationFeatures = 4;
inline constexpr int kShelfFeatures = 4;
inline constexpr int kSkuFeatures = 3;

enum class InitKind { FanIn, Ones, Zeros };

struct TensorSpec {
  std::string name;
  std::vector<int> shape;
  std::string label;  // human-readable, used in error messages
  InitKind init = InitKind::FanIn;
  int fan_in = 1;
};

// Canonical list of every tensor for a configuration, in file order.
std::vector<TensorSpec> weight_manifest(const NeuralConfig& cfg);

struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Immutable after construction; shape-checked against the manifest.
class WeightSet {
 public:
  WeightSet(NeuralConfig cfg, std::map<std::string, Tensor> tensors);

  const NeuralConfig& config() const { return config_; }
  const Tensor& at(const std::string& name) const;
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  friend bool operator==(const WeightSet&, const WeightSet&) = default;

 private:
  NeuralConfig config_;
  std::map<std::string, Tensor> tensors_;
};

// Scaled-uniform U(-1/sqrt(fan_in), 1/sqrt(fan_in)); norm scales 1, offsets 0.
WeightSet init_random(const NeuralConfig& cfg, std::uint64_t seed);

// Binary weight file: "MAHAMW1\0", config block, manifest, little-endian f32
// payload.
std::string encode_weights(const WeightSet& w);
// Serializes arbitrary named tensors without checking them against the
// manifest (decode_weights does the checking).
std::string encode_tensors(const NeuralConfig& cfg, const std::vector<std::pair<std::string, Tensor>>& tensors);
WeightSet decode_weights(const std::string& bytes);
void save_weights(const WeightSet& w, const std::string& path);
WeightSet load_weights(const std::string& path);

// Raw per-entity features of a state.
struct Features {
  Mat station;  // S x 4: x, y, units loaded on agents homed here, agents homed here
  Mat shelf;    // R x 4: x, y, distinct SKUs stored, mean supply over stored SKUs
  Mat sku;      // P x 3: residual demand, shelves storing it, mean storage quantity
  Mat supply;   // |V| x P residual supply, station rows zero
  // Per agent: remaining capacity, current tour length, total residual demand.
  Mat agent;    // M x 3
  std::vector<int> agent_location;
};

Features extract_features(const State& s);

struct Embeddings {
  Mat locations;  // |V| x D, stations first
  Mat skus;       // |P| x D
  Mat agents;     // M x D
};

struct EncodeStats {
  int cross_score_products = 0;  // Q K^T products in cross-attention
  int self_score_products = 0;
};

// Capacity ranks, descending, ties by agent index.
std::vector<int> capacity_ranks(const std::vector<int>& capacity);
Mat rank_encoding(const std::vector<int>& ranks, int dim);

// Forward pass with weights converted to double once.
class Model {
 public:
  explicit Model(const WeightSet& weights);

  const NeuralConfig& config() const { return cfg_; }

  // Problem encoder: returns (H_V, H_P) in `out.locations` / `out.skus`.
  // Throws NumericError naming the layer when NaN/Inf appears.
  void encode(const Features& f, Embeddings& out, EncodeStats* stats = nullptr) const;
  Mat encode_agents(const Embeddings& problem, const Features& f) const;
  Embeddings embed(const State& s, EncodeStats* stats = nullptr) const;

  // M x (n + 1) logits; the last column comes from the subspace sentinel.
  LogitMatrix decode_logits(const Mat& agents, const Mat& keys, Subspace subspace) const;

 private:
  struct Linear {
    Mat w;  // in x out
    Vec b;  // out (may be empty)
    Mat operator()(const Mat& x) const;
  };
  struct Norm {
    Vec gamma, beta;
    Mat operator()(const Mat& x) const;
  };
  struct Attention {
    Mat wq, wk, wv, wo;
  };
  struct FeedForward {
    Linear in, out;
  };
  struct ScoreMlp {
    std::vector<Mat> w1;  // per head: 2 x D
    std::vector<Vec> b1;  // per head: D
    std::vector<Vec> w2;  // per head: D
    Vec b2;               // heads
  };
  struct Layer {
    Attention self_loc, self_sku;
    Mat cross_wq, cross_wk, cross_wv_loc, cross_wv_sku, cross_wo_loc, cross_wo_sku;
    ScoreMlp mix_loc, mix_sku;
    Norm norm_self_loc, norm_self_sku, norm_cross_loc, norm_cross_sku, norm_ff_loc, norm_ff_sku;
    FeedForward ff_loc, ff_sku;
  };
  struct Decoder {
    Attention glimpse;
    Mat wk_pointer;
    Vec sentinel;
  };

  Mat mha(const Attention& a, const Mat& queries, const Mat& keys, EncodeStats* stats) const;
  Mat feed_forward(const FeedForward& ff, const Mat& x) const;
  Mat fused_scores(const ScoreMlp& mlp, int head, const Mat& scores, const Mat& supply) const;

  NeuralConfig cfg_;
  Linear in_station_, in_shelf_, in_sku_;
  std::vector<Layer> layers_;
  Linear ctx_capacity_, ctx_length_, ctx_demand_, ctx_location_, ctx_pool_;
  Linear agent_mlp_in_, agent_mlp_out_;
  Attention agent_attention_;
  Norm agent_norm_;
  Decoder shelf_decoder_, sku_decoder_;
};

// Re-encodes the full state for both stages.
class NeuralPolicy : public Policy {
 public:
  NeuralPolicy(std::shared_ptr<const Model> model, std::string name = "neural")
      : model_(std::move(model)), name_(std::move(name)) {}

  std::string name() const override { return name_; }
  LogitMatrix shelf_logits(const State& s) const override;
  LogitMatrix sku_logits(const State& s_prime) const override;

 private:
  std::shared_ptr<const Model> model_;
  std::string name_;
};

Mat gelu(const Mat& x);
double gelu(double x);

}  // namespace msprp::neural
