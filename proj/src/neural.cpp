#include "msprp/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msprp/errors.hpp"

namespace msprp::neural {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Mat gelu(const Mat& x) { return x.unaryExpr([](double v) { return gelu(v); }); }

namespace {

Mat to_matrix(const Tensor& t) {
  const int rows = t.shape.size() == 2 ? t.shape[0] : 1;
  const int cols = t.shape.size() == 2 ? t.shape[1] : t.shape[0];
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = t.data[static_cast<std::size_t>(r) * cols + c];
  return m;
}

Vec to_vector(const Tensor& t) {
  Vec v(static_cast<Eigen::Index>(t.data.size()));
  for (std::size_t i = 0; i < t.data.size(); ++i) v(static_cast<Eigen::Index>(i)) = t.data[i];
  return v;
}

void softmax_rows(Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double hi = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - hi).exp();
    m.row(r) /= m.row(r).sum();
  }
}

void check_finite(const Mat& m, const std::string& where) {
  if (!m.allFinite()) throw NumericError("non-finite value after " + where);
}

}  // namespace

Mat Model::Linear::operator()(const Mat& x) const {
  Mat y = x * w;
  if (b.size() > 0) y.rowwise() += b.transpose();
  return y;
}

Mat Model::Norm::operator()(const Mat& x) const {
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    y.row(r) = ((x.row(r).array() - mean) * inv * gamma.transpose().array() + beta.transpose().array()).matrix();
  }
  return y;
}

Model::Model(const WeightSet& weights) : cfg_(weights.config()) {
  auto mat = [&](const std::string& n) { return to_matrix(weights.at(n)); };
  auto vec = [&](const std::string& n) { return to_vector(weights.at(n)); };
  auto linear = [&](const std::string& n) { return Linear{mat(n + ".weight"), vec(n + ".bias")}; };
  auto attention = [&](const std::string& n) {
    return Attention{mat(n + ".wq"), mat(n + ".wk"), mat(n + ".wv"), mat(n + ".wo")};
  };
  auto norm = [&](const std::string& n) { return Norm{vec(n + ".gamma"), vec(n + ".beta")}; };
  auto score_mlp = [&](const std::string& n) {
    ScoreMlp s;
    const int d = cfg_.embed_dim;
    const Tensor& w1 = weights.at(n + ".w1");
    const Tensor& b1 = weights.at(n + ".b1");
    const Tensor& w2 = weights.at(n + ".w2");
    for (int h = 0; h < cfg_.heads; ++h) {
      Mat a(2, d);
      Vec bb(d), ww(d);
      for (int k = 0; k < d; ++k) {
        a(0, k) = w1.data[(static_cast<std::size_t>(h) * 2 + 0) * d + k];
        a(1, k) = w1.data[(static_cast<std::size_t>(h) * 2 + 1) * d + k];
        bb(k) = b1.data[static_cast<std::size_t>(h) * d + k];
        ww(k) = w2.data[static_cast<std::size_t>(h) * d + k];
      }
      s.w1.push_back(a);
      s.b1.push_back(bb);
      s.w2.push_back(ww);
    }
    s.b2 = vec(n + ".b2");
    return s;
  };

  in_station_ = linear("input.station");
  in_shelf_ = linear("input.shelf");
  in_sku_ = linear("input.sku");
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    Layer layer;
    layer.self_loc = attention(p + "self_loc");
    layer.self_sku = attention(p + "self_sku");
    layer.cross_wq = mat(p + "cross.wq");
    layer.cross_wk = mat(p + "cross.wk");
    layer.cross_wv_loc = mat(p + "cross.wv_loc");
    layer.cross_wv_sku = mat(p + "cross.wv_sku");
    layer.cross_wo_loc = mat(p + "cross.wo_loc");
    layer.cross_wo_sku = mat(p + "cross.wo_sku");
    layer.mix_loc = score_mlp(p + "mix_loc");
    layer.mix_sku = score_mlp(p + "mix_sku");
    layer.norm_self_loc = norm(p + "norm_self_loc");
    layer.norm_self_sku = norm(p + "norm_self_sku");
    layer.norm_cross_loc = norm(p + "norm_cross_loc");
    layer.norm_cross_sku = norm(p + "norm_cross_sku");
    layer.norm_ff_loc = norm(p + "norm_ff_loc");
    layer.norm_ff_sku = norm(p + "norm_ff_sku");
    layer.ff_loc = {linear(p + "ff_loc.in"), linear(p + "ff_loc.out")};
    layer.ff_sku = {linear(p + "ff_sku.in"), linear(p + "ff_sku.out")};
    layers_.push_back(std::move(layer));
  }
  ctx_capacity_ = linear("agent.capacity");
  ctx_length_ = linear("agent.tour_length");
  ctx_demand_ = linear("agent.total_demand");
  ctx_location_ = linear("agent.location");
  ctx_pool_ = linear("agent.sku_pool");
  agent_mlp_in_ = linear("agent.mlp.in");
  agent_mlp_out_ = linear("agent.mlp.out");
  agent_attention_ = attention("agent.mhsa");
  agent_norm_ = norm("agent.norm");
  for (const char* sub : {"shelf", "sku"}) {
    const std::string p = std::string("decoder.") + sub;
    Decoder dec{attention(p), mat(p + ".wk_pointer"), vec(p + ".sentinel")};
    (std::string(sub) == "shelf" ? shelf_decoder_ : sku_decoder_) = std::move(dec);
  }
}

Mat Model::mha(const Attention& a, const Mat& queries, const Mat& keys, EncodeStats* stats) const {
  const int dk = cfg_.head_dim();
  const Mat q = queries * a.wq;
  const Mat k = keys * a.wk;
  const Mat v = keys * a.wv;
  Mat heads(queries.rows(), cfg_.embed_dim);
  for (int h = 0; h < cfg_.heads; ++h) {
    Mat scores = q.middleCols(h * dk, dk) * k.middleCols(h * dk, dk).transpose() / std::sqrt(double(dk));
    if (stats) ++stats->self_score_products;
    softmax_rows(scores);
    heads.middleCols(h * dk, dk) = scores * v.middleCols(h * dk, dk);
  }
  return heads * a.wo;
}

Mat Model::feed_forward(const FeedForward& ff, const Mat& x) const { return ff.out(gelu(ff.in(x))); }

Mat Model::fused_scores(const ScoreMlp& mlp, int head, const Mat& scores, const Mat& supply) const {
  Mat out(scores.rows(), scores.cols());
  const Mat& w1 = mlp.w1[head];
  const Vec& b1 = mlp.b1[head];
  const Vec& w2 = mlp.w2[head];
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      const Vec hidden = (scores(r, c) * w1.row(0).transpose() + supply(r, c) * w1.row(1).transpose() + b1)
                             .unaryExpr([](double v) { return gelu(v); });
      out(r, c) = hidden.dot(w2) + mlp.b2(head);
    }
  }
  return out;
}

void Model::encode(const Features& f, Embeddings& out, EncodeStats* stats) const {
  const int d = cfg_.embed_dim;
  const int dk = cfg_.head_dim();
  const Eigen::Index nv = f.station.rows() + f.shelf.rows();
  const Eigen::Index np = f.sku.rows();
  if (f.supply.rows() != nv || f.supply.cols() != np) throw std::invalid_argument("supply shape mismatch");

  Mat hv(nv, d);
  if (f.station.rows() > 0) hv.topRows(f.station.rows()) = in_station_(f.station);
  if (f.shelf.rows() > 0) hv.bottomRows(f.shelf.rows()) = in_shelf_(f.shelf);
  Mat hp = in_sku_(f.sku);
  check_finite(hv, "input projection");
  check_finite(hp, "input projection");

  for (int l = 0; l < cfg_.layers; ++l) {
    const Layer& L = layers_[static_cast<std::size_t>(l)];
    hv = L.norm_self_loc(hv + mha(L.self_loc, hv, hv, stats));
    hp = L.norm_self_sku(hp + mha(L.self_sku, hp, hp, stats));

    const Mat q = hv * L.cross_wq;
    const Mat k = hp * L.cross_wk;
    const Mat v_loc = hv * L.cross_wv_loc;
    const Mat v_sku = hp * L.cross_wv_sku;
    Mat loc_update(nv, d), sku_update(np, d);
    for (int h = 0; h < cfg_.heads; ++h) {
      const Mat a = q.middleCols(h * dk, dk) * k.middleCols(h * dk, dk).transpose() / std::sqrt(double(dk));
      if (stats) ++stats->cross_score_products;
      Mat to_loc = fused_scores(L.mix_loc, h, a, f.supply);
      Mat to_sku = fused_scores(L.mix_sku, h, a.transpose(), f.supply.transpose());
      softmax_rows(to_loc);
      softmax_rows(to_sku);
      loc_update.middleCols(h * dk, dk) = to_loc * v_sku.middleCols(h * dk, dk);
      sku_update.middleCols(h * dk, dk) = to_sku * v_loc.middleCols(h * dk, dk);
    }
    hv = L.norm_cross_loc(hv + loc_update * L.cross_wo_loc);
    hp = L.norm_cross_sku(hp + sku_update * L.cross_wo_sku);

    hv = L.norm_ff_loc(hv + feed_forward(L.ff_loc, hv));
    hp = L.norm_ff_sku(hp + feed_forward(L.ff_sku, hp));
    check_finite(hv, "encoder layer " + std::to_string(l));
    check_finite(hp, "encoder layer " + std::to_string(l));
  }
  out.locations = std::move(hv);
  out.skus = std::move(hp);
}

std::vector<int> capacity_ranks(const std::vector<int>& capacity) {
  std::vector<int> order(capacity.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return capacity[a] > capacity[b]; });
  std::vector<int> rank(capacity.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  return rank;
}

Mat rank_encoding(const std::vector<int>& ranks, int dim) {
  Mat pe(static_cast<Eigen::Index>(ranks.size()), dim);
  for (std::size_t m = 0; m < ranks.size(); ++m) {
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / dim);
      const double angle = ranks[m] * freq;
      pe(static_cast<Eigen::Index>(m), i) = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Mat Model::encode_agents(const Embeddings& problem, const Features& f) const {
  const int d = cfg_.embed_dim;
  const Eigen::Index m = f.agent.rows();
  if (m == 0) return Mat(0, d);
  Mat loc(m, d);
  for (Eigen::Index i = 0; i < m; ++i) loc.row(i) = problem.locations.row(f.agent_location[static_cast<std::size_t>(i)]);
  Mat pool(m, d);
  const Eigen::RowVectorXd mean =
      problem.skus.rows() > 0 ? Eigen::RowVectorXd(problem.skus.colwise().mean()) : Eigen::RowVectorXd::Zero(d);
  pool.rowwise() = mean;

  Mat ctx(m, 5 * d);
  ctx.middleCols(0, d) = ctx_capacity_(f.agent.col(0));
  ctx.middleCols(d, d) = ctx_length_(f.agent.col(1));
  ctx.middleCols(2 * d, d) = ctx_demand_(f.agent.col(2));
  ctx.middleCols(3 * d, d) = ctx_location_(loc);
  ctx.middleCols(4 * d, d) = ctx_pool_(pool);
  Mat x = agent_mlp_out_(gelu(agent_mlp_in_(ctx)));

  std::vector<int> capacity(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) capacity[static_cast<std::size_t>(i)] = static_cast<int>(f.agent(i, 0));
  x += rank_encoding(capacity_ranks(capacity), d);
  x = agent_norm_(x + mha(agent_attention_, x, x, nullptr));
  check_finite(x, "agent encoder");
  return x;
}

Features extract_features(const State& s) {
  const Instance& inst = *s.inst;
  const int ns = inst.num_stations();
  const int nr = inst.num_shelves();
  const int np = inst.num_skus();
  Features f;
  f.station = Mat::Zero(ns, kStationFeatures);
  f.shelf = Mat::Zero(nr, kShelfFeatures);
  f.sku = Mat::Zero(np, kSkuFeatures);
  f.supply = Mat::Zero(inst.num_locations(), np);
  for (int v = 0; v < inst.num_locations(); ++v)
    for (int p = 0; p < np; ++p) f.supply(v, p) = s.supply(v, p);

  for (int h = 0; h < ns; ++h) {
    f.station(h, 0) = inst.stations()[h].x;
    f.station(h, 1) = inst.stations()[h].y;
  }
  for (int m = 0; m < s.num_agents(); ++m) {
    const int home = inst.home_station(m);
    f.station(home, 2) += inst.capacity() - s.capacity[m];
    f.station(home, 3) += 1.0;
  }
  for (int r = 0; r < nr; ++r) {
    const int v = ns + r;
    int count = 0;
    double sum = 0.0;
    for (int p = 0; p < np; ++p) {
      if (s.supply(v, p) > 0) {
        ++count;
        sum += s.supply(v, p);
      }
    }
    f.shelf(r, 0) = inst.shelves()[r].x;
    f.shelf(r, 1) = inst.shelves()[r].y;
    f.shelf(r, 2) = count;
    f.shelf(r, 3) = count ? sum / count : 0.0;
  }
  for (int p = 0; p < np; ++p) {
    int count = 0;
    double sum = 0.0;
    for (int v = ns; v < inst.num_locations(); ++v) {
      if (s.supply(v, p) > 0) {
        ++count;
        sum += s.supply(v, p);
      }
    }
    f.sku(p, 0) = s.demand[p];
    f.sku(p, 1) = count;
    f.sku(p, 2) = count ? sum / count : 0.0;
  }
  const int total = s.total_demand();
  f.agent = Mat::Zero(s.num_agents(), 3);
  for (int m = 0; m < s.num_agents(); ++m) {
    f.agent(m, 0) = s.capacity[m];
    f.agent(m, 1) = s.tour_length[m];
    f.agent(m, 2) = total;
  }
  f.agent_location = s.location;
  return f;
}

Embeddings Model::embed(const State& s, EncodeStats* stats) const {
  const Features f = extract_features(s);
  Embeddings e;
  encode(f, e, stats);
  e.agents = encode_agents(e, f);
  return e;
}

LogitMatrix Model::decode_logits(const Mat& agents, const Mat& keys, Subspace subspace) const {
  const Decoder& dec = subspace == Subspace::Shelf ? shelf_decoder_ : sku_decoder_;
  const int d = cfg_.embed_dim;
  Mat all(keys.rows() + 1, d);
  all.topRows(keys.rows()) = keys;
  all.row(keys.rows()) = dec.sentinel.transpose();
  const Mat glimpse = mha(dec.glimpse, agents, all, nullptr);
  const Mat pointer = all * dec.wk_pointer;
  const Mat raw = glimpse * pointer.transpose() / std::sqrt(double(d));
  LogitMatrix out;
  out.subspace = subspace;
  out.values = Matrix<double>(static_cast<int>(agents.rows()), static_cast<int>(all.rows()));
  for (Eigen::Index m = 0; m < raw.rows(); ++m)
    for (Eigen::Index a = 0; a < raw.cols(); ++a)
      out.values(static_cast<int>(m), static_cast<int>(a)) = cfg_.clip * std::tanh(raw(m, a));
  for (double v : out.values.data())
    if (!std::isfinite(v)) throw NumericError("non-finite value after decoder");
  return out;
}

LogitMatrix NeuralPolicy::shelf_logits(const State& s) const {
  const Embeddings e = model_->embed(s);
  return model_->decode_logits(e.agents, e.locations, Subspace::Shelf);
}

LogitMatrix NeuralPolicy::sku_logits(const State& s_prime) const {
  const Embeddings e = model_->embed(s_prime);
  return model_->decode_logits(e.agents, e.skus, Subspace::Sku);
}

}  // namespace msprp::neural
