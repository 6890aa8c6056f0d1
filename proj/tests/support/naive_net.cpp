#include "naive_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace naive {

using msprp::neural::Tensor;
using msprp::neural::WeightSet;

namespace {

Grid zeros(std::size_t r, std::size_t c) { return Grid(r, std::vector<double>(c, 0.0)); }

double at2(const Tensor& t, int r, int c) { return t.data[static_cast<std::size_t>(r) * t.shape[1] + c]; }

Grid matmul(const Grid& x, const Tensor& w) {
  const int in = w.shape[0], out = w.shape[1];
  Grid y = zeros(x.size(), out);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int j = 0; j < out; ++j) {
      double acc = 0.0;
      for (int k = 0; k < in; ++k) acc += x[i][k] * at2(w, k, j);
      y[i][j] = acc;
    }
  return y;
}

Grid linear(const WeightSet& w, const std::string& n, const Grid& x) {
  Grid y = matmul(x, w.at(n + ".weight"));
  const Tensor& b = w.at(n + ".bias");
  for (auto& row : y)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b.data[j];
  return y;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

Grid add(const Grid& a, const Grid& b) {
  Grid c = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) c[i][j] += b[i][j];
  return c;
}

Grid layer_norm(const WeightSet& w, const std::string& n, const Grid& x) {
  const Tensor& g = w.at(n + ".gamma");
  const Tensor& b = w.at(n + ".beta");
  Grid y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mean = 0.0;
    for (double v : x[i]) mean += v;
    mean /= static_cast<double>(x[i].size());
    double var = 0.0;
    for (double v : x[i]) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x[i].size());
    for (std::size_t j = 0; j < x[i].size(); ++j) y[i][j] = (x[i][j] - mean) / std::sqrt(var + 1e-5) * g.data[j] + b.data[j];
  }
  return y;
}

void softmax(std::vector<double>& row) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : row) hi = std::max(hi, v);
  double sum = 0.0;
  for (double& v : row) sum += (v = std::exp(v - hi));
  for (double& v : row) v /= sum;
}

Grid attention(const WeightSet& w, const std::string& n, const Grid& qin, const Grid& kin, int heads) {
  const Grid q = matmul(qin, w.at(n + ".wq"));
  const Grid k = matmul(kin, w.at(n + ".wk"));
  const Grid v = matmul(kin, w.at(n + ".wv"));
  const int d = static_cast<int>(q.empty() ? w.at(n + ".wq").shape[1] : q[0].size());
  const int dk = d / heads;
  Grid cat = zeros(qin.size(), d);
  for (int h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      std::vector<double> s(k.size());
      for (std::size_t j = 0; j < k.size(); ++j) {
        double acc = 0.0;
        for (int c = 0; c < dk; ++c) acc += q[i][h * dk + c] * k[j][h * dk + c];
        s[j] = acc / std::sqrt(static_cast<double>(dk));
      }
      softmax(s);
      for (int c = 0; c < dk; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k.size(); ++j) acc += s[j] * v[j][h * dk + c];
        cat[i][h * dk + c] = acc;
      }
    }
  }
  return matmul(cat, w.at(n + ".wo"));
}

double score_mlp(const WeightSet& w, const std::string& n, int h, double a, double e) {
  const Tensor& w1 = w.at(n + ".w1");
  const Tensor& b1 = w.at(n + ".b1");
  const Tensor& w2 = w.at(n + ".w2");
  const Tensor& b2 = w.at(n + ".b2");
  const int d = w1.shape[2];
  double out = b2.data[h];
  for (int k = 0; k < d; ++k) {
    const double z = a * w1.data[(h * 2 + 0) * d + k] + e * w1.data[(h * 2 + 1) * d + k] + b1.data[h * d + k];
    out += gelu(z) * w2.data[h * d + k];
  }
  return out;
}

Grid feed_forward(const WeightSet& w, const std::string& n, const Grid& x) {
  Grid hidden = linear(w, n + ".in", x);
  for (auto& row : hidden)
    for (double& v : row) v = gelu(v);
  return linear(w, n + ".out", hidden);
}

Grid decoder(const WeightSet& w, const std::string& n, const Grid& agents, Grid keys, double clip) {
  const Tensor& sentinel = w.at(n + ".sentinel");
  keys.emplace_back(sentinel.data.begin(), sentinel.data.end());
  const int heads = w.config().heads;
  const Grid glimpse = attention(w, n, agents, keys, heads);
  const Grid pointer = matmul(keys, w.at(n + ".wk_pointer"));
  const double d = static_cast<double>(w.config().embed_dim);
  Grid out = zeros(agents.size(), keys.size());
  for (std::size_t m = 0; m < agents.size(); ++m)
    for (std::size_t a = 0; a < keys.size(); ++a) {
      double acc = 0.0;
      for (std::size_t c = 0; c < pointer[a].size(); ++c) acc += glimpse[m][c] * pointer[a][c];
      out[m][a] = clip * std::tanh(acc / std::sqrt(d));
    }
  return out;
}

}  // namespace

Forward run(const WeightSet& w, const msprp::State& s) {
  const auto& cfg = w.config();
  const auto& inst = *s.inst;
  const int ns = inst.num_stations(), nv = inst.num_locations(), np = inst.num_skus(), M = s.num_agents();
  const int D = cfg.embed_dim, H = cfg.heads, dk = D / H;

  // Entity features.
  Grid station = zeros(ns, 4), shelf = zeros(nv - ns, 4), sku = zeros(np, 3);
  for (int h = 0; h < ns; ++h) {
    station[h][0] = inst.coord(h).x;
    station[h][1] = inst.coord(h).y;
  }
  for (int m = 0; m < M; ++m) {
    station[m % ns][2] += inst.capacity() - s.capacity[m];
    station[m % ns][3] += 1;
  }
  for (int v = ns; v < nv; ++v) {
    double n = 0, sum = 0;
    for (int p = 0; p < np; ++p)
      if (s.supply(v, p) > 0) n += 1, sum += s.supply(v, p);
    shelf[v - ns] = {inst.coord(v).x, inst.coord(v).y, n, n > 0 ? sum / n : 0.0};
  }
  for (int p = 0; p < np; ++p) {
    double n = 0, sum = 0;
    for (int v = ns; v < nv; ++v)
      if (s.supply(v, p) > 0) n += 1, sum += s.supply(v, p);
    sku[p] = {static_cast<double>(s.demand[p]), n, n > 0 ? sum / n : 0.0};
  }

  Grid hv = linear(w, "input.station", station);
  for (auto& row : linear(w, "input.shelf", shelf)) hv.push_back(row);
  Grid hp = linear(w, "input.sku", sku);

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    hv = layer_norm(w, p + "norm_self_loc", add(hv, attention(w, p + "self_loc", hv, hv, H)));
    hp = layer_norm(w, p + "norm_self_sku", add(hp, attention(w, p + "self_sku", hp, hp, H)));

    const Grid q = matmul(hv, w.at(p + "cross.wq"));
    const Grid k = matmul(hp, w.at(p + "cross.wk"));
    const Grid vloc = matmul(hv, w.at(p + "cross.wv_loc"));
    const Grid vsku = matmul(hp, w.at(p + "cross.wv_sku"));
    Grid uloc = zeros(nv, D), usku = zeros(np, D);
    for (int h = 0; h < H; ++h) {
      Grid a = zeros(nv, np);
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j < np; ++j) {
          double acc = 0.0;
          for (int c = 0; c < dk; ++c) acc += q[i][h * dk + c] * k[j][h * dk + c];
          a[i][j] = acc / std::sqrt(static_cast<double>(dk));
        }
      for (int i = 0; i < nv; ++i) {
        std::vector<double> row(np);
        for (int j = 0; j < np; ++j) row[j] = score_mlp(w, p + "mix_loc", h, a[i][j], s.supply(i, j));
        softmax(row);
        for (int c = 0; c < dk; ++c)
          for (int j = 0; j < np; ++j) uloc[i][h * dk + c] += row[j] * vsku[j][h * dk + c];
      }
      for (int j = 0; j < np; ++j) {
        std::vector<double> row(nv);
        for (int i = 0; i < nv; ++i) row[i] = score_mlp(w, p + "mix_sku", h, a[i][j], s.supply(i, j));
        softmax(row);
        for (int c = 0; c < dk; ++c)
          for (int i = 0; i < nv; ++i) usku[j][h * dk + c] += row[i] * vloc[i][h * dk + c];
      }
    }
    hv = layer_norm(w, p + "norm_cross_loc", add(hv, matmul(uloc, w.at(p + "cross.wo_loc"))));
    hp = layer_norm(w, p + "norm_cross_sku", add(hp, matmul(usku, w.at(p + "cross.wo_sku"))));
    hv = layer_norm(w, p + "norm_ff_loc", add(hv, feed_forward(w, p + "ff_loc", hv)));
    hp = layer_norm(w, p + "norm_ff_sku", add(hp, feed_forward(w, p + "ff_sku", hp)));
  }

  // Agents.
  std::vector<double> pool(D, 0.0);
  for (int j = 0; j < np; ++j)
    for (int c = 0; c < D; ++c) pool[c] += hp[j][c] / np;
  int total = 0;
  for (int d : s.demand) total += d;
  Grid ctx = zeros(M, 0);
  for (int m = 0; m < M; ++m) {
    auto append = [&](const Grid& g) { ctx[m].insert(ctx[m].end(), g[0].begin(), g[0].end()); };
    append(linear(w, "agent.capacity", Grid{{static_cast<double>(s.capacity[m])}}));
    append(linear(w, "agent.tour_length", Grid{{s.tour_length[m]}}));
    append(linear(w, "agent.total_demand", Grid{{static_cast<double>(total)}}));
    append(linear(w, "agent.location", Grid{hv[s.location[m]]}));
    append(linear(w, "agent.sku_pool", Grid{pool}));
  }
  Grid x = linear(w, "agent.mlp.in", ctx);
  for (auto& row : x)
    for (double& v : row) v = gelu(v);
  x = linear(w, "agent.mlp.out", x);
  for (int m = 0; m < M; ++m) {
    int rank = 0;
    for (int o = 0; o < M; ++o)
      if (s.capacity[o] > s.capacity[m] || (s.capacity[o] == s.capacity[m] && o < m)) ++rank;
    for (int c = 0; c < D; ++c) {
      const int pair = c / 2;
      const double angle = rank / std::pow(10000.0, 2.0 * pair / D);
      x[m][c] += c % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  Grid hm = layer_norm(w, "agent.norm", add(x, attention(w, "agent.mhsa", x, x, H)));

  Forward f;
  f.shelf_logits = decoder(w, "decoder.shelf", hm, hv, cfg.clip);
  f.sku_logits = decoder(w, "decoder.sku", hm, hp, cfg.clip);
  f.locations = std::move(hv);
  f.skus = std::move(hp);
  f.agents = std::move(hm);
  return f;
}

double max_abs_diff(const Grid& a, const msprp::neural::Mat& b) {
  if (static_cast<Eigen::Index>(a.size()) != b.rows()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (static_cast<Eigen::Index>(a[i].size()) != b.cols()) return std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a[i].size(); ++j)
      worst = std::max(worst, std::abs(a[i][j] - b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  }
  return worst;
}

double max_abs_diff(const Grid& a, const msprp::Matrix<double>& b) {
  if (a.size() != b.rows()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b.cols()) return std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b(i, j)));
  }
  return worst;
}

}  // namespace naive
