#include "mobcl/model/net.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mobcl {

namespace {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_prime(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

constexpr double kLnEps = 1e-8;

struct LnCache {
  Matrix xhat;
  Vector inv_std;
};

Matrix layer_norm(const Matrix& x, const Matrix& g, const Matrix& b,
                  LnCache& cache) {
  const auto rows = x.rows();
  const auto cols = x.cols();
  cache.xhat.resize(rows, cols);
  cache.inv_std.resize(rows);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double mean = x.row(i).mean();
    double var = (x.row(i).array() - mean).square().mean();
    double inv_std = 1.0 / std::sqrt(var + kLnEps);
    cache.inv_std(i) = inv_std;
    cache.xhat.row(i) = (x.row(i).array() - mean) * inv_std;
    out.row(i) =
        cache.xhat.row(i).cwiseProduct(g.row(0)) + b.row(0);
  }
  return out;
}

Matrix layer_norm_backward(const Matrix& dy, const LnCache& cache,
                           const Tensor& g, Tensor& g_param, Tensor& b_param) {
  const auto rows = dy.rows();
  const auto cols = dy.cols();
  Matrix dx(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(g.value.row(0));
    double m1 = dxhat.mean();
    double m2 = dxhat.cwiseProduct(cache.xhat.row(i)).mean();
    dx.row(i) = cache.inv_std(i) *
                (dxhat.array() - m1 - cache.xhat.row(i).array() * m2);
    g_param.grad.row(0) += dy.row(i).cwiseProduct(cache.xhat.row(i));
    b_param.grad.row(0) += dy.row(i);
  }
  return dx;
}

struct AttnCache {
  Matrix in;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head [T x T]
  Matrix concat;              // [T x E]
};

Matrix softmax_rows(const Matrix& scores) {
  Matrix probs(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    double mx = scores.row(i).maxCoeff();
    Eigen::RowVectorXd e = (scores.row(i).array() - mx).exp();
    probs.row(i) = e / e.sum();
  }
  return probs;
}

struct AttnParams {
  Tensor& wq;
  Tensor& bq;
  Tensor& wk;
  Tensor& bk;
  Tensor& wv;
  Tensor& bv;
  Tensor& wo;
  Tensor& bo;
};

Matrix mhsa_forward(const Matrix& in, int num_heads, const AttnParams& p,
                    AttnCache& cache) {
  const auto t = in.rows();
  const auto e = in.cols();
  const auto dh = e / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.in = in;
  cache.q = (in * p.wq.value).rowwise() + p.bq.value.row(0);
  cache.k = (in * p.wk.value).rowwise() + p.bk.value.row(0);
  cache.v = (in * p.wv.value).rowwise() + p.bv.value.row(0);
  cache.probs.resize(num_heads);
  cache.concat.resize(t, e);
  for (int h = 0; h < num_heads; ++h) {
    auto qh = cache.q.middleCols(h * dh, dh);
    auto kh = cache.k.middleCols(h * dh, dh);
    auto vh = cache.v.middleCols(h * dh, dh);
    Matrix scores = qh * kh.transpose() * scale;
    cache.probs[h] = softmax_rows(scores);
    cache.concat.middleCols(h * dh, dh) = cache.probs[h] * vh;
  }
  return (cache.concat * p.wo.value).rowwise() + p.bo.value.row(0);
}

Matrix mhsa_backward(const Matrix& dout, int num_heads, const AttnParams& p,
                     const AttnCache& cache) {
  const auto t = cache.in.rows();
  const auto e = cache.in.cols();
  const auto dh = e / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  p.wo.grad += cache.concat.transpose() * dout;
  p.bo.grad.row(0) += dout.colwise().sum();
  Matrix dconcat = dout * p.wo.value.transpose();

  Matrix dq = Matrix::Zero(t, e), dk = Matrix::Zero(t, e),
         dv = Matrix::Zero(t, e);
  for (int h = 0; h < num_heads; ++h) {
    auto qh = cache.q.middleCols(h * dh, dh);
    auto kh = cache.k.middleCols(h * dh, dh);
    auto vh = cache.v.middleCols(h * dh, dh);
    const Matrix& probs = cache.probs[h];
    Matrix doh = dconcat.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh) = probs.transpose() * doh;
    Matrix dp = doh * vh.transpose();
    // softmax jacobian, row-wise
    Matrix ds(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
      double dot = dp.row(i).dot(probs.row(i));
      ds.row(i) =
          probs.row(i).array() * (dp.row(i).array() - dot);
    }
    dq.middleCols(h * dh, dh) = ds * kh * scale;
    dk.middleCols(h * dh, dh) = ds.transpose() * qh * scale;
  }

  p.wq.grad += cache.in.transpose() * dq;
  p.bq.grad.row(0) += dq.colwise().sum();
  p.wk.grad += cache.in.transpose() * dk;
  p.bk.grad.row(0) += dk.colwise().sum();
  p.wv.grad += cache.in.transpose() * dv;
  p.bv.grad.row(0) += dv.colwise().sum();
  return dq * p.wq.value.transpose() + dk * p.wk.value.transpose() +
         dv * p.wv.value.transpose();
}

struct TokenIds {
  int loc = 0;
  int day = 0;
  int slot = 0;
  int dow = 0;
  int td = 0;
  int dn = 0;
  std::vector<int> poi;
  bool masked = false;
};

struct HeadCache {
  Matrix u, g, logits;
};

struct LayerCache {
  AttnCache attn;
  Matrix s;     // attention sublayer output (after dropout)
  Matrix s_mask;
  LnCache ln1;
  Matrix y;     // ln1 output
  Matrix u, g;  // ffn pre-activation and activation
  Matrix f;     // ffn output (after dropout)
  Matrix f_mask;
  LnCache ln2;
  Matrix out;
};

struct ForwardCache {
  std::vector<TokenIds> ids;
  std::array<Matrix, kNumChannels> chan;
  Matrix base;
  std::vector<AttnCache> inter;      // per token, T = 8
  std::vector<Matrix> inter_out;     // per token [8 x E]
  Matrix fused;
  Matrix fused_mask;
  std::vector<LayerCache> layers;
  Matrix hidden;
  HeadCache loc, dist, dir;
};

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p,
                    std::mt19937_64& rng) {
  Matrix mask(rows, cols);
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      mask(i, j) = keep(rng) ? scale : 0.0;
  return mask;
}

}  // namespace

Network::Network(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.check();
  const int e = cfg_.embed_dim;
  params_.add("emb.loc", cfg_.loc_vocab(), e);
  params_.add("emb.day", cfg_.time.num_days, e);
  params_.add("emb.slot", cfg_.time.slots_per_day, e);
  params_.add("emb.dow", 7, e);
  params_.add("emb.td", cfg_.timedelta_vocab(), e);
  params_.add("emb.dn", 2, e);
  params_.add("emb.poi", cfg_.poi_vocab(), e);
  params_.add("emb.res", 1, e);

  auto add_attn = [&](const std::string& prefix) {
    params_.add(prefix + ".wq", e, e);
    params_.add(prefix + ".bq", 1, e);
    params_.add(prefix + ".wk", e, e);
    params_.add(prefix + ".bk", 1, e);
    params_.add(prefix + ".wv", e, e);
    params_.add(prefix + ".bv", 1, e);
    params_.add(prefix + ".wo", e, e);
    params_.add(prefix + ".bo", 1, e);
  };
  add_attn("inter");
  for (int l = 0; l < cfg_.num_layers; ++l) {
    std::string p = "enc" + std::to_string(l);
    add_attn(p + ".attn");
    params_.add(p + ".ln1.g", 1, e);
    params_.add(p + ".ln1.b", 1, e);
    params_.add(p + ".ffn.w1", e, cfg_.ffn_dim);
    params_.add(p + ".ffn.b1", 1, cfg_.ffn_dim);
    params_.add(p + ".ffn.w2", cfg_.ffn_dim, e);
    params_.add(p + ".ffn.b2", 1, e);
    params_.add(p + ".ln2.g", 1, e);
    params_.add(p + ".ln2.b", 1, e);
  }
  auto add_head = [&](const std::string& name, int classes) {
    params_.add("head." + name + ".w1", e, e);
    params_.add("head." + name + ".b1", 1, e);
    params_.add("head." + name + ".w2", e, classes);
    params_.add("head." + name + ".b2", 1, classes);
  };
  add_head("loc", cfg_.grid.num_cells());
  add_head("dist", kNumDistClasses);
  add_head("dir", kNumDirClasses);

  params_.init(cfg_.seed);
}

namespace {

std::vector<TokenIds> make_ids(const ModelSample& sample,
                               const ModelConfig& cfg) {
  std::vector<TokenIds> ids;
  ids.reserve(sample.tokens.size());
  for (std::size_t m = 0; m < sample.tokens.size(); ++m) {
    const auto& tok = sample.tokens[m];
    TokenIds id;
    id.masked = sample.masked[m];
    id.loc = id.masked ? cfg.loc_mask_id()
                       : tok.x * cfg.grid.height + tok.y;
    id.day = tok.dId;
    id.slot = tok.tId;
    id.dow = tok.day_of_week;
    id.td = std::clamp(tok.timedelta, 0, cfg.features.timedelta_cap);
    id.dn = tok.day_night;
    if (id.masked) {
      id.poi.assign(std::max<std::size_t>(1, tok.top_k_poi.size()),
                    cfg.poi_mask_id());
    } else {
      for (int c : tok.top_k_poi)
        id.poi.push_back(c == kNullPoi ? cfg.poi_null_id() : c);
      if (id.poi.empty()) id.poi.push_back(cfg.poi_null_id());
    }
    if (id.loc < 0 || id.loc >= cfg.loc_vocab() || id.day < 0 ||
        id.day >= cfg.time.num_days || id.slot < 0 ||
        id.slot >= cfg.time.slots_per_day || id.dn < 0 || id.dn > 1)
      throw DataError("token id out of vocab range for uid " + sample.uid);
    for (int c : id.poi)
      if (c < 0 || c >= cfg.poi_vocab())
        throw DataError("POI id out of vocab range for uid " + sample.uid);
    ids.push_back(std::move(id));
  }
  return ids;
}

}  // namespace

namespace {

struct NetRef {
  const ModelConfig& cfg;
  ParamStore& params;
};

AttnParams attn_params(ParamStore& ps, const std::string& prefix) {
  return AttnParams{ps.at(prefix + ".wq"), ps.at(prefix + ".bq"),
                    ps.at(prefix + ".wk"), ps.at(prefix + ".bk"),
                    ps.at(prefix + ".wv"), ps.at(prefix + ".bv"),
                    ps.at(prefix + ".wo"), ps.at(prefix + ".bo")};
}

void run_forward(const ModelConfig& cfg, ParamStore& ps,
                 const ModelSample& sample, ForwardCache& fc,
                 std::mt19937_64* dropout_rng) {
  const int e = cfg.embed_dim;
  const auto m = static_cast<Eigen::Index>(sample.tokens.size());
  const bool use_dropout = dropout_rng != nullptr && cfg.dropout > 0.0;

  fc.ids = make_ids(sample, cfg);
  for (auto& c : fc.chan) c.resize(m, e);
  const Matrix& emb_loc = ps.at("emb.loc").value;
  const Matrix& emb_day = ps.at("emb.day").value;
  const Matrix& emb_slot = ps.at("emb.slot").value;
  const Matrix& emb_dow = ps.at("emb.dow").value;
  const Matrix& emb_td = ps.at("emb.td").value;
  const Matrix& emb_dn = ps.at("emb.dn").value;
  const Matrix& emb_poi = ps.at("emb.poi").value;
  const Matrix& emb_res = ps.at("emb.res").value;

  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& id = fc.ids[i];
    fc.chan[kChanLoc].row(i) = emb_loc.row(id.loc);
    fc.chan[kChanDay].row(i) = emb_day.row(id.day);
    fc.chan[kChanSlot].row(i) = emb_slot.row(id.slot);
    fc.chan[kChanDow].row(i) = emb_dow.row(id.dow);
    fc.chan[kChanTimedelta].row(i) = emb_td.row(id.td);
    fc.chan[kChanDayNight].row(i) = emb_dn.row(id.dn);
    fc.chan[kChanPoi].row(i).setZero();
    for (int c : id.poi) fc.chan[kChanPoi].row(i) += emb_poi.row(c);
    fc.chan[kChanPoi].row(i) /= static_cast<double>(id.poi.size());
    fc.chan[kChanReserved].row(i) = emb_res.row(0);
  }

  fc.base = Matrix::Zero(m, e);
  for (const auto& c : fc.chan) fc.base += c;

  // per-token attention across the 8 feature channels
  AttnParams inter = attn_params(ps, "inter");
  fc.inter.resize(m);
  fc.inter_out.resize(m);
  fc.fused.resize(m, e);
  for (Eigen::Index i = 0; i < m; ++i) {
    Matrix f(kNumChannels, e);
    for (int c = 0; c < kNumChannels; ++c) f.row(c) = fc.chan[c].row(i);
    fc.inter_out[i] = mhsa_forward(f, cfg.num_heads, inter, fc.inter[i]);
    fc.fused.row(i) = fc.base.row(i) + fc.inter_out[i].colwise().sum();
  }
  if (use_dropout) {
    fc.fused_mask = dropout_mask(m, e, cfg.dropout, *dropout_rng);
    fc.fused = fc.fused.cwiseProduct(fc.fused_mask);
  }

  // encoder stack
  fc.layers.resize(cfg.num_layers);
  Matrix x = fc.fused;
  for (int l = 0; l < cfg.num_layers; ++l) {
    auto& lc = fc.layers[l];
    std::string p = "enc" + std::to_string(l);
    AttnParams ap = attn_params(ps, p + ".attn");
    lc.s = mhsa_forward(x, cfg.num_heads, ap, lc.attn);
    if (use_dropout) {
      lc.s_mask = dropout_mask(m, e, cfg.dropout, *dropout_rng);
      lc.s = lc.s.cwiseProduct(lc.s_mask);
    }
    Matrix a1 = x + lc.s;
    lc.y = layer_norm(a1, ps.at(p + ".ln1.g").value, ps.at(p + ".ln1.b").value,
                      lc.ln1);
    lc.u = (lc.y * ps.at(p + ".ffn.w1").value).rowwise() +
           ps.at(p + ".ffn.b1").value.row(0);
    lc.g = lc.u.unaryExpr([](double v) { return gelu(v); });
    lc.f = (lc.g * ps.at(p + ".ffn.w2").value).rowwise() +
           ps.at(p + ".ffn.b2").value.row(0);
    if (use_dropout) {
      lc.f_mask = dropout_mask(m, e, cfg.dropout, *dropout_rng);
      lc.f = lc.f.cwiseProduct(lc.f_mask);
    }
    Matrix a2 = lc.y + lc.f;
    lc.out = layer_norm(a2, ps.at(p + ".ln2.g").value,
                        ps.at(p + ".ln2.b").value, lc.ln2);
    x = lc.out;
  }
  fc.hidden = x;

  auto run_head = [&](const std::string& name, HeadCache& hc) {
    hc.u = (fc.hidden * ps.at("head." + name + ".w1").value).rowwise() +
           ps.at("head." + name + ".b1").value.row(0);
    hc.g = hc.u.unaryExpr([](double v) { return gelu(v); });
    hc.logits = (hc.g * ps.at("head." + name + ".w2").value).rowwise() +
                ps.at("head." + name + ".b2").value.row(0);
  };
  run_head("loc", fc.loc);
  run_head("dist", fc.dist);
  run_head("dir", fc.dir);
}

// Mean cross-entropy of the masked rows; fills dlogits (scaled by
// weight / num_masked) when requested.
double masked_cross_entropy(const Matrix& logits,
                            const std::vector<bool>& masked,
                            const std::vector<int>& labels, double weight,
                            Matrix* dlogits) {
  std::size_t num_masked = labels.size();
  if (num_masked == 0) throw DataError("loss: no masked positions");
  if (dlogits) dlogits->setZero(logits.rows(), logits.cols());
  double total = 0.0;
  std::size_t li = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!masked[static_cast<std::size_t>(i)]) continue;
    int label = labels[li++];
    double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd shifted = logits.row(i).array() - mx;
    double lse = std::log(shifted.array().exp().sum());
    total += lse - shifted(label);
    if (dlogits) {
      Eigen::RowVectorXd probs = (shifted.array() - lse).exp();
      dlogits->row(i) = probs * (weight / static_cast<double>(num_masked));
      (*dlogits)(i, label) -= weight / static_cast<double>(num_masked);
    }
  }
  return total / static_cast<double>(num_masked);
}

void run_backward(const ModelConfig& cfg, ParamStore& ps,
                  const ModelSample& sample, ForwardCache& fc,
                  double sample_weight) {
  const auto m = static_cast<Eigen::Index>(sample.tokens.size());
  const int e = cfg.embed_dim;
  const bool used_dropout = fc.fused_mask.size() > 0;

  Matrix dhidden = Matrix::Zero(m, e);
  auto head_backward = [&](const std::string& name, HeadCache& hc,
                           const std::vector<int>& labels, double weight) {
    Matrix dlogits;
    masked_cross_entropy(hc.logits, sample.masked, labels,
                         weight * sample_weight, &dlogits);
    ps.at("head." + name + ".w2").grad += hc.g.transpose() * dlogits;
    ps.at("head." + name + ".b2").grad.row(0) += dlogits.colwise().sum();
    Matrix dg = dlogits * ps.at("head." + name + ".w2").value.transpose();
    Matrix du = dg.cwiseProduct(
        hc.u.unaryExpr([](double v) { return gelu_prime(v); }));
    ps.at("head." + name + ".w1").grad += fc.hidden.transpose() * du;
    ps.at("head." + name + ".b1").grad.row(0) += du.colwise().sum();
    dhidden += du * ps.at("head." + name + ".w1").value.transpose();
  };
  head_backward("loc", fc.loc, sample.loc_labels, 1.0);
  head_backward("dist", fc.dist, sample.dist_labels, cfg.lambda_dist);
  head_backward("dir", fc.dir, sample.dir_labels, cfg.lambda_dir);

  Matrix dx = dhidden;
  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    auto& lc = fc.layers[l];
    std::string p = "enc" + std::to_string(l);
    Matrix da2 = layer_norm_backward(dx, lc.ln2, ps.at(p + ".ln2.g"),
                                     ps.at(p + ".ln2.g"), ps.at(p + ".ln2.b"));
    Matrix dy = da2;
    Matrix df = da2;
    if (used_dropout) df = df.cwiseProduct(lc.f_mask);
    ps.at(p + ".ffn.w2").grad += lc.g.transpose() * df;
    ps.at(p + ".ffn.b2").grad.row(0) += df.colwise().sum();
    Matrix dg = df * ps.at(p + ".ffn.w2").value.transpose();
    Matrix du = dg.cwiseProduct(
        lc.u.unaryExpr([](double v) { return gelu_prime(v); }));
    ps.at(p + ".ffn.w1").grad += lc.y.transpose() * du;
    ps.at(p + ".ffn.b1").grad.row(0) += du.colwise().sum();
    dy += du * ps.at(p + ".ffn.w1").value.transpose();

    Matrix da1 = layer_norm_backward(dy, lc.ln1, ps.at(p + ".ln1.g"),
                                     ps.at(p + ".ln1.g"), ps.at(p + ".ln1.b"));
    Matrix ds = da1;
    if (used_dropout) ds = ds.cwiseProduct(lc.s_mask);
    AttnParams ap = attn_params(ps, p + ".attn");
    Matrix din = mhsa_backward(ds, cfg.num_heads, ap, lc.attn);
    dx = da1 + din;
  }

  Matrix dfused = dx;
  if (used_dropout) dfused = dfused.cwiseProduct(fc.fused_mask);

  // interaction block backward: fused = base + colsum(attn_out)
  AttnParams inter = attn_params(ps, "inter");
  std::array<Matrix, kNumChannels> dchan;
  for (auto& c : dchan) c = dfused;  // base term reaches every channel
  for (Eigen::Index i = 0; i < m; ++i) {
    Matrix dout(kNumChannels, e);
    for (int c = 0; c < kNumChannels; ++c) dout.row(c) = dfused.row(i);
    Matrix df = mhsa_backward(dout, cfg.num_heads, inter, fc.inter[i]);
    for (int c = 0; c < kNumChannels; ++c) dchan[c].row(i) += df.row(c);
  }

  // embedding scatter
  Tensor& emb_loc = ps.at("emb.loc");
  Tensor& emb_day = ps.at("emb.day");
  Tensor& emb_slot = ps.at("emb.slot");
  Tensor& emb_dow = ps.at("emb.dow");
  Tensor& emb_td = ps.at("emb.td");
  Tensor& emb_dn = ps.at("emb.dn");
  Tensor& emb_poi = ps.at("emb.poi");
  Tensor& emb_res = ps.at("emb.res");
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& id = fc.ids[i];
    emb_loc.grad.row(id.loc) += dchan[kChanLoc].row(i);
    emb_day.grad.row(id.day) += dchan[kChanDay].row(i);
    emb_slot.grad.row(id.slot) += dchan[kChanSlot].row(i);
    emb_dow.grad.row(id.dow) += dchan[kChanDow].row(i);
    emb_td.grad.row(id.td) += dchan[kChanTimedelta].row(i);
    emb_dn.grad.row(id.dn) += dchan[kChanDayNight].row(i);
    const double inv = 1.0 / static_cast<double>(id.poi.size());
    for (int c : id.poi)
      emb_poi.grad.row(c) += dchan[kChanPoi].row(i) * inv;
    emb_res.grad.row(0) += dchan[kChanReserved].row(i);
  }
}

TaskLosses sample_losses(const ModelConfig& cfg, const ModelSample& sample,
                         const ForwardCache& fc) {
  TaskLosses out;
  out.loc = masked_cross_entropy(fc.loc.logits, sample.masked,
                                 sample.loc_labels, 1.0, nullptr);
  out.dist = masked_cross_entropy(fc.dist.logits, sample.masked,
                                  sample.dist_labels, 1.0, nullptr);
  out.dir = masked_cross_entropy(fc.dir.logits, sample.masked,
                                 sample.dir_labels, 1.0, nullptr);
  out.total = out.loc + cfg.lambda_dist * out.dist + cfg.lambda_dir * out.dir;
  return out;
}

}  // namespace

HeadLogits Network::forward(const ModelSample& sample) const {
  ForwardCache fc;
  auto& self = const_cast<Network&>(*this);
  run_forward(cfg_, self.params_, sample, fc, nullptr);
  return HeadLogits{std::move(fc.loc.logits), std::move(fc.dist.logits),
                    std::move(fc.dir.logits)};
}

TaskLosses Network::loss(const std::vector<const ModelSample*>& batch) const {
  if (batch.empty()) throw DataError("loss: empty batch");
  auto& self = const_cast<Network&>(*this);
  TaskLosses acc;
  for (const ModelSample* sample : batch) {
    ForwardCache fc;
    run_forward(cfg_, self.params_, *sample, fc, nullptr);
    TaskLosses s = sample_losses(cfg_, *sample, fc);
    acc.total += s.total;
    acc.loc += s.loc;
    acc.dist += s.dist;
    acc.dir += s.dir;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  acc.total *= inv;
  acc.loc *= inv;
  acc.dist *= inv;
  acc.dir *= inv;
  return acc;
}

TaskLosses Network::forward_backward(
    const std::vector<const ModelSample*>& batch,
    std::mt19937_64* dropout_rng) {
  if (batch.empty()) throw DataError("forward_backward: empty batch");
  TaskLosses acc;
  const double sample_weight = 1.0 / static_cast<double>(batch.size());
  for (const ModelSample* sample : batch) {
    ForwardCache fc;
    run_forward(cfg_, params_, *sample, fc, dropout_rng);
    TaskLosses s = sample_losses(cfg_, *sample, fc);
    if (!std::isfinite(s.total))
      throw DataError("non-finite loss for uid " + sample->uid);
    acc.total += s.total;
    acc.loc += s.loc;
    acc.dist += s.dist;
    acc.dir += s.dir;
    run_backward(cfg_, params_, *sample, fc, sample_weight);
  }
  acc.total *= sample_weight;
  acc.loc *= sample_weight;
  acc.dist *= sample_weight;
  acc.dir *= sample_weight;
  return acc;
}

ModelSample build_inference_sample(
    const Trajectory& prefix, const PoiTable* poi, const FeatureConfig& fcfg,
    const std::vector<std::pair<int, int>>& target_slots,
    const GridSpec& grid, const TimeSpec& time) {
  if (prefix.points.empty())
    throw DataError("build_inference_sample: empty prefix");
  if (target_slots.empty())
    throw DataError("build_inference_sample: no target slots");

  Trajectory window = prefix;
  for (auto [d, t] : target_slots) {
    TrajectoryPoint p;
    p.dId = d;
    p.tId = t;
    window.points.push_back(p);  // placeholder coordinates
  }
  auto features = derive_token_features(window, poi, fcfg, grid, time);

  ModelSample sample;
  sample.uid = prefix.uid;
  sample.num_observed = prefix.points.size();
  sample.tokens = std::move(features);
  sample.masked.assign(sample.tokens.size(), false);
  for (std::size_t i = prefix.points.size(); i < sample.tokens.size(); ++i)
    sample.masked[i] = true;
  return sample;
}

Network::Prediction Network::predict(
    const Trajectory& prefix, const PoiTable* poi, int observe_days,
    const std::vector<std::pair<int, int>>& target_slots) const {
  Trajectory observed;
  observed.uid = prefix.uid;
  for (const auto& p : prefix.points)
    if (p.dId < observe_days) observed.points.push_back(p);
  ModelSample sample = build_inference_sample(
      observed, poi, cfg_.features, target_slots, cfg_.grid, cfg_.time);
  HeadLogits logits = forward(sample);

  Prediction pred;
  std::size_t ti = 0;
  for (std::size_t i = 0; i < sample.tokens.size(); ++i) {
    if (!sample.masked[i]) continue;
    Eigen::Index cell;
    logits.loc.row(static_cast<Eigen::Index>(i)).maxCoeff(&cell);
    TrajectoryPoint p;
    p.dId = target_slots[ti].first;
    p.tId = target_slots[ti].second;
    p.x = static_cast<int>(cell) / cfg_.grid.height;
    p.y = static_cast<int>(cell) % cfg_.grid.height;
    pred.points.push_back(p);
    Eigen::Index cls;
    logits.dist.row(static_cast<Eigen::Index>(i)).maxCoeff(&cls);
    pred.dist_classes.push_back(static_cast<int>(cls));
    logits.dir.row(static_cast<Eigen::Index>(i)).maxCoeff(&cls);
    pred.dir_classes.push_back(static_cast<int>(cls));
    ++ti;
  }
  return pred;
}

double Network::grad_check(const ModelSample& sample, double eps,
                           std::size_t min_samples, std::uint64_t seed) {
  params_.zero_grads();
  std::vector<const ModelSample*> batch{&sample};
  forward_backward(batch);

  std::mt19937_64 rng(seed);
  const auto& names = params_.names();
  const std::size_t per_tensor = std::max<std::size_t>(
      2, (min_samples + names.size() - 1) / names.size());

  double max_rel_err = 0.0;
  for (const auto& name : names) {
    Tensor& t = params_.at(name);
    const auto size = static_cast<std::size_t>(t.value.size());
    std::size_t count = std::min(per_tensor, size);
    for (std::size_t s = 0; s < count; ++s) {
      auto flat = static_cast<Eigen::Index>(rng() % size);
      double* cell = t.value.data() + flat;
      const double orig = *cell;
      *cell = orig + eps;
      double lp = loss(batch).total;
      *cell = orig - eps;
      double lm = loss(batch).total;
      *cell = orig;
      double numeric = (lp - lm) / (2.0 * eps);
      double analytic = *(t.grad.data() + flat);
      double denom = std::max({1.0, std::abs(numeric), std::abs(analytic)});
      max_rel_err = std::max(max_rel_err, std::abs(numeric - analytic) / denom);
    }
  }
  return max_rel_err;
}

}  // namespace mobcl
