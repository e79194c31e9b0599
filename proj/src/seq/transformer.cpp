#include "transformer.hpp"

#include <algorithm>
#include <cmath>

#include "himol/kernels.hpp"

namespace himol::seq::detail {
namespace {

constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

// y = b + x W, W is (in x out) row-major.
void linear(const kernels::Table& k, const double* x, std::size_t in, const double* w, const double* b,
            std::size_t out, double* y) {
  std::copy_n(b, out, y);
  for (std::size_t i = 0; i < in; ++i) k.axpy(x[i], w + i * out, y, out);
}

// dx = dy W^T (accumulated), dW += x^T dy, db += dy.
void linear_back(const kernels::Table& k, const double* x, std::size_t in, const double* w, std::size_t out,
                 const double* dy, double* dx, double* dw, double* db) {
  if (dx) {
    for (std::size_t i = 0; i < in; ++i) dx[i] += k.dot(dy, w + i * out, out);
  }
  if (dw) {
    for (std::size_t i = 0; i < in; ++i) k.axpy(x[i], dy, dw + i * out, out);
    k.axpy(1.0, dy, db, out);
  }
}

void layer_norm(const double* x, std::size_t n, const double* g, const double* b, double* y, double& mu, double& rs) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  mu = s / static_cast<double>(n);
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) v += (x[i] - mu) * (x[i] - mu);
  rs = 1.0 / std::sqrt(v / static_cast<double>(n) + kLnEps);
  for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] - mu) * rs * g[i] + b[i];
}

// Accumulates dx; dg/db accumulate when non-null.
void layer_norm_back(const double* x, std::size_t n, const double* g, double mu, double rs, const double* dy,
                     double* dx, double* dg, double* db) {
  double mean_d = 0.0;
  double mean_dx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xhat = (x[i] - mu) * rs;
    const double d = dy[i] * g[i];
    mean_d += d;
    mean_dx += d * xhat;
    if (dg) {
      dg[i] += dy[i] * xhat;
      db[i] += dy[i];
    }
  }
  mean_d /= static_cast<double>(n);
  mean_dx /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xhat = (x[i] - mu) * rs;
    dx[i] += rs * (dy[i] * g[i] - mean_d - xhat * mean_dx);
  }
}

double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + 0.044715 * u * u * u))); }

double gelu_grad(double u) {
  const double t = std::tanh(kGeluC * (u + 0.044715 * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * u * u);
}

template <typename T>
T* grow(std::vector<T>& v, std::size_t n) {
  v.resize(v.size() + n);
  return v.data() + v.size() - n;
}

}  // namespace

void forward(const Backbone& model, Tape& tape, std::span<const double> inputs, const double* head) {
  const auto& k = kernels::active();
  const Hyper& hp = model.hyper();
  const Layout& L = model.layout();
  const double* W = model.params().data();
  const auto E = static_cast<std::size_t>(hp.embed);
  const auto M = static_cast<std::size_t>(hp.mlp);
  const auto H = static_cast<std::size_t>(hp.heads);
  const std::size_t D = E / H;
  const std::size_t V = model.vocab().size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(D));
  if (!head) head = W + L.head_w;
  if (inputs.size() % E != 0) throw Error("forward: input size is not a multiple of the embed width");
  if (tape.layers.empty()) tape.layers.resize(L.layers.size());

  std::vector<double> cur(E), tmp(std::max(E, M));
  for (std::size_t off = 0; off < inputs.size(); off += E) {
    const auto t = static_cast<std::size_t>(tape.n);
    if (t >= static_cast<std::size_t>(hp.context)) throw Error("sequence exceeds the model context length");
    for (std::size_t i = 0; i < E; ++i) cur[i] = inputs[off + i] + W[L.pos_emb + t * E + i];

    for (std::size_t l = 0; l < L.layers.size(); ++l) {
      const LayerLayout& P = L.layers[l];
      LayerTape& T = tape.layers[l];
      double* x = grow(T.x, E);
      std::copy(cur.begin(), cur.end(), x);
      double* a = grow(T.a, E);
      layer_norm(x, E, W + P.ln1_g, W + P.ln1_b, a, *grow(T.mu1, 1), *grow(T.rs1, 1));
      double* qkv = grow(T.qkv, 3 * E);
      linear(k, a, E, W + P.w_qkv, W + P.b_qkv, 3 * E, qkv);
      double* o = grow(T.o, E);
      std::fill_n(o, E, 0.0);
      for (std::size_t h = 0; h < H; ++h) {
        const double* q = qkv + h * D;
        std::vector<double>& p = T.p.emplace_back(t + 1);
        double mx = -INFINITY;
        for (std::size_t s = 0; s <= t; ++s) {
          p[s] = k.dot(q, T.qkv.data() + s * 3 * E + E + h * D, D) * scale;
          mx = std::max(mx, p[s]);
        }
        double z = 0.0;
        for (std::size_t s = 0; s <= t; ++s) z += (p[s] = std::exp(p[s] - mx));
        for (std::size_t s = 0; s <= t; ++s) {
          p[s] /= z;
          k.axpy(p[s], T.qkv.data() + s * 3 * E + 2 * E + h * D, o + h * D, D);
        }
      }
      double* hres = grow(T.h, E);
      linear(k, o, E, W + P.w_o, W + P.b_o, E, hres);
      for (std::size_t i = 0; i < E; ++i) hres[i] += x[i];
      double* m = grow(T.m, E);
      layer_norm(hres, E, W + P.ln2_g, W + P.ln2_b, m, *grow(T.mu2, 1), *grow(T.rs2, 1));
      double* u = grow(T.u, M);
      linear(k, m, E, W + P.w_1, W + P.b_1, M, u);
      double* g = grow(T.g, M);
      for (std::size_t i = 0; i < M; ++i) g[i] = gelu(u[i]);
      linear(k, g, M, W + P.w_2, W + P.b_2, E, cur.data());
      for (std::size_t i = 0; i < E; ++i) cur[i] += hres[i];
    }
    double* xf = grow(tape.xf, E);
    std::copy(cur.begin(), cur.end(), xf);
    double* z = grow(tape.z, E);
    layer_norm(xf, E, W + L.lnf_g, W + L.lnf_b, z, *grow(tape.muf, 1), *grow(tape.rsf, 1));
    linear(k, z, E, head, head + E * V, V, grow(tape.logits, V));
    ++tape.n;
  }
}

void backward(const Backbone& model, const Tape& tape, std::span<const double> dlogits, Grads grads,
              const double* head) {
  const auto& k = kernels::active();
  const Hyper& hp = model.hyper();
  const Layout& L = model.layout();
  const double* W = model.params().data();
  const auto E = static_cast<std::size_t>(hp.embed);
  const auto M = static_cast<std::size_t>(hp.mlp);
  const auto H = static_cast<std::size_t>(hp.heads);
  const std::size_t D = E / H;
  const std::size_t V = model.vocab().size();
  const auto n = static_cast<std::size_t>(tape.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(D));
  if (!head) head = W + L.head_w;
  if (dlogits.size() != n * V || grads.inputs.size() != n * E) throw Error("backward: buffer sizes do not match");
  double* dP = grads.params;
  auto pg = [dP](std::size_t off) { return dP ? dP + off : nullptr; };

  // Gradient w.r.t. the residual stream at the current layer boundary.
  std::vector<double> dx(n * E, 0.0);
  {
    std::vector<double> dz(E);
    double* dhead_w = grads.head ? grads.head : pg(L.head_w);
    double* dhead_b = grads.head ? grads.head + E * V : pg(L.head_b);
    for (std::size_t t = 0; t < n; ++t) {
      const double* dl = dlogits.data() + t * V;
      if (std::all_of(dl, dl + V, [](double v) { return v == 0.0; })) continue;
      std::fill(dz.begin(), dz.end(), 0.0);
      const double* z = tape.z.data() + t * E;
      for (std::size_t i = 0; i < E; ++i) dz[i] = k.dot(dl, head + i * V, V);
      if (dhead_w) {
        for (std::size_t i = 0; i < E; ++i) k.axpy(z[i], dl, dhead_w + i * V, V);
        k.axpy(1.0, dl, dhead_b, V);
      }
      layer_norm_back(tape.xf.data() + t * E, E, W + L.lnf_g, tape.muf[t], tape.rsf[t], dz.data(),
                      dx.data() + t * E, pg(L.lnf_g), pg(L.lnf_b));
    }
  }

  std::vector<double> dh(n * E), dgv(M), dm(E), dqkv(n * 3 * E), da(E), dov(n * E);
  for (std::size_t l = L.layers.size(); l-- > 0;) {
    const LayerLayout& P = L.layers[l];
    const LayerTape& T = tape.layers[l];
    // MLP block: out = h + W2 gelu(W1 ln2(h)).
    dh = dx;
    for (std::size_t t = 0; t < n; ++t) {
      const double* dout = dx.data() + t * E;
      std::fill(dgv.begin(), dgv.end(), 0.0);
      linear_back(k, T.g.data() + t * M, M, W + P.w_2, E, dout, dgv.data(), pg(P.w_2), pg(P.b_2));
      const double* u = T.u.data() + t * M;
      for (std::size_t i = 0; i < M; ++i) dgv[i] *= gelu_grad(u[i]);
      std::fill(dm.begin(), dm.end(), 0.0);
      linear_back(k, T.m.data() + t * E, E, W + P.w_1, M, dgv.data(), dm.data(), pg(P.w_1), pg(P.b_1));
      layer_norm_back(T.h.data() + t * E, E, W + P.ln2_g, T.mu2[t], T.rs2[t], dm.data(), dh.data() + t * E,
                      pg(P.ln2_g), pg(P.ln2_b));
    }
    // Attention block: h = x + Wo attn(ln1(x)).
    std::fill(dov.begin(), dov.end(), 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      linear_back(k, T.o.data() + t * E, E, W + P.w_o, E, dh.data() + t * E, dov.data() + t * E, pg(P.w_o),
                  pg(P.b_o));
    }
    std::fill(dqkv.begin(), dqkv.end(), 0.0);
    std::vector<double> dp;
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t h = 0; h < H; ++h) {
        const std::vector<double>& p = T.p[t * H + h];
        const double* d_o = dov.data() + t * E + h * D;
        dp.assign(t + 1, 0.0);
        double sum = 0.0;
        for (std::size_t s = 0; s <= t; ++s) {
          dp[s] = k.dot(d_o, T.qkv.data() + s * 3 * E + 2 * E + h * D, D);
          sum += p[s] * dp[s];
          k.axpy(p[s], d_o, dqkv.data() + s * 3 * E + 2 * E + h * D, D);
        }
        const double* q = T.qkv.data() + t * 3 * E + h * D;
        double* dq = dqkv.data() + t * 3 * E + h * D;
        for (std::size_t s = 0; s <= t; ++s) {
          const double ds = p[s] * (dp[s] - sum) * scale;
          if (ds == 0.0) continue;
          k.axpy(ds, T.qkv.data() + s * 3 * E + E + h * D, dq, D);
          k.axpy(ds, q, dqkv.data() + s * 3 * E + E + h * D, D);
        }
      }
    }
    dx = dh;
    for (std::size_t t = 0; t < n; ++t) {
      std::fill(da.begin(), da.end(), 0.0);
      linear_back(k, T.a.data() + t * E, E, W + P.w_qkv, 3 * E, dqkv.data() + t * 3 * E, da.data(), pg(P.w_qkv),
                  pg(P.b_qkv));
      layer_norm_back(T.x.data() + t * E, E, W + P.ln1_g, T.mu1[t], T.rs1[t], da.data(), dx.data() + t * E,
                      pg(P.ln1_g), pg(P.ln1_b));
    }
  }
  std::copy(dx.begin(), dx.end(), grads.inputs.begin());
  if (dP) {
    for (std::size_t i = 0; i < n * E; ++i) dP[L.pos_emb + i] += dx[i];
  }
}

}  // namespace himol::seq::detail

namespace himol::seq::detail {

double cross_entropy(const Backbone& model, const Tape& tape, std::size_t first, std::span<const int> targets,
                     std::span<double> dlogits) {
  const std::size_t V = model.vocab().size();
  const double inv = 1.0 / static_cast<double>(targets.size());
  double total = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const double* row = tape.logits.data() + (first + j) * V;
    const double mx = *std::max_element(row, row + V);
    double z = 0.0;
    for (std::size_t v = 0; v < V; ++v) z += std::exp(row[v] - mx);
    const double lse = mx + std::log(z);
    total += lse - row[static_cast<std::size_t>(targets[j])];
    if (!dlogits.empty()) {
      double* d = dlogits.data() + (first + j) * V;
      for (std::size_t v = 0; v < V; ++v) d[v] = std::exp(row[v] - lse) * inv;
      d[static_cast<std::size_t>(targets[j])] -= inv;
    }
  }
  return total * inv;
}

}  // namespace himol::seq::detail
