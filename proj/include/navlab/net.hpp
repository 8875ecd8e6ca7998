// Copyright 2026 The navlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "navlab/obs.hpp"

namespace navlab {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct NetConfig {
  int other_obs_dim = static_cast<int>(kOtherDim);
  int ego_dim = static_cast<int>(kEgoDim);
  int lstm_hidden = 64;
  int fc1_width = 256;
  int fc2_width = 256;
  int action_count = static_cast<int>(kActionCount);
  int max_sequence = 19;

  bool operator==(const NetConfig&) const = default;

  void validate() const {
    if (other_obs_dim <= 0 || ego_dim <= 0 || lstm_hidden <= 0 || fc1_width <= 0 ||
        fc2_width <= 0 || action_count <= 0 || max_sequence <= 0)
      throw std::invalid_argument("NetConfig fields must be positive");
  }
};

// All weights of the network. Gate matrices act on [h, x] concatenations.
// Tensor order here is the serialization order of the checkpoint format.
template <typename S>
struct NetParams {
  NetConfig config;
  Mat<S> w_in, w_forget, w_out, w_cand;  // lstm_hidden x (lstm_hidden + other_obs_dim)
  Vec<S> b_in, b_forget, b_out, b_cand;
  Mat<S> w_fc1;  // fc1 x (lstm_hidden + ego_dim)
  Vec<S> b_fc1;
  Mat<S> w_fc2;  // fc2 x fc1
  Vec<S> b_fc2;
  Mat<S> w_policy;  // action_count x fc2
  Vec<S> b_policy;
  Mat<S> w_value;  // 1 x fc2
  Vec<S> b_value;

  template <typename T>
  NetParams<T> cast() const {
    NetParams<T> r;
    r.config = config;
    r.w_in = w_in.template cast<T>();
    r.w_forget = w_forget.template cast<T>();
    r.w_out = w_out.template cast<T>();
    r.w_cand = w_cand.template cast<T>();
    r.b_in = b_in.template cast<T>();
    r.b_forget = b_forget.template cast<T>();
    r.b_out = b_out.template cast<T>();
    r.b_cand = b_cand.template cast<T>();
    r.w_fc1 = w_fc1.template cast<T>();
    r.b_fc1 = b_fc1.template cast<T>();
    r.w_fc2 = w_fc2.template cast<T>();
    r.b_fc2 = b_fc2.template cast<T>();
    r.w_policy = w_policy.template cast<T>();
    r.b_policy = b_policy.template cast<T>();
    r.w_value = w_value.template cast<T>();
    r.b_value = b_value.template cast<T>();
    return r;
  }
};

template <typename S>
using Gradients = NetParams<S>;

template <typename S, typename F>
void for_each_tensor(NetParams<S>& p, F&& f) {
  f(p.w_in);
  f(p.w_forget);
  f(p.w_out);
  f(p.w_cand);
  f(p.b_in);
  f(p.b_forget);
  f(p.b_out);
  f(p.b_cand);
  f(p.w_fc1);
  f(p.b_fc1);
  f(p.w_fc2);
  f(p.b_fc2);
  f(p.w_policy);
  f(p.b_policy);
  f(p.w_value);
  f(p.b_value);
}

template <typename S, typename F>
void for_each_tensor(const NetParams<S>& p, F&& f) {
  for_each_tensor(const_cast<NetParams<S>&>(p), [&](const auto& t) { f(t); });
}

template <typename S, typename F>
void for_each_pair(NetParams<S>& a, const NetParams<S>& b, F&& f) {
  f(a.w_in, b.w_in);
  f(a.w_forget, b.w_forget);
  f(a.w_out, b.w_out);
  f(a.w_cand, b.w_cand);
  f(a.b_in, b.b_in);
  f(a.b_forget, b.b_forget);
  f(a.b_out, b.b_out);
  f(a.b_cand, b.b_cand);
  f(a.w_fc1, b.w_fc1);
  f(a.b_fc1, b.b_fc1);
  f(a.w_fc2, b.w_fc2);
  f(a.b_fc2, b.b_fc2);
  f(a.w_policy, b.w_policy);
  f(a.b_policy, b.b_policy);
  f(a.w_value, b.w_value);
  f(a.b_value, b.b_value);
}

template <typename S>
NetParams<S> zeros_like(const NetParams<S>& p) {
  NetParams<S> z = p;
  for_each_tensor(z, [](auto& t) { t.setZero(); });
  return z;
}

template <typename S>
std::size_t parameter_count(const NetParams<S>& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

template <typename S>
bool all_finite(const NetParams<S>& p) {
  bool ok = true;
  for_each_tensor(p, [&](const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

// Glorot-uniform matrices, zero biases, forget-gate bias +1.
template <typename S>
NetParams<S> init_params(const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  NetParams<S> p;
  p.config = cfg;
  const int H = cfg.lstm_hidden;
  const int Z = H + cfg.other_obs_dim;
  std::mt19937_64 rng(seed);
  auto glorot = [&](Mat<S>& m, int rows, int cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    m.resize(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = static_cast<S>(u(rng));
  };
  glorot(p.w_in, H, Z);
  glorot(p.w_forget, H, Z);
  glorot(p.w_out, H, Z);
  glorot(p.w_cand, H, Z);
  p.b_in = Vec<S>::Zero(H);
  p.b_forget = Vec<S>::Constant(H, static_cast<S>(1));
  p.b_out = Vec<S>::Zero(H);
  p.b_cand = Vec<S>::Zero(H);
  glorot(p.w_fc1, cfg.fc1_width, H + cfg.ego_dim);
  p.b_fc1 = Vec<S>::Zero(cfg.fc1_width);
  glorot(p.w_fc2, cfg.fc2_width, cfg.fc1_width);
  p.b_fc2 = Vec<S>::Zero(cfg.fc2_width);
  glorot(p.w_policy, cfg.action_count, cfg.fc2_width);
  p.b_policy = Vec<S>::Zero(cfg.action_count);
  glorot(p.w_value, 1, cfg.fc2_width);
  p.b_value = Vec<S>::Zero(1);
  return p;
}

template <typename S>
Vec<S> other_obs_vector(const OtherObservation& o) {
  Vec<S> x(7);
  x << static_cast<S>(o.px), static_cast<S>(o.py), static_cast<S>(o.vx), static_cast<S>(o.vy),
      static_cast<S>(o.radius), static_cast<S>(o.dist_to_agent),
      static_cast<S>(o.combined_radius);
  return x;
}

template <typename S>
Vec<S> ego_obs_vector(const EgoObservation& e) {
  Vec<S> x(4);
  x << static_cast<S>(e.dist_to_goal), static_cast<S>(e.v_pref), static_cast<S>(e.heading_ego),
      static_cast<S>(e.radius);
  return x;
}

// Everything the backward pass needs without re-running forward.
template <typename S>
struct ForwardTrace {
  std::vector<Vec<S>> x;                         // LSTM inputs, one per other agent
  std::vector<Vec<S>> gi, gf, go, gc;            // gate activations per step
  std::vector<Vec<S>> cell, hidden, tanh_cell;   // states per step
  Vec<S> ego;
  Vec<S> encoded;  // [h_n, ego]
  Vec<S> z1, a1, z2, a2;
  Vec<S> logits, probs;
  S value = S(0);
};

template <typename S>
struct ForwardResult {
  Vec<S> policy;  // probabilities over action_count
  S value = S(0);
  ForwardTrace<S> trace;
};

namespace detail {
template <typename S>
Vec<S> logistic(const Vec<S>& v) {
  return v.unaryExpr([](S a) { return S(1) / (S(1) + std::exp(-a)); });
}
}  // namespace detail

// Runs the LSTM over the others sequence from zero initial state, filling the
// trace. An empty sequence leaves the encoding at the zero vector.
template <typename S>
Vec<S> lstm_encode(const std::vector<OtherObservation>& others, const NetParams<S>& p,
                   ForwardTrace<S>& trace) {
  const int H = p.config.lstm_hidden;
  if (static_cast<int>(others.size()) > p.config.max_sequence)
    throw std::invalid_argument("observation sequence exceeds max_sequence");
  Vec<S> h = Vec<S>::Zero(H);
  Vec<S> c = Vec<S>::Zero(H);
  for (const OtherObservation& o : others) {
    Vec<S> x = other_obs_vector<S>(o);
    Vec<S> z(H + p.config.other_obs_dim);
    z << h, x;
    Vec<S> gi = detail::logistic<S>(p.w_in * z + p.b_in);
    Vec<S> gf = detail::logistic<S>(p.w_forget * z + p.b_forget);
    Vec<S> go = detail::logistic<S>(p.w_out * z + p.b_out);
    Vec<S> gc = (p.w_cand * z + p.b_cand).array().tanh();
    c = gf.cwiseProduct(c) + gi.cwiseProduct(gc);
    Vec<S> tc = c.array().tanh();
    h = go.cwiseProduct(tc);
    trace.x.push_back(std::move(x));
    trace.gi.push_back(std::move(gi));
    trace.gf.push_back(std::move(gf));
    trace.go.push_back(std::move(go));
    trace.gc.push_back(std::move(gc));
    trace.cell.push_back(c);
    trace.tanh_cell.push_back(std::move(tc));
    trace.hidden.push_back(h);
  }
  return h;
}

template <typename S>
ForwardResult<S> forward(const ObservationSequence& obs, const NetParams<S>& p) {
  ForwardResult<S> r;
  ForwardTrace<S>& t = r.trace;
  Vec<S> h_n = lstm_encode(obs.others, p, t);
  t.ego = ego_obs_vector<S>(obs.ego);
  t.encoded.resize(h_n.size() + t.ego.size());
  t.encoded << h_n, t.ego;

  t.z1 = p.w_fc1 * t.encoded + p.b_fc1;
  t.a1 = t.z1.cwiseMax(S(0));
  t.z2 = p.w_fc2 * t.a1 + p.b_fc2;
  t.a2 = t.z2.cwiseMax(S(0));
  t.logits = p.w_policy * t.a2 + p.b_policy;
  const S m = t.logits.maxCoeff();
  Vec<S> ex = (t.logits.array() - m).exp();
  t.probs = ex / ex.sum();
  t.value = (p.w_value * t.a2)(0) + p.b_value(0);

  r.policy = t.probs;
  r.value = t.value;
  if (!r.policy.allFinite() || !std::isfinite(static_cast<double>(r.value)))
    throw std::runtime_error("forward produced non-finite outputs");
  return r;
}

// Exact gradients of (logit_seed . logits + value_seed * value) with respect
// to every parameter, backpropagating through both FC layers and every LSTM
// step of the trace.
template <typename S>
Gradients<S> backward(const ForwardTrace<S>& t, const Vec<S>& logit_seed, S value_seed,
                      const NetParams<S>& p) {
  if (logit_seed.size() != p.config.action_count)
    throw std::invalid_argument("backward: logit seed size mismatch");
  const int H = p.config.lstm_hidden;
  Gradients<S> g = zeros_like(p);

  g.w_policy = logit_seed * t.a2.transpose();
  g.b_policy = logit_seed;
  g.w_value = value_seed * t.a2.transpose();
  g.b_value(0) = value_seed;
  Vec<S> da2 = p.w_policy.transpose() * logit_seed + p.w_value.transpose() * value_seed;

  Vec<S> dz2 = (t.z2.array() > S(0)).select(da2, Vec<S>::Zero(da2.size()));
  g.w_fc2 = dz2 * t.a1.transpose();
  g.b_fc2 = dz2;
  Vec<S> da1 = p.w_fc2.transpose() * dz2;
  Vec<S> dz1 = (t.z1.array() > S(0)).select(da1, Vec<S>::Zero(da1.size()));
  g.w_fc1 = dz1 * t.encoded.transpose();
  g.b_fc1 = dz1;
  Vec<S> de = p.w_fc1.transpose() * dz1;

  Vec<S> dh = de.head(H);
  Vec<S> dc = Vec<S>::Zero(H);
  const int T = static_cast<int>(t.x.size());
  for (int step = T - 1; step >= 0; --step) {
    const Vec<S>& gi = t.gi[step];
    const Vec<S>& gf = t.gf[step];
    const Vec<S>& go = t.go[step];
    const Vec<S>& gc = t.gc[step];
    const Vec<S>& tc = t.tanh_cell[step];
    const Vec<S> c_prev = step > 0 ? t.cell[step - 1] : Vec<S>::Zero(H);
    const Vec<S> h_prev = step > 0 ? t.hidden[step - 1] : Vec<S>::Zero(H);

    Vec<S> dgo = dh.cwiseProduct(tc);
    dc += dh.cwiseProduct(go).cwiseProduct(
        (Vec<S>::Ones(H) - tc.cwiseProduct(tc)));
    Vec<S> dgi = dc.cwiseProduct(gc);
    Vec<S> dgc = dc.cwiseProduct(gi);
    Vec<S> dgf = dc.cwiseProduct(c_prev);

    // logistic' = a(1-a); tanh' = 1-a^2
    Vec<S> dzi = dgi.cwiseProduct(gi).cwiseProduct(Vec<S>::Ones(H) - gi);
    Vec<S> dzf = dgf.cwiseProduct(gf).cwiseProduct(Vec<S>::Ones(H) - gf);
    Vec<S> dzo = dgo.cwiseProduct(go).cwiseProduct(Vec<S>::Ones(H) - go);
    Vec<S> dzc = dgc.cwiseProduct(Vec<S>::Ones(H) - gc.cwiseProduct(gc));

    Vec<S> z(H + p.config.other_obs_dim);
    z << h_prev, t.x[step];
    g.w_in += dzi * z.transpose();
    g.w_forget += dzf * z.transpose();
    g.w_out += dzo * z.transpose();
    g.w_cand += dzc * z.transpose();
    g.b_in += dzi;
    g.b_forget += dzf;
    g.b_out += dzo;
    g.b_cand += dzc;

    dh = p.w_in.leftCols(H).transpose() * dzi + p.w_forget.leftCols(H).transpose() * dzf +
         p.w_out.leftCols(H).transpose() * dzo + p.w_cand.leftCols(H).transpose() * dzc;
    dc = dc.cwiseProduct(gf);
  }
  return g;
}

template <typename S>
struct AdamState {
  NetParams<S> m;
  NetParams<S> v;
  std::uint64_t step = 0;
  std::uint64_t rejected = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState make(const NetParams<S>& p) {
    AdamState s;
    s.m = zeros_like(p);
    s.v = zeros_like(p);
    return s;
  }
};

// Standard bias-corrected Adam. Non-finite gradients are rejected: the update
// is skipped and counted, parameters stay untouched.
template <typename S>
bool adam_update(NetParams<S>& params, const Gradients<S>& grads, AdamState<S>& state,
                 double lr) {
  if (!all_finite(grads)) {
    ++state.rejected;
    ++state.step;
    return false;
  }
  ++state.step;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = static_cast<S>(b1) * m + static_cast<S>(1.0 - b1) * g;
    v = (static_cast<S>(b2) * v.array() + static_cast<S>(1.0 - b2) * g.array().square()).matrix();
    p.array() -= static_cast<S>(lr) * (m.array() / static_cast<S>(corr1)) /
                 ((v.array() / static_cast<S>(corr2)).sqrt() + static_cast<S>(state.eps));
  };
  update(params.w_in, grads.w_in, state.m.w_in, state.v.w_in);
  update(params.w_forget, grads.w_forget, state.m.w_forget, state.v.w_forget);
  update(params.w_out, grads.w_out, state.m.w_out, state.v.w_out);
  update(params.w_cand, grads.w_cand, state.m.w_cand, state.v.w_cand);
  update(params.b_in, grads.b_in, state.m.b_in, state.v.b_in);
  update(params.b_forget, grads.b_forget, state.m.b_forget, state.v.b_forget);
  update(params.b_out, grads.b_out, state.m.b_out, state.v.b_out);
  update(params.b_cand, grads.b_cand, state.m.b_cand, state.v.b_cand);
  update(params.w_fc1, grads.w_fc1, state.m.w_fc1, state.v.w_fc1);
  update(params.b_fc1, grads.b_fc1, state.m.b_fc1, state.v.b_fc1);
  update(params.w_fc2, grads.w_fc2, state.m.w_fc2, state.v.w_fc2);
  update(params.b_fc2, grads.b_fc2, state.m.b_fc2, state.v.b_fc2);
  update(params.w_policy, grads.w_policy, state.m.w_policy, state.v.w_policy);
  update(params.b_policy, grads.b_policy, state.m.b_policy, state.v.b_policy);
  update(params.w_value, grads.w_value, state.m.w_value, state.v.w_value);
  update(params.b_value, grads.b_value, state.m.b_value, state.v.b_value);
  return true;
}

// Global-norm gradient clip; returns the pre-clip norm.
template <typename S>
double clip_global_norm(Gradients<S>& g, double max_norm) {
  double sq = 0.0;
  for_each_tensor(g, [&](const auto& t) { sq += static_cast<double>(t.squaredNorm()); });
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const S scale = static_cast<S>(max_norm / norm);
    for_each_tensor(g, [&](auto& t) { t *= scale; });
  }
  return norm;
}

template <typename S>
void accumulate(Gradients<S>& into, const Gradients<S>& g, S scale = S(1)) {
  for_each_pair(into, g, [&](auto& a, const auto& b) { a += scale * b; });
}

}  // namespace navlab
