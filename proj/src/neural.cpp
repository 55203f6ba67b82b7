#include "itgen/neural.hpp"

#include <cmath>

namespace itgen {

namespace {

double apply_activation(Activation act, double z) {
  switch (act) {
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Linear: return z;
  }
  return z;
}

// Derivative in terms of pre-activation z and post-activation a.
double activation_grad(Activation act, double z, double a) {
  switch (act) {
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: return a * (1.0 - a);
    case Activation::Linear: return 1.0;
  }
  return 1.0;
}

}  // namespace

std::size_t DenseNetwork::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.a.size() + l.b.size();
  return n;
}

DenseNetwork make_network(int in_dim, std::span<const int> hidden, int out_dim,
                          Activation hidden_act, Activation out_act, Rng& rng) {
  if (in_dim <= 0 || out_dim <= 0) throw DataError("make_network: bad dimensions");
  DenseNetwork net;
  int prev = in_dim;
  auto add_layer = [&](int width, Activation act) {
    DenseLayer layer;
    layer.w = Matrix(width, prev);
    layer.b.assign(width, 0.0);
    layer.act = act;
    const double bound = std::sqrt(6.0 / static_cast<double>(prev + width));
    for (double& w : layer.w.a) w = (2.0 * rng.uniform() - 1.0) * bound;
    net.layers.push_back(std::move(layer));
    prev = width;
  };
  for (int width : hidden) add_layer(width, hidden_act);
  add_layer(out_dim, out_act);
  return net;
}

Matrix forward(const DenseNetwork& net, const Matrix& x, ForwardCache* cache) {
  if (x.cols != net.input_dim()) {
    throw DataError("forward: input dimension " + std::to_string(x.cols) +
                    " does not match layer 0 input " + std::to_string(net.input_dim()));
  }
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
    cache->pre.reserve(net.layers.size());
    cache->post.reserve(net.layers.size());
  }
  Matrix cur = x;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const auto& layer = net.layers[li];
    if (cur.cols != layer.w.cols) {
      throw DataError("forward: dimension mismatch at layer " + std::to_string(li));
    }
    Matrix z(cur.rows, layer.w.rows);
    for (int n = 0; n < cur.rows; ++n) {
      const double* xin = cur.row(n);
      double* zrow = z.row(n);
      for (int o = 0; o < layer.w.rows; ++o) {
        const double* wrow = layer.w.row(o);
        double acc = layer.b[o];
        for (int i = 0; i < layer.w.cols; ++i) acc += wrow[i] * xin[i];
        zrow[o] = acc;
      }
    }
    Matrix a = z;
    for (double& v : a.a) v = apply_activation(layer.act, v);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
    cur = std::move(a);
  }
  return cur;
}

NetGradients zero_gradients(const DenseNetwork& net) {
  NetGradients g;
  g.dw.reserve(net.layers.size());
  g.db.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.dw.emplace_back(l.w.rows, l.w.cols);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void accumulate(NetGradients& into, const NetGradients& g) {
  for (std::size_t li = 0; li < into.dw.size(); ++li) {
    for (std::size_t k = 0; k < into.dw[li].a.size(); ++k) into.dw[li].a[k] += g.dw[li].a[k];
    for (std::size_t k = 0; k < into.db[li].size(); ++k) into.db[li][k] += g.db[li][k];
  }
}

Matrix backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& d_out,
                NetGradients& grads) {
  const auto n_layers = net.layers.size();
  if (cache.pre.size() != n_layers || cache.post.size() != n_layers) {
    throw DataError("backward: cache does not match network");
  }
  if (d_out.rows != cache.input.rows || d_out.cols != net.output_dim()) {
    throw DataError("backward: output gradient shape mismatch");
  }
  if (grads.dw.size() != n_layers) throw DataError("backward: gradient buffer mismatch");

  Matrix da = d_out;
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = net.layers[li];
    const Matrix& z = cache.pre[li];
    const Matrix& a = cache.post[li];
    const Matrix& x = li == 0 ? cache.input : cache.post[li - 1];
    if (da.rows != z.rows || da.cols != z.cols) {
      throw DataError("backward: stale cache at layer " + std::to_string(li));
    }

    Matrix dz = da;
    for (std::size_t k = 0; k < dz.a.size(); ++k) {
      dz.a[k] *= activation_grad(layer.act, z.a[k], a.a[k]);
    }

    Matrix& dw = grads.dw[li];
    std::vector<double>& db = grads.db[li];
    for (int n = 0; n < dz.rows; ++n) {
      const double* dzrow = dz.row(n);
      const double* xrow = x.row(n);
      for (int o = 0; o < layer.w.rows; ++o) {
        const double g = dzrow[o];
        if (g == 0.0) continue;
        double* dwrow = dw.row(o);
        for (int i = 0; i < layer.w.cols; ++i) dwrow[i] += g * xrow[i];
        db[o] += g;
      }
    }

    Matrix dx(dz.rows, layer.w.cols);
    for (int n = 0; n < dz.rows; ++n) {
      const double* dzrow = dz.row(n);
      double* dxrow = dx.row(n);
      for (int o = 0; o < layer.w.rows; ++o) {
        const double g = dzrow[o];
        if (g == 0.0) continue;
        const double* wrow = layer.w.row(o);
        for (int i = 0; i < layer.w.cols; ++i) dxrow[i] += g * wrow[i];
      }
    }
    da = std::move(dx);
  }
  return da;
}

BceResult bce_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows != target.rows || pred.cols != target.cols) {
    throw DataError("bce_loss: shape mismatch");
  }
  constexpr double kEps = 1e-7;
  const auto n = static_cast<double>(pred.a.size());
  BceResult res;
  res.d_pred = Matrix(pred.rows, pred.cols);
  double total = 0.0;
  for (std::size_t k = 0; k < pred.a.size(); ++k) {
    double p = pred.a[k];
    if (p < kEps) p = kEps;
    if (p > 1.0 - kEps) p = 1.0 - kEps;
    const double t = target.a[k];
    total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    res.d_pred.a[k] = (p - t) / (p * (1.0 - p)) / n;
  }
  res.value = total / n;
  return res;
}

KlResult gaussian_kl_loss(const Matrix& mu, const Matrix& logvar) {
  if (mu.rows != logvar.rows || mu.cols != logvar.cols) {
    throw DataError("gaussian_kl_loss: shape mismatch");
  }
  const auto batch = static_cast<double>(mu.rows);
  KlResult res;
  res.d_mu = Matrix(mu.rows, mu.cols);
  res.d_logvar = Matrix(mu.rows, mu.cols);
  double total = 0.0;
  for (std::size_t k = 0; k < mu.a.size(); ++k) {
    const double m = mu.a[k];
    const double lv = logvar.a[k];
    total += -0.5 * (1.0 + lv - m * m - std::exp(lv));
    res.d_mu.a[k] = m / batch;
    res.d_logvar.a[k] = 0.5 * (std::exp(lv) - 1.0) / batch;
  }
  res.value = total / batch;
  return res;
}

AdamState make_adam(const DenseNetwork& net, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& l : net.layers) {
    s.mw.emplace_back(l.w.rows, l.w.cols);
    s.vw.emplace_back(l.w.rows, l.w.cols);
    s.mb.emplace_back(l.b.size(), 0.0);
    s.vb.emplace_back(l.b.size(), 0.0);
  }
  return s;
}

namespace {

void adam_update(double* param, double* m, double* v, const double* g, std::size_t n,
                 const AdamState& s, double corr1, double corr2) {
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(g[k])) throw NumericalError("non-finite gradient in adam_step");
    m[k] = s.beta1 * m[k] + (1.0 - s.beta1) * g[k];
    v[k] = s.beta2 * v[k] + (1.0 - s.beta2) * g[k] * g[k];
    const double mhat = m[k] / corr1;
    const double vhat = v[k] / corr2;
    param[k] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
  }
}

}  // namespace

void adam_step(DenseNetwork& net, const NetGradients& grads, AdamState& state) {
  if (grads.dw.size() != net.layers.size()) throw DataError("adam_step: shape mismatch");
  state.step += 1;
  const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    auto& layer = net.layers[li];
    adam_update(layer.w.a.data(), state.mw[li].a.data(), state.vw[li].a.data(),
                grads.dw[li].a.data(), layer.w.a.size(), state, corr1, corr2);
    adam_update(layer.b.data(), state.mb[li].data(), state.vb[li].data(),
                grads.db[li].data(), layer.b.size(), state, corr1, corr2);
  }
}

std::vector<double*> parameter_slots(DenseNetwork& net) {
  std::vector<double*> slots;
  slots.reserve(net.param_count());
  for (auto& l : net.layers) {
    for (auto& w : l.w.a) slots.push_back(&w);
    for (auto& b : l.b) slots.push_back(&b);
  }
  return slots;
}

std::vector<double> flatten_gradients(const DenseNetwork& net, const NetGradients& g) {
  std::vector<double> flat;
  flat.reserve(net.param_count());
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    flat.insert(flat.end(), g.dw[li].a.begin(), g.dw[li].a.end());
    flat.insert(flat.end(), g.db[li].begin(), g.db[li].end());
  }
  return flat;
}

double grad_check_params(const std::vector<double*>& params,
                         const std::vector<double>& analytic,
                         const std::function<double()>& loss, double h) {
  if (params.size() != analytic.size()) throw DataError("grad_check: size mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    double& p = *params[k];
    const double saved = p;
    p = saved + h;
    const double up = loss();
    p = saved - h;
    const double down = loss();
    p = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[k];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

double grad_check(DenseNetwork& net,
                  const std::function<double(DenseNetwork&, NetGradients*)>& loss_fn,
                  double h) {
  NetGradients grads = zero_gradients(net);
  loss_fn(net, &grads);
  const auto analytic = flatten_gradients(net, grads);
  const auto slots = parameter_slots(net);
  return grad_check_params(slots, analytic, [&]() { return loss_fn(net, nullptr); }, h);
}

}  // namespace itgen
