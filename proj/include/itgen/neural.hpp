#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "itgen/core.hpp"
#include "itgen/rng.hpp"

namespace itgen {

// Row-major dense matrix; rows index batch samples in activations.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
};

enum class Activation { Relu, Sigmoid, Linear };

struct DenseLayer {
  Matrix w;  // out x in
  std::vector<double> b;
  Activation act = Activation::Linear;
};

struct DenseNetwork {
  std::vector<DenseLayer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().w.cols; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().w.rows; }
  std::size_t param_count() const;
};

// Fully connected in -> hidden... -> out with Glorot-uniform weights and zero
// biases. All hidden layers share `hidden_act`.
DenseNetwork make_network(int in_dim, std::span<const int> hidden, int out_dim,
                          Activation hidden_act, Activation out_act, Rng& rng);

// The architecture used by every model here: five hidden layers.
inline constexpr std::array<int, 5> kHiddenWidths = {32, 64, 32, 16, 32};

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // per layer, before activation
  std::vector<Matrix> post;  // per layer, after activation
};

// Returns the final activation; fills `cache` for backward() when given.
Matrix forward(const DenseNetwork& net, const Matrix& x, ForwardCache* cache = nullptr);

struct NetGradients {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;
};

NetGradients zero_gradients(const DenseNetwork& net);
void accumulate(NetGradients& into, const NetGradients& g);

// Exact reverse-mode gradients of forward(); `d_out` is dLoss/d(output).
// Returns dLoss/d(input). Gradients are ADDED into `grads`.
Matrix backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& d_out,
                NetGradients& grads);

struct BceResult {
  double value = 0.0;
  Matrix d_pred;
};

// Mean over all elements of -[t ln p + (1-t) ln(1-p)], p clamped to
// [1e-7, 1-1e-7].
BceResult bce_loss(const Matrix& pred, const Matrix& target);

struct KlResult {
  double value = 0.0;
  Matrix d_mu;
  Matrix d_logvar;
};

// KL(N(mu, e^logvar) || N(0, I)) summed over dimensions, mean over batch.
KlResult gaussian_kl_loss(const Matrix& mu, const Matrix& logvar);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> mw, vw;
  std::vector<std::vector<double>> mb, vb;
};

AdamState make_adam(const DenseNetwork& net, double learning_rate);

// Bias-corrected Adam update. Throws NumericalError on non-finite gradients.
void adam_step(DenseNetwork& net, const NetGradients& grads, AdamState& state);

// Central-difference check of `analytic` against `loss()` over the given
// parameter slots. Returns max over parameters of
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double grad_check_params(const std::vector<double*>& params,
                         const std::vector<double>& analytic,
                         const std::function<double()>& loss, double h = 1e-5);

// Convenience form for a single network: loss_fn must return the loss and,
// when `grads` is non-null, fill it with analytic gradients.
double grad_check(DenseNetwork& net,
                  const std::function<double(DenseNetwork&, NetGradients*)>& loss_fn,
                  double h = 1e-5);

std::vector<double*> parameter_slots(DenseNetwork& net);
std::vector<double> flatten_gradients(const DenseNetwork& net, const NetGradients& g);

}  // namespace itgen
