#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "itgen/core.hpp"
#include "itgen/neural.hpp"
#include "itgen/rng.hpp"

namespace itgen {

struct TrainConfig {
  int batch_size = 32;
  int epochs = 500;
  double learning_rate = 1e-3;
  double train_ratio = 0.7;
  std::uint64_t seed = 0;
};

// Latent width is tied to the data width: 2 for interarrival-only models,
// 4 for joint (interarrival, size) models.
int latent_dim_for(int data_dim);

struct VaeModel {
  DenseNetwork encoder;  // data_dim -> hidden -> [mu | logvar] (linear)
  DenseNetwork decoder;  // latent_dim -> hidden -> data_dim (sigmoid)
  int data_dim = 1;
  int latent_dim = 2;
  NormalizationSpec norm;
};

struct CvaeModel {
  DenseNetwork encoder;  // data_dim + 5 -> hidden -> [mu | logvar]
  DenseNetwork decoder;  // latent_dim + 5 -> hidden -> data_dim (sigmoid)
  int data_dim = 1;
  int latent_dim = 2;
  NormalizationSpec norm;
};

inline constexpr int kConditionDim = kNumStates;

struct GanModel {
  DenseNetwork generator;      // latent_dim -> hidden -> data_dim (sigmoid)
  DenseNetwork discriminator;  // data_dim -> hidden -> 1 (sigmoid)
  int data_dim = 1;
  int latent_dim = 2;
  NormalizationSpec norm;
};

enum class ModelKind { Vae, Cvae, Gan };

std::string_view model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(std::string_view name);

using GenerativeModel = std::variant<VaeModel, CvaeModel, GanModel>;

ModelKind model_kind(const GenerativeModel& m);
int model_data_dim(const GenerativeModel& m);
const NormalizationSpec& model_norm(const GenerativeModel& m);

std::array<double, kConditionDim> one_hot(ProductionState s);

// z = mu + exp(logvar/2) * eps with eps ~ N(0, I).
Matrix reparameterize(const Matrix& mu, const Matrix& logvar, Rng& rng);

// Normalized training data: every row in [0,1]^d with d in {1,2}, plus the
// fitted spec and (for CVAE) aligned state labels.
struct PreparedData {
  std::vector<std::vector<double>> x;
  std::vector<ProductionState> states;
  NormalizationSpec norm;
};

// Log-rescales and min-max normalizes raw samples. data_dim 2 uses
// (interarrival, size) and skips zero-size samples, which have no byte
// content to place on a log scale.
PreparedData prepare_training_data(const std::vector<TrafficSample>& samples, int data_dim,
                                   std::optional<ProductionState> state_filter);

struct VaeTrainResult {
  VaeModel model;
  std::vector<double> loss_history;  // one entry per epoch
};

struct CvaeTrainResult {
  CvaeModel model;
  std::vector<double> loss_history;
};

struct GanTrainResult {
  GanModel model;
  std::vector<double> generator_loss;
  std::vector<double> discriminator_loss;
};

// Mini-batch Adam on the reconstruction + KL objective for cfg.epochs
// epochs. The reconstruction cross entropy is summed over the mini-batch
// while the KL regularizer is averaged over it (per-sample weight
// 1/batch); with unit KL weight the one-dimensional objective's optimum is
// a constant generator, which defeats the model's purpose.
VaeTrainResult train_vae(const std::vector<std::vector<double>>& data, const TrainConfig& cfg,
                         const NormalizationSpec& norm);

// As train_vae with the one-hot condition concatenated to both encoder and
// decoder inputs; a single model covers all five states.
CvaeTrainResult train_cvae(const std::vector<std::vector<double>>& data,
                           const std::vector<std::array<double, kConditionDim>>& conditions,
                           const TrainConfig& cfg, const NormalizationSpec& norm);

// Alternating updates, one discriminator step then one generator step per
// batch. Discriminator sees normalized data, like the other models.
GanTrainResult train_gan(const std::vector<std::vector<double>>& data, const TrainConfig& cfg,
                         const NormalizationSpec& norm);

// Decoder/generator samples in normalized space, each in (0,1)^d.
std::vector<std::vector<double>> sample_vae(const VaeModel& m, int n, Rng& rng);
std::vector<std::vector<double>> sample_cvae(const CvaeModel& m, ProductionState s, int n,
                                             Rng& rng);
std::vector<std::vector<double>> sample_gan(const GanModel& m, int n, Rng& rng);

std::vector<std::vector<double>> sample_normalized(const GenerativeModel& m,
                                                   std::optional<ProductionState> s, int n,
                                                   Rng& rng);

// Samples mapped back to physical units (ms, and bytes for 2D models).
std::vector<std::vector<double>> sample_denormalized(const GenerativeModel& m,
                                                     std::optional<ProductionState> s, int n,
                                                     Rng& rng);

// Interarrival marginal in ms (first dimension).
std::vector<double> sample_interarrivals_ms(const GenerativeModel& m,
                                            std::optional<ProductionState> s, int n, Rng& rng);

// BCE + kl_weight * KL for a fixed batch and fixed reparameterization
// noise; fills analytic gradients when buffers are given. The trainers pass
// kl_weight = 1/batch; the gradient checker uses the unit-weight composite.
double vae_loss_and_gradients(const DenseNetwork& encoder, const DenseNetwork& decoder,
                              const Matrix& x, const Matrix& condition, const Matrix& eps,
                              NetGradients* enc_grads, NetGradients* dec_grads,
                              double kl_weight = 1.0);

// Versioned plain-text persistence; save -> load -> save is byte-identical.
void save_model(const GenerativeModel& m, const std::string& path);
GenerativeModel load_model(const std::string& path,
                           std::optional<ModelKind> expected = std::nullopt);

}  // namespace itgen
