#include "itgen/generative.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "itgen/util.hpp"

namespace itgen {

int latent_dim_for(int data_dim) {
  if (data_dim == 1) return 2;
  if (data_dim == 2) return 4;
  throw DataError("data_dim must be 1 or 2");
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Vae: return "vae";
    case ModelKind::Cvae: return "cvae";
    case ModelKind::Gan: return "gan";
  }
  throw DataError("invalid model kind");
}

ModelKind model_kind_from_name(std::string_view name) {
  if (name == "vae") return ModelKind::Vae;
  if (name == "cvae") return ModelKind::Cvae;
  if (name == "gan") return ModelKind::Gan;
  throw DataError("unknown model kind '" + std::string(name) + "'");
}

ModelKind model_kind(const GenerativeModel& m) {
  if (std::holds_alternative<VaeModel>(m)) return ModelKind::Vae;
  if (std::holds_alternative<CvaeModel>(m)) return ModelKind::Cvae;
  return ModelKind::Gan;
}

int model_data_dim(const GenerativeModel& m) {
  return std::visit([](const auto& x) { return x.data_dim; }, m);
}

const NormalizationSpec& model_norm(const GenerativeModel& m) {
  return std::visit([](const auto& x) -> const NormalizationSpec& { return x.norm; }, m);
}

std::array<double, kConditionDim> one_hot(ProductionState s) {
  std::array<double, kConditionDim> c{};
  c[state_index(s)] = 1.0;
  return c;
}

namespace {

Matrix hstack(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, a.cols + b.cols);
  for (int r = 0; r < a.rows; ++r) {
    std::copy(a.row(r), a.row(r) + a.cols, out.row(r));
    std::copy(b.row(r), b.row(r) + b.cols, out.row(r) + a.cols);
  }
  return out;
}

Matrix take_cols(const Matrix& m, int c0, int c1) {
  Matrix out(m.rows, c1 - c0);
  for (int r = 0; r < m.rows; ++r) {
    std::copy(m.row(r) + c0, m.row(r) + c1, out.row(r));
  }
  return out;
}

Matrix normal_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.a) v = rng.normal();
  return m;
}

void validate_unit_rows(const std::vector<std::vector<double>>& data, int expected_dim) {
  for (const auto& row : data) {
    if (static_cast<int>(row.size()) != expected_dim) {
      throw DataError("training rows have inconsistent dimensions");
    }
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("training data must be normalized into [0,1]");
      }
    }
  }
}

Matrix gather_batch(const std::vector<std::vector<double>>& data,
                    const std::vector<std::size_t>& order, std::size_t begin,
                    std::size_t end) {
  const int d = static_cast<int>(data.front().size());
  Matrix x(static_cast<int>(end - begin), d);
  for (std::size_t k = begin; k < end; ++k) {
    const auto& row = data[order[k]];
    std::copy(row.begin(), row.end(), x.row(static_cast<int>(k - begin)));
  }
  return x;
}

void check_train_config(const TrainConfig& cfg, std::size_t n) {
  if (cfg.batch_size <= 0 || cfg.epochs <= 0 || !(cfg.learning_rate > 0.0)) {
    throw DataError("invalid training configuration");
  }
  if (n < static_cast<std::size_t>(cfg.batch_size)) {
    throw DataError("need at least one full batch of training samples");
  }
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
  }
}

}  // namespace

Matrix reparameterize(const Matrix& mu, const Matrix& logvar, Rng& rng) {
  if (mu.rows != logvar.rows || mu.cols != logvar.cols) {
    throw DataError("reparameterize: shape mismatch");
  }
  Matrix z(mu.rows, mu.cols);
  for (std::size_t k = 0; k < z.a.size(); ++k) {
    z.a[k] = mu.a[k] + std::exp(0.5 * logvar.a[k]) * rng.normal();
  }
  return z;
}

PreparedData prepare_training_data(const std::vector<TrafficSample>& samples, int data_dim,
                                   std::optional<ProductionState> state_filter) {
  if (data_dim != 1 && data_dim != 2) throw DataError("data_dim must be 1 or 2");
  std::vector<std::vector<double>> raw;
  PreparedData out;
  for (const auto& s : samples) {
    if (state_filter && s.state != *state_filter) continue;
    if (data_dim == 2 && s.size_bytes <= 0) continue;
    if (data_dim == 1) {
      raw.push_back({s.interarrival_ms});
    } else {
      raw.push_back({s.interarrival_ms, static_cast<double>(s.size_bytes)});
    }
    out.states.push_back(s.state);
  }
  if (raw.size() < 2) {
    throw DataError("not enough samples to fit normalization" +
                    (state_filter ? " for state " + std::string(state_name(*state_filter))
                                  : std::string()));
  }
  out.norm = fit_normalization(raw);
  out.x.reserve(raw.size());
  for (const auto& row : raw) out.x.push_back(normalize(out.norm, row));
  return out;
}

double vae_loss_and_gradients(const DenseNetwork& encoder, const DenseNetwork& decoder,
                              const Matrix& x, const Matrix& condition, const Matrix& eps,
                              NetGradients* enc_grads, NetGradients* dec_grads,
                              double kl_weight) {
  const bool conditioned = condition.cols > 0;
  if (conditioned && condition.rows != x.rows) {
    throw DataError("condition batch size mismatch");
  }
  const int latent = eps.cols;

  ForwardCache enc_cache;
  const Matrix enc_in = conditioned ? hstack(x, condition) : x;
  const Matrix enc_out = forward(encoder, enc_in, &enc_cache);
  if (enc_out.cols != 2 * latent) throw DataError("encoder output must be [mu | logvar]");
  const Matrix mu = take_cols(enc_out, 0, latent);
  const Matrix logvar = take_cols(enc_out, latent, 2 * latent);

  Matrix z(x.rows, latent);
  for (std::size_t k = 0; k < z.a.size(); ++k) {
    z.a[k] = mu.a[k] + std::exp(0.5 * logvar.a[k]) * eps.a[k];
  }

  ForwardCache dec_cache;
  const Matrix dec_in = conditioned ? hstack(z, condition) : z;
  const Matrix recon = forward(decoder, dec_in, &dec_cache);

  const BceResult bce = bce_loss(recon, x);
  const KlResult kl = gaussian_kl_loss(mu, logvar);
  const double loss = bce.value + kl_weight * kl.value;
  if (enc_grads == nullptr && dec_grads == nullptr) return loss;

  NetGradients dec_scratch;
  NetGradients& dg = dec_grads ? *dec_grads : (dec_scratch = zero_gradients(decoder));
  const Matrix d_dec_in = backward(decoder, dec_cache, bce.d_pred, dg);
  if (enc_grads == nullptr) return loss;

  const Matrix dz = take_cols(d_dec_in, 0, latent);
  Matrix d_enc_out(x.rows, 2 * latent);
  for (int r = 0; r < x.rows; ++r) {
    for (int c = 0; c < latent; ++c) {
      const double sigma = std::exp(0.5 * logvar.at(r, c));
      d_enc_out.at(r, c) = dz.at(r, c) + kl_weight * kl.d_mu.at(r, c);
      d_enc_out.at(r, latent + c) =
          dz.at(r, c) * eps.at(r, c) * 0.5 * sigma + kl_weight * kl.d_logvar.at(r, c);
    }
  }
  backward(encoder, enc_cache, d_enc_out, *enc_grads);
  return loss;
}

namespace {

struct VaeNets {
  DenseNetwork encoder;
  DenseNetwork decoder;
};

VaeNets make_vae_nets(int data_dim, int latent, int condition_dim, Rng& rng) {
  VaeNets nets;
  nets.encoder = make_network(data_dim + condition_dim, kHiddenWidths, 2 * latent,
                              Activation::Relu, Activation::Linear, rng);
  nets.decoder = make_network(latent + condition_dim, kHiddenWidths, data_dim,
                              Activation::Relu, Activation::Sigmoid, rng);
  return nets;
}

// Shared VAE/CVAE loop; `conditions` is empty for the plain VAE.
std::vector<double> run_vae_training(DenseNetwork& encoder, DenseNetwork& decoder,
                                     const std::vector<std::vector<double>>& data,
                                     const std::vector<std::array<double, kConditionDim>>& conditions,
                                     int latent, const TrainConfig& cfg, Rng& rng) {
  const bool conditioned = !conditions.empty();
  AdamState enc_opt = make_adam(encoder, cfg.learning_rate);
  AdamState dec_opt = make_adam(decoder, cfg.learning_rate);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> history;
  history.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const Matrix x = gather_batch(data, order, begin, end);
      Matrix cond(0, 0);
      if (conditioned) {
        cond = Matrix(x.rows, kConditionDim);
        for (std::size_t k = begin; k < end; ++k) {
          const auto& c = conditions[order[k]];
          std::copy(c.begin(), c.end(), cond.row(static_cast<int>(k - begin)));
        }
      }
      const Matrix eps = normal_matrix(x.rows, latent, rng);
      NetGradients enc_g = zero_gradients(encoder);
      NetGradients dec_g = zero_gradients(decoder);
      const double loss = vae_loss_and_gradients(encoder, decoder, x, cond, eps, &enc_g,
                                                 &dec_g, 1.0 / x.rows);
      if (!std::isfinite(loss)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss * x.rows;
      adam_step(encoder, enc_g, enc_opt);
      adam_step(decoder, dec_g, dec_opt);
    }
    history.push_back(loss_sum / static_cast<double>(data.size()));
  }
  return history;
}

}  // namespace

VaeTrainResult train_vae(const std::vector<std::vector<double>>& data, const TrainConfig& cfg,
                         const NormalizationSpec& norm) {
  check_train_config(cfg, data.size());
  const int d = static_cast<int>(data.front().size());
  validate_unit_rows(data, d);
  const int latent = latent_dim_for(d);

  Rng rng(cfg.seed);
  VaeNets nets = make_vae_nets(d, latent, 0, rng);
  VaeTrainResult result;
  result.loss_history =
      run_vae_training(nets.encoder, nets.decoder, data, {}, latent, cfg, rng);
  result.model = VaeModel{std::move(nets.encoder), std::move(nets.decoder), d, latent, norm};
  return result;
}

CvaeTrainResult train_cvae(const std::vector<std::vector<double>>& data,
                           const std::vector<std::array<double, kConditionDim>>& conditions,
                           const TrainConfig& cfg, const NormalizationSpec& norm) {
  check_train_config(cfg, data.size());
  if (conditions.size() != data.size()) {
    throw DataError("train_cvae: conditions must align with data");
  }
  for (const auto& c : conditions) {
    int ones = 0;
    for (double v : c) {
      if (v == 1.0) ++ones;
      else if (v != 0.0) throw DataError("invalid one-hot condition");
    }
    if (ones != 1) throw DataError("invalid one-hot condition");
  }
  const int d = static_cast<int>(data.front().size());
  validate_unit_rows(data, d);
  const int latent = latent_dim_for(d);

  Rng rng(cfg.seed);
  VaeNets nets = make_vae_nets(d, latent, kConditionDim, rng);
  CvaeTrainResult result;
  result.loss_history =
      run_vae_training(nets.encoder, nets.decoder, data, conditions, latent, cfg, rng);
  result.model = CvaeModel{std::move(nets.encoder), std::move(nets.decoder), d, latent, norm};
  return result;
}

GanTrainResult train_gan(const std::vector<std::vector<double>>& data, const TrainConfig& cfg,
                         const NormalizationSpec& norm) {
  check_train_config(cfg, data.size());
  const int d = static_cast<int>(data.front().size());
  validate_unit_rows(data, d);
  const int latent = latent_dim_for(d);

  Rng rng(cfg.seed);
  GanModel model;
  model.data_dim = d;
  model.latent_dim = latent;
  model.norm = norm;
  model.generator = make_network(latent, kHiddenWidths, d, Activation::Relu,
                                 Activation::Sigmoid, rng);
  model.discriminator = make_network(d, kHiddenWidths, 1, Activation::Relu,
                                     Activation::Sigmoid, rng);
  AdamState gen_opt = make_adam(model.generator, cfg.learning_rate);
  AdamState disc_opt = make_adam(model.discriminator, cfg.learning_rate);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  GanTrainResult result;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double gen_sum = 0.0, disc_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const Matrix real = gather_batch(data, order, begin, end);
      const int b = real.rows;
      Matrix ones(b, 1), zeros(b, 1);
      for (double& v : ones.a) v = 1.0;

      // Discriminator step: real -> 1, generated -> 0.
      const Matrix fake = forward(model.generator, normal_matrix(b, latent, rng));
      ForwardCache real_cache, fake_cache;
      const Matrix d_real = forward(model.discriminator, real, &real_cache);
      const Matrix d_fake = forward(model.discriminator, fake, &fake_cache);
      const BceResult bce_real = bce_loss(d_real, ones);
      const BceResult bce_fake = bce_loss(d_fake, zeros);
      NetGradients disc_g = zero_gradients(model.discriminator);
      backward(model.discriminator, real_cache, bce_real.d_pred, disc_g);
      backward(model.discriminator, fake_cache, bce_fake.d_pred, disc_g);
      const double disc_loss = bce_real.value + bce_fake.value;
      if (!std::isfinite(disc_loss)) {
        throw NumericalError("non-finite discriminator loss at epoch " +
                             std::to_string(epoch));
      }
      adam_step(model.discriminator, disc_g, disc_opt);

      // Generator step: fresh noise, fooled-discriminator target.
      ForwardCache gen_cache;
      const Matrix z = normal_matrix(b, latent, rng);
      const Matrix fake2 = forward(model.generator, z, &gen_cache);
      ForwardCache disc_cache;
      const Matrix d_out = forward(model.discriminator, fake2, &disc_cache);
      const BceResult bce_gen = bce_loss(d_out, ones);
      NetGradients disc_scratch = zero_gradients(model.discriminator);
      const Matrix d_fake_grad =
          backward(model.discriminator, disc_cache, bce_gen.d_pred, disc_scratch);
      NetGradients gen_g = zero_gradients(model.generator);
      backward(model.generator, gen_cache, d_fake_grad, gen_g);
      if (!std::isfinite(bce_gen.value)) {
        throw NumericalError("non-finite generator loss at epoch " + std::to_string(epoch));
      }
      adam_step(model.generator, gen_g, gen_opt);

      gen_sum += bce_gen.value * b;
      disc_sum += disc_loss * b;
    }
    result.generator_loss.push_back(gen_sum / static_cast<double>(data.size()));
    result.discriminator_loss.push_back(disc_sum / static_cast<double>(data.size()));
  }
  result.model = std::move(model);
  return result;
}

namespace {

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out;
  out.reserve(m.rows);
  for (int r = 0; r < m.rows; ++r) out.emplace_back(m.row(r), m.row(r) + m.cols);
  return out;
}

}  // namespace

std::vector<std::vector<double>> sample_vae(const VaeModel& m, int n, Rng& rng) {
  if (n < 0) throw DataError("sample count must be >= 0");
  if (n == 0) return {};
  return rows_of(forward(m.decoder, normal_matrix(n, m.latent_dim, rng)));
}

std::vector<std::vector<double>> sample_cvae(const CvaeModel& m, ProductionState s, int n,
                                             Rng& rng) {
  if (n < 0) throw DataError("sample count must be >= 0");
  if (n == 0) return {};
  const auto c = one_hot(s);
  Matrix in(n, m.latent_dim + kConditionDim);
  for (int r = 0; r < n; ++r) {
    double* row = in.row(r);
    for (int k = 0; k < m.latent_dim; ++k) row[k] = rng.normal();
    std::copy(c.begin(), c.end(), row + m.latent_dim);
  }
  return rows_of(forward(m.decoder, in));
}

std::vector<std::vector<double>> sample_gan(const GanModel& m, int n, Rng& rng) {
  if (n < 0) throw DataError("sample count must be >= 0");
  if (n == 0) return {};
  return rows_of(forward(m.generator, normal_matrix(n, m.latent_dim, rng)));
}

std::vector<std::vector<double>> sample_normalized(const GenerativeModel& m,
                                                   std::optional<ProductionState> s, int n,
                                                   Rng& rng) {
  if (const auto* vae = std::get_if<VaeModel>(&m)) return sample_vae(*vae, n, rng);
  if (const auto* gan = std::get_if<GanModel>(&m)) return sample_gan(*gan, n, rng);
  const auto& cvae = std::get<CvaeModel>(m);
  if (!s) throw DataError("conditional model needs a production state to sample");
  return sample_cvae(cvae, *s, n, rng);
}

std::vector<std::vector<double>> sample_denormalized(const GenerativeModel& m,
                                                     std::optional<ProductionState> s, int n,
                                                     Rng& rng) {
  auto samples = sample_normalized(m, s, n, rng);
  const auto& norm = model_norm(m);
  for (auto& row : samples) row = denormalize(norm, row);
  return samples;
}

std::vector<double> sample_interarrivals_ms(const GenerativeModel& m,
                                            std::optional<ProductionState> s, int n,
                                            Rng& rng) {
  const auto samples = sample_normalized(m, s, n, rng);
  const auto& norm = model_norm(m);
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& row : samples) out.push_back(denormalize_value(norm, 0, row[0]));
  return out;
}

namespace {

constexpr int kModelFormatVersion = 1;

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "linear";
}

Activation activation_from_name(const std::string& s, const std::string& path) {
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "linear") return Activation::Linear;
  throw DataError(path + ": unknown activation '" + s + "'");
}

void write_network(std::ostream& out, const std::string& name, const DenseNetwork& net) {
  out << "net " << name << ' ' << net.layers.size() << '\n';
  for (const auto& layer : net.layers) {
    out << "layer " << layer.w.cols << ' ' << layer.w.rows << ' '
        << activation_name(layer.act) << '\n';
    for (int o = 0; o < layer.w.rows; ++o) {
      const double* row = layer.w.row(o);
      for (int i = 0; i < layer.w.cols; ++i) {
        out << fmt_double(row[i]) << (i + 1 < layer.w.cols ? ' ' : '\n');
      }
    }
    for (std::size_t i = 0; i < layer.b.size(); ++i) {
      out << fmt_double(layer.b[i]) << (i + 1 < layer.b.size() ? ' ' : '\n');
    }
  }
}

DenseNetwork read_network(std::istream& in, const std::string& expected_name,
                          const std::string& path) {
  std::string tag, name;
  std::size_t n_layers = 0;
  if (!(in >> tag >> name >> n_layers) || tag != "net" || name != expected_name) {
    throw DataError(path + ": truncated file (expected net " + expected_name + ")");
  }
  DenseNetwork net;
  for (std::size_t li = 0; li < n_layers; ++li) {
    int in_dim = 0, out_dim = 0;
    std::string act;
    if (!(in >> tag >> in_dim >> out_dim >> act) || tag != "layer" || in_dim <= 0 ||
        out_dim <= 0) {
      throw DataError(path + ": truncated file (layer header)");
    }
    DenseLayer layer;
    layer.act = activation_from_name(act, path);
    layer.w = Matrix(out_dim, in_dim);
    layer.b.assign(out_dim, 0.0);
    std::string num;
    for (double& w : layer.w.a) {
      if (!(in >> num)) throw DataError(path + ": truncated file (weights)");
      w = parse_double(num, path);
    }
    for (double& b : layer.b) {
      if (!(in >> num)) throw DataError(path + ": truncated file (biases)");
      b = parse_double(num, path);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void write_norm(std::ostream& out, const NormalizationSpec& norm) {
  out << "normalization " << norm.dims() << '\n';
  for (int d = 0; d < norm.dims(); ++d) {
    out << "dim " << fmt_double(norm.min_log[d]) << ' ' << fmt_double(norm.max_log[d])
        << '\n';
  }
}

NormalizationSpec read_norm(std::istream& in, const std::string& path) {
  std::string tag;
  int dims = 0;
  if (!(in >> tag >> dims) || tag != "normalization" || dims <= 0) {
    throw DataError(path + ": truncated file (normalization)");
  }
  NormalizationSpec norm;
  for (int d = 0; d < dims; ++d) {
    std::string lo, hi;
    if (!(in >> tag >> lo >> hi) || tag != "dim") {
      throw DataError(path + ": truncated file (normalization dim)");
    }
    norm.min_log.push_back(parse_double(lo, path));
    norm.max_log.push_back(parse_double(hi, path));
  }
  return norm;
}

}  // namespace

void save_model(const GenerativeModel& m, const std::string& path) {
  std::ostringstream out;
  out << "itgen-model version " << kModelFormatVersion << '\n';
  out << "kind " << model_kind_name(model_kind(m)) << '\n';
  std::visit(
      [&](const auto& model) {
        out << "data_dim " << model.data_dim << '\n';
        out << "latent_dim " << model.latent_dim << '\n';
        write_norm(out, model.norm);
      },
      m);
  if (const auto* vae = std::get_if<VaeModel>(&m)) {
    write_network(out, "encoder", vae->encoder);
    write_network(out, "decoder", vae->decoder);
  } else if (const auto* cvae = std::get_if<CvaeModel>(&m)) {
    write_network(out, "encoder", cvae->encoder);
    write_network(out, "decoder", cvae->decoder);
  } else {
    const auto& gan = std::get<GanModel>(m);
    write_network(out, "generator", gan.generator);
    write_network(out, "discriminator", gan.discriminator);
  }
  out << "end\n";
  write_text_file(path, out.str());
}

GenerativeModel load_model(const std::string& path, std::optional<ModelKind> expected) {
  std::istringstream in(read_text_file(path));
  std::string magic, word;
  int version = -1;
  in >> magic >> word >> version;
  if (!in || magic != "itgen-model" || word != "version") {
    throw DataError(path + ": not a generative model file");
  }
  if (version != kModelFormatVersion) {
    throw DataError(path + ": unsupported model file version " + std::to_string(version));
  }
  std::string kind_name;
  if (!(in >> word >> kind_name) || word != "kind") {
    throw DataError(path + ": truncated file (kind)");
  }
  const ModelKind kind = model_kind_from_name(kind_name);
  if (expected && *expected != kind) {
    throw DataError(path + ": model kind mismatch: expected " +
                    std::string(model_kind_name(*expected)) + ", found " + kind_name);
  }
  int data_dim = 0, latent_dim = 0;
  if (!(in >> word >> data_dim) || word != "data_dim" || data_dim <= 0) {
    throw DataError(path + ": truncated file (data_dim)");
  }
  if (!(in >> word >> latent_dim) || word != "latent_dim" || latent_dim <= 0) {
    throw DataError(path + ": truncated file (latent_dim)");
  }
  NormalizationSpec norm = read_norm(in, path);
  if (norm.dims() != data_dim) {
    throw DataError(path + ": normalization dimensions do not match data_dim");
  }

  GenerativeModel model;
  switch (kind) {
    case ModelKind::Vae: {
      VaeModel m;
      m.encoder = read_network(in, "encoder", path);
      m.decoder = read_network(in, "decoder", path);
      m.data_dim = data_dim;
      m.latent_dim = latent_dim;
      m.norm = std::move(norm);
      if (m.encoder.input_dim() != data_dim || m.decoder.input_dim() != latent_dim ||
          m.encoder.output_dim() != 2 * latent_dim || m.decoder.output_dim() != data_dim) {
        throw DataError(path + ": network dimensions do not match header");
      }
      model = std::move(m);
      break;
    }
    case ModelKind::Cvae: {
      CvaeModel m;
      m.encoder = read_network(in, "encoder", path);
      m.decoder = read_network(in, "decoder", path);
      m.data_dim = data_dim;
      m.latent_dim = latent_dim;
      m.norm = std::move(norm);
      if (m.encoder.input_dim() != data_dim + kConditionDim ||
          m.decoder.input_dim() != latent_dim + kConditionDim ||
          m.encoder.output_dim() != 2 * latent_dim || m.decoder.output_dim() != data_dim) {
        throw DataError(path + ": network dimensions do not match header");
      }
      model = std::move(m);
      break;
    }
    case ModelKind::Gan: {
      GanModel m;
      m.generator = read_network(in, "generator", path);
      m.discriminator = read_network(in, "discriminator", path);
      m.data_dim = data_dim;
      m.latent_dim = latent_dim;
      m.norm = std::move(norm);
      if (m.generator.input_dim() != latent_dim || m.generator.output_dim() != data_dim ||
          m.discriminator.input_dim() != data_dim || m.discriminator.output_dim() != 1) {
        throw DataError(path + ": network dimensions do not match header");
      }
      model = std::move(m);
      break;
    }
  }
  std::string tail;
  if (!(in >> tail) || tail != "end") throw DataError(path + ": truncated file (missing end)");
  return model;
}

}  // namespace itgen
