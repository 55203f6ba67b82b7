#include <doctest.h>

#include <cmath>

#include "itgen/generative.hpp"
#include "itgen/util.hpp"

using namespace itgen;

namespace {

// Small config for unit-level training runs; the full-protocol runs live in
// the acceptance suite.
TrainConfig small_config(int epochs, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = seed;
  return cfg;
}

std::vector<std::vector<double>> constant_data(int n, double value) {
  return std::vector<std::vector<double>>(n, {value});
}

}  // namespace

TEST_CASE("reparameterize: zero variance collapses to the mean") {
  Matrix mu(4, 2), logvar(4, 2);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 2; ++c) {
      mu.at(r, c) = 0.1 * r + c;
      logvar.at(r, c) = -50.0;
    }
  }
  Rng rng(1);
  const auto z = reparameterize(mu, logvar, rng);
  for (std::size_t k = 0; k < z.a.size(); ++k) {
    CHECK(std::abs(z.a[k] - mu.a[k]) < 1e-10);
  }
}

TEST_CASE("reparameterize: standard normal moments") {
  Matrix mu(100000, 1), logvar(100000, 1);
  Rng rng(2);
  const auto z = reparameterize(mu, logvar, rng);
  double mean = 0.0, var = 0.0;
  for (double v : z.a) mean += v;
  mean /= static_cast<double>(z.a.size());
  for (double v : z.a) var += (v - mean) * (v - mean);
  var /= static_cast<double>(z.a.size());
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);

  Rng a(3), b(3);
  Matrix m1(2, 2), lv1(2, 2);
  const auto za = reparameterize(m1, lv1, a);
  const auto zb = reparameterize(m1, lv1, b);
  for (std::size_t k = 0; k < za.a.size(); ++k) CHECK(za.a[k] == zb.a[k]);
}

TEST_CASE("prepare_training_data normalizes and filters") {
  std::vector<TrafficSample> samples = {{10.0, 32, ProductionState::Running},
                                        {100.0, 64, ProductionState::Running},
                                        {5.0, 0, ProductionState::Stopped},
                                        {50.0, 128, ProductionState::Stopped}};
  const auto all = prepare_training_data(samples, 1, std::nullopt);
  CHECK(all.x.size() == 4);
  for (const auto& row : all.x) {
    CHECK(row.size() == 1);
    CHECK(row[0] >= 0.0);
    CHECK(row[0] <= 1.0);
  }

  const auto running = prepare_training_data(samples, 1, ProductionState::Running);
  CHECK(running.x.size() == 2);
  CHECK(running.x[0][0] == 0.0);
  CHECK(running.x[1][0] == 1.0);

  // 2D drops zero-size samples (no byte content to log-rescale).
  const auto joint = prepare_training_data(samples, 2, std::nullopt);
  CHECK(joint.x.size() == 3);
  for (const auto& row : joint.x) CHECK(row.size() == 2);

  CHECK_THROWS_AS(prepare_training_data(samples, 2, ProductionState::Aborted), DataError);
}

TEST_CASE("train_vae on constant data reconstructs the constant") {
  const auto data = constant_data(64, 0.5);
  NormalizationSpec norm{{0.0}, {1.0}};
  const auto result = train_vae(data, small_config(200, 7), norm);
  CHECK(result.loss_history.size() == 200);

  Rng rng(8);
  const auto gen = sample_vae(result.model, 200, rng);
  double mean = 0.0;
  for (const auto& row : gen) {
    CHECK(row[0] > 0.0);
    CHECK(row[0] < 1.0);
    mean += row[0];
  }
  mean /= static_cast<double>(gen.size());
  CHECK(std::abs(mean - 0.5) < 0.05);
}

TEST_CASE("train_vae is deterministic per seed") {
  const auto data = constant_data(40, 0.3);
  NormalizationSpec norm{{0.0}, {1.0}};
  const auto a = train_vae(data, small_config(5, 11), norm);
  const auto b = train_vae(data, small_config(5, 11), norm);
  REQUIRE(a.loss_history.size() == b.loss_history.size());
  for (std::size_t k = 0; k < a.loss_history.size(); ++k) {
    CHECK(a.loss_history[k] == b.loss_history[k]);
  }
  const auto c = train_vae(data, small_config(5, 12), norm);
  CHECK(a.loss_history.back() != c.loss_history.back());
}

TEST_CASE("train_vae validates inputs") {
  NormalizationSpec norm{{0.0}, {1.0}};
  CHECK_THROWS_AS(train_vae(constant_data(10, 0.5), small_config(5, 1), norm), DataError);
  CHECK_THROWS_AS(train_vae(constant_data(64, 1.5), small_config(5, 1), norm), DataError);
}

TEST_CASE("sample_vae edge cases") {
  const auto result =
      train_vae(constant_data(32, 0.5), small_config(2, 3), NormalizationSpec{{0.0}, {1.0}});
  Rng rng(4);
  CHECK(sample_vae(result.model, 0, rng).empty());
  Rng r1(5), r2(5);
  const auto s1 = sample_vae(result.model, 3, r1);
  const auto s2 = sample_vae(result.model, 3, r2);
  for (std::size_t k = 0; k < s1.size(); ++k) CHECK(s1[k][0] == s2[k][0]);
}

TEST_CASE("train_cvae conditions on the production state") {
  // Five states pinned to distinct constants; conditional sampling must
  // recover the planted ordering.
  std::vector<std::vector<double>> data;
  std::vector<std::array<double, kConditionDim>> conditions;
  const std::array<double, kNumStates> planted = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (int rep = 0; rep < 40; ++rep) {
    for (ProductionState s : kAllStates) {
      data.push_back({planted[state_index(s)]});
      conditions.push_back(one_hot(s));
    }
  }
  NormalizationSpec norm{{0.0}, {1.0}};
  const auto result = train_cvae(data, conditions, small_config(150, 9), norm);

  std::array<double, kNumStates> means{};
  for (ProductionState s : kAllStates) {
    Rng rng(10 + state_index(s));
    const auto gen = sample_cvae(result.model, s, 200, rng);
    double mean = 0.0;
    for (const auto& row : gen) mean += row[0];
    means[state_index(s)] = mean / static_cast<double>(gen.size());
    CHECK(std::abs(means[state_index(s)] - planted[state_index(s)]) < 0.1);
  }
  CHECK(std::is_sorted(means.begin(), means.end()));
}

TEST_CASE("train_cvae rejects invalid one-hot conditions") {
  auto data = constant_data(32, 0.5);
  std::vector<std::array<double, kConditionDim>> bad(32, {0.5, 0.5, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(train_cvae(data, bad, small_config(2, 1), NormalizationSpec{{0.0}, {1.0}}),
                  DataError);
  std::vector<std::array<double, kConditionDim>> two(32, {1.0, 1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(train_cvae(data, two, small_config(2, 1), NormalizationSpec{{0.0}, {1.0}}),
                  DataError);
  CHECK(one_hot(ProductionState::Running) ==
        std::array<double, kConditionDim>{1.0, 0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("train_gan drifts toward the data and stays finite") {
  const auto data = constant_data(64, 0.5);
  NormalizationSpec norm{{0.0}, {1.0}};
  const auto result = train_gan(data, small_config(120, 13), norm);
  CHECK(result.generator_loss.size() == 120);
  CHECK(result.discriminator_loss.size() == 120);
  for (double v : result.generator_loss) CHECK(std::isfinite(v));
  for (double v : result.discriminator_loss) CHECK(std::isfinite(v));

  Rng rng(14);
  const auto gen = sample_gan(result.model, 300, rng);
  double mean = 0.0;
  for (const auto& row : gen) {
    CHECK(row[0] > 0.0);
    CHECK(row[0] < 1.0);
    mean += row[0];
  }
  mean /= static_cast<double>(gen.size());
  CHECK(std::abs(mean - 0.5) < 0.15);
}

TEST_CASE("model persistence round trips bitwise") {
  const auto result =
      train_vae(constant_data(32, 0.4), small_config(3, 21), NormalizationSpec{{0.1}, {2.3}});
  const GenerativeModel model(result.model);
  const std::string p1 = "test_model_rt1.model";
  const std::string p2 = "test_model_rt2.model";
  save_model(model, p1);
  const auto loaded = load_model(p1);
  save_model(loaded, p2);
  CHECK(read_text_file(p1) == read_text_file(p2));

  // Same seed, same samples before and after the round trip.
  Rng ra(33), rb(33);
  const auto sa = sample_normalized(model, std::nullopt, 5, ra);
  const auto sb = sample_normalized(loaded, std::nullopt, 5, rb);
  for (std::size_t k = 0; k < sa.size(); ++k) CHECK(sa[k][0] == sb[k][0]);

  CHECK(model_kind(loaded) == ModelKind::Vae);
  CHECK_THROWS_WITH_AS(load_model(p1, ModelKind::Gan), doctest::Contains("kind"), DataError);

  auto text = read_text_file(p1);
  text.replace(text.find("version 1"), 9, "version 99");
  write_text_file(p2, text);
  CHECK_THROWS_WITH_AS(load_model(p2), doctest::Contains("version"), DataError);

  write_text_file(p2, read_text_file(p1).substr(0, 200));
  CHECK_THROWS_WITH_AS(load_model(p2), doctest::Contains("truncated"), DataError);

  write_text_file(p2, "something else entirely\n");
  CHECK_THROWS_AS(load_model(p2), DataError);

  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("vae composite gradients pass the finite-difference check") {
  Rng rng(55);
  auto enc = make_network(1, std::array<int, 2>{8, 6}, 4, Activation::Relu,
                          Activation::Linear, rng);
  auto dec = make_network(2, std::array<int, 2>{8, 6}, 1, Activation::Relu,
                          Activation::Sigmoid, rng);
  Matrix x(4, 1);
  for (double& v : x.a) v = 0.2 + 0.6 * rng.uniform();
  Matrix eps(4, 2);
  for (double& v : eps.a) v = rng.normal();
  const Matrix no_cond(0, 0);

  NetGradients enc_g = zero_gradients(enc);
  NetGradients dec_g = zero_gradients(dec);
  vae_loss_and_gradients(enc, dec, x, no_cond, eps, &enc_g, &dec_g);

  auto params = parameter_slots(enc);
  const auto dec_params = parameter_slots(dec);
  params.insert(params.end(), dec_params.begin(), dec_params.end());
  auto analytic = flatten_gradients(enc, enc_g);
  const auto dec_flat = flatten_gradients(dec, dec_g);
  analytic.insert(analytic.end(), dec_flat.begin(), dec_flat.end());

  const double err = grad_check_params(params, analytic, [&]() {
    return vae_loss_and_gradients(enc, dec, x, no_cond, eps, nullptr, nullptr);
  });
  CHECK(err < 1e-4);
}
