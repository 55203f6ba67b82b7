#include "itgen/cli.hpp"

#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "itgen/eval.hpp"
#include "itgen/generative.hpp"
#include "itgen/ingest.hpp"
#include "itgen/smp.hpp"
#include "itgen/traffic.hpp"
#include "itgen/util.hpp"

namespace itgen {

namespace fs = std::filesystem;

namespace {

std::string ensure_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) throw DataError("--out-dir is required");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + out_dir + "'");
  return out_dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    std::uint64_t seed, const nlohmann::json& config,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  for (const auto& path : outputs) {
    j["outputs"].push_back({{"path", path}, {"fnv1a64", fnv1a_file_hex(path)}});
  }
  write_text_file(join(out_dir, "manifest_" + command + ".json"), j.dump(2) + "\n");
}

}  // namespace

void cmd_synth_data(const SynthDataConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const SyntheticSpec spec =
      cfg.spec_path.empty() ? default_synthetic_spec() : load_synthetic_spec(cfg.spec_path);
  const SyntheticDataset data = generate_synthetic_dataset(spec, cfg.jumps, cfg.seed);

  const std::string log_path = join(cfg.out_dir, "synthetic_log.csv");
  const std::string map_path = join(cfg.out_dir, "state_map.csv");
  const std::string spec_path = join(cfg.out_dir, "ground_truth.json");
  write_log_csv(data.trace, log_path);
  write_state_map_csv(map_path);
  save_synthetic_spec(spec, spec_path);

  const auto counts = data.state_counts();
  std::cout << "synth-data: " << data.trace.episodes.size() << " episodes, "
            << data.samples.size() << " samples\n";
  for (ProductionState s : kAllStates) {
    std::cout << "  " << state_name(s) << ": " << counts[state_index(s)] << " samples\n";
  }

  write_manifest(cfg.out_dir, "synth-data", cfg.seed,
                 {{"jumps", cfg.jumps}, {"spec", cfg.spec_path}},
                 {log_path, map_path, spec_path});
}

void cmd_ingest(const IngestConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const auto records = parse_log(cfg.log_path);
  const auto map = load_state_map(cfg.state_map_path);
  const auto trace = annotate_states(records, map);
  const auto samples = extract_samples(trace);
  if (samples.empty()) throw DataError("log produced no traffic samples");

  const std::string samples_path = join(cfg.out_dir, "samples.csv");
  const std::string episodes_path = join(cfg.out_dir, "episodes.csv");
  save_samples_csv(samples, samples_path);
  save_episodes_csv(trace, episodes_path);

  const auto stats = count_transitions(trace);
  nlohmann::json summary;
  std::array<std::int64_t, kNumStates> per_state{};
  for (const auto& s : samples) per_state[state_index(s.state)]++;
  std::cout << "ingest: " << trace.episodes.size() << " episodes, " << samples.size()
            << " samples\n";
  std::cout << "transition counts (rows from, columns to):\n";
  for (int i = 0; i < kNumStates; ++i) {
    std::cout << "  " << state_name(state_from_code(i + 1)) << ":";
    for (int j = 0; j < kNumStates; ++j) std::cout << ' ' << stats.counts[i][j];
    std::cout << '\n';
    summary["transition_counts"].push_back(stats.counts[i]);
  }
  for (ProductionState s : kAllStates) {
    summary["sample_counts"][std::string(state_name(s))] = per_state[state_index(s)];
    std::cout << "  " << state_name(s) << ": " << per_state[state_index(s)]
              << " samples\n";
  }
  const std::string summary_path = join(cfg.out_dir, "summary.json");
  write_text_file(summary_path, summary.dump(2) + "\n");

  write_manifest(cfg.out_dir, "ingest", 0,
                 {{"log", cfg.log_path}, {"state_map", cfg.state_map_path}},
                 {samples_path, episodes_path, summary_path});
}

void cmd_fit_smp(const FitSmpConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const auto trace = load_episodes_csv(cfg.episodes_path);
  const auto model = fit_smp(trace);
  const std::string out_path = join(cfg.out_dir, cfg.out_name);
  save_smp(model, out_path);

  for (const auto dead : model.dead_states()) {
    std::cout << "warning: state " << state_name(dead)
              << " is never left in the data; traces stop there\n";
  }
  std::cout << "fit-smp: wrote " << out_path << '\n';
  write_manifest(cfg.out_dir, "fit-smp", 0, {{"episodes", cfg.episodes_path}}, {out_path});
}

std::string model_file_name(const std::string& kind, const std::string& mode,
                            const std::optional<std::string>& state) {
  std::string stem = kind + "_" + mode;
  if (state) stem += "_" + *state;
  return stem + ".model";
}

namespace {

void write_loss_csv(const std::string& path, const std::vector<double>& loss) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < loss.size(); ++e) {
    out << e + 1 << ',' << fmt_double(loss[e]) << '\n';
  }
  write_text_file(path, out.str());
}

void write_gan_loss_csv(const std::string& path, const GanTrainResult& result) {
  std::ostringstream out;
  out << "epoch,generator_loss,discriminator_loss\n";
  for (std::size_t e = 0; e < result.generator_loss.size(); ++e) {
    out << e + 1 << ',' << fmt_double(result.generator_loss[e]) << ','
        << fmt_double(result.discriminator_loss[e]) << '\n';
  }
  write_text_file(path, out.str());
}

struct TrainedFiles {
  std::vector<std::string> outputs;
};

TrainConfig to_train_config(const TrainCommandConfig& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.learning_rate;
  tc.train_ratio = cfg.split_ratio;
  tc.seed = seed;
  return tc;
}

// Trains one per-state model (vae or gan) and writes its artifacts.
TrainedFiles train_one_state(const TrainCommandConfig& cfg,
                             const std::vector<TrafficSample>& train_samples, int data_dim,
                             ProductionState state, std::uint64_t seed) {
  const auto prepared = prepare_training_data(train_samples, data_dim, state);
  const TrainConfig tc = to_train_config(cfg, seed);
  const std::string state_str(state_name(state));
  const std::string stem = cfg.kind + "_" + cfg.mode + "_" + state_str;
  const std::string model_path = join(cfg.out_dir, stem + ".model");
  const std::string loss_path = join(cfg.out_dir, stem + "_loss.csv");
  if (cfg.kind == "vae") {
    auto result = train_vae(prepared.x, tc, prepared.norm);
    save_model(GenerativeModel(std::move(result.model)), model_path);
    write_loss_csv(loss_path, result.loss_history);
  } else {
    auto result = train_gan(prepared.x, tc, prepared.norm);
    save_model(GenerativeModel(std::move(result.model)), model_path);
    write_gan_loss_csv(loss_path, result);
  }
  return {{model_path, loss_path}};
}

}  // namespace

void cmd_train(const TrainCommandConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  if (cfg.kind != "vae" && cfg.kind != "cvae" && cfg.kind != "gan") {
    throw DataError("--kind must be vae, cvae or gan");
  }
  if (cfg.mode != "1d" && cfg.mode != "2d") throw DataError("--mode must be 1d or 2d");
  if (cfg.kind == "cvae" && cfg.state) {
    throw DataError("cvae trains a single model for all states; drop --state");
  }
  const int data_dim = cfg.mode == "1d" ? 1 : 2;

  const auto samples = load_samples_csv(cfg.samples_path);
  const auto split = split_dataset(samples, cfg.split_ratio, cfg.seed);

  std::vector<std::string> outputs;
  if (cfg.kind == "cvae") {
    auto prepared = prepare_training_data(split.train, data_dim, std::nullopt);
    std::vector<std::array<double, kConditionDim>> conditions;
    conditions.reserve(prepared.states.size());
    for (ProductionState s : prepared.states) conditions.push_back(one_hot(s));
    auto result = train_cvae(prepared.x, conditions, to_train_config(cfg, cfg.seed),
                             prepared.norm);
    const std::string stem = cfg.kind + "_" + cfg.mode;
    const std::string model_path = join(cfg.out_dir, stem + ".model");
    const std::string loss_path = join(cfg.out_dir, stem + "_loss.csv");
    save_model(GenerativeModel(std::move(result.model)), model_path);
    write_loss_csv(loss_path, result.loss_history);
    std::cout << "train: " << model_path << " final loss "
              << fmt_double(result.loss_history.back()) << '\n';
    outputs = {model_path, loss_path};
  } else if (cfg.state) {
    const ProductionState state = state_from_name(*cfg.state);
    const auto files = train_one_state(cfg, split.train, data_dim, state,
                                       Rng::derive_seed(cfg.seed, state_code(state)));
    outputs = files.outputs;
    std::cout << "train: wrote " << outputs.front() << '\n';
  } else {
    // Independent per-state jobs with derived seeds; results are identical to
    // running each state on its own.
    std::vector<std::future<TrainedFiles>> jobs;
    for (ProductionState s : kAllStates) {
      jobs.push_back(std::async(std::launch::async, [&, s]() {
        return train_one_state(cfg, split.train, data_dim, s,
                               Rng::derive_seed(cfg.seed, state_code(s)));
      }));
    }
    for (auto& job : jobs) {
      auto files = job.get();
      outputs.insert(outputs.end(), files.outputs.begin(), files.outputs.end());
    }
    std::cout << "train: wrote " << kNumStates << " per-state models\n";
  }

  write_manifest(cfg.out_dir, "train", cfg.seed,
                 {{"samples", cfg.samples_path},
                  {"kind", cfg.kind},
                  {"mode", cfg.mode},
                  {"state", cfg.state ? *cfg.state : ""},
                  {"epochs", cfg.epochs},
                  {"batch_size", cfg.batch_size},
                  {"learning_rate", cfg.learning_rate},
                  {"split_ratio", cfg.split_ratio}},
                 outputs);
}

void cmd_generate(const GenerateConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const auto smp = load_smp(cfg.smp_path);

  TrafficModels models;
  if (!cfg.cvae_path.empty()) {
    models.conditional = load_model(cfg.cvae_path);
  }
  for (const auto& spec : cfg.state_models) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw DataError("--model expects State=path, got '" + spec + "'");
    }
    const ProductionState s = state_from_name(spec.substr(0, eq));
    models.per_state[state_index(s)] = load_model(spec.substr(eq + 1));
  }
  if (!models.conditional && cfg.state_models.empty()) {
    throw DataError("generate needs --cvae or --model State=path");
  }

  bool any_1d = false;
  for (ProductionState s : kAllStates) {
    if (models.covers(s) && model_data_dim(models.model_for(s)) == 1) any_1d = true;
  }
  if (any_1d) {
    if (cfg.samples_path.empty()) {
      throw DataError("1D models need --samples for empirical packet sizes");
    }
    const auto samples = load_samples_csv(cfg.samples_path);
    for (ProductionState s : kAllStates) models.set_size_pool(s, samples);
  }

  const auto trace = generate_trace(smp, models, cfg.jumps, cfg.seed);
  const std::string out_path = join(cfg.out_dir, cfg.out_name);
  export_trace(trace, out_path);
  std::cout << "generate: " << trace.packets.size() << " packets over "
            << trace.jumps.size() << " jumps -> " << out_path << '\n';

  write_manifest(cfg.out_dir, "generate", cfg.seed,
                 {{"smp", cfg.smp_path},
                  {"cvae", cfg.cvae_path},
                  {"models", cfg.state_models},
                  {"samples", cfg.samples_path},
                  {"jumps", cfg.jumps}},
                 {out_path});
}

void cmd_evaluate(const EvaluateConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const auto samples = load_samples_csv(cfg.samples_path);
  const auto split = split_dataset(samples, cfg.split_ratio, cfg.seed);

  EvalModelSet models;
  auto try_load = [&](const std::string& name) -> std::optional<GenerativeModel> {
    const std::string path = join(cfg.models_dir, name);
    if (!fs::exists(path)) return std::nullopt;
    return load_model(path);
  };
  for (ProductionState s : kAllStates) {
    const std::string st(state_name(s));
    models.vae_1d[state_index(s)] = try_load("vae_1d_" + st + ".model");
    models.gan_1d[state_index(s)] = try_load("gan_1d_" + st + ".model");
    models.vae_2d[state_index(s)] = try_load("vae_2d_" + st + ".model");
    models.gan_2d[state_index(s)] = try_load("gan_2d_" + st + ".model");
  }
  models.cvae_1d = try_load("cvae_1d.model");
  models.cvae_2d = try_load("cvae_2d.model");

  const auto artifacts =
      compare_models(split.test, models, cfg.seed, cfg.bins, cfg.min_generated);

  const std::string table_path = join(cfg.out_dir, "kl_table.csv");
  write_comparison_csv(artifacts.table, table_path);
  std::vector<std::string> outputs = {table_path};
  for (ProductionState s : kAllStates) {
    const std::string hist_path =
        join(cfg.out_dir, "hist_" + std::string(state_name(s)) + "_real.csv");
    export_histogram(artifacts.real_histograms[state_index(s)], hist_path);
    outputs.push_back(hist_path);
  }

  std::cout << "model";
  for (ProductionState s : kAllStates) std::cout << '\t' << state_name(s);
  std::cout << '\n';
  for (int row = 0; row < 6; ++row) {
    std::cout << kComparisonRows[row];
    for (int si = 0; si < kNumStates; ++si) {
      std::cout << '\t' << fmt_double(artifacts.table.kl[row][si]);
    }
    std::cout << '\n';
  }

  write_manifest(cfg.out_dir, "evaluate", cfg.seed,
                 {{"samples", cfg.samples_path},
                  {"models_dir", cfg.models_dir},
                  {"split_ratio", cfg.split_ratio},
                  {"bins", cfg.bins},
                  {"min_generated", cfg.min_generated}},
                 outputs);
}

}  // namespace itgen
