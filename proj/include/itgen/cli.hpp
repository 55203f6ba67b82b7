#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace itgen {

// Command implementations shared by the CLI binary and the python module.
// They throw DataError / NumericalError; the binary maps those to exit codes.
// Every command writes a run manifest (config, seed, output checksums) into
// its output directory.

struct SynthDataConfig {
  std::string out_dir;
  std::uint64_t seed = 0;
  std::int64_t jumps = 1000;
  std::string spec_path;  // optional custom ground-truth spec (JSON)
};

struct IngestConfig {
  std::string log_path;
  std::string state_map_path;
  std::string out_dir;
};

struct FitSmpConfig {
  std::string episodes_path;
  std::string out_dir;
  std::string out_name = "model.smp";
};

struct TrainCommandConfig {
  std::string samples_path;
  std::string out_dir;
  std::string kind = "vae";  // vae | cvae | gan
  std::string mode = "1d";   // 1d | 2d
  std::optional<std::string> state;  // vae/gan only; absent = all five states
  int epochs = 500;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double split_ratio = 0.7;
  std::uint64_t seed = 0;
};

struct GenerateConfig {
  std::string smp_path;
  std::vector<std::string> state_models;  // "State=path", for per-state models
  std::string cvae_path;                  // single conditional model
  std::string samples_path;               // empirical sizes for 1D models
  std::int64_t jumps = 1000;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string out_name = "trace.csv";
};

struct EvaluateConfig {
  std::string samples_path;
  std::string models_dir;
  std::string out_dir;
  double split_ratio = 0.7;
  std::uint64_t seed = 0;
  int bins = 50;
  int min_generated = 10000;
};

void cmd_synth_data(const SynthDataConfig& cfg);
void cmd_ingest(const IngestConfig& cfg);
void cmd_fit_smp(const FitSmpConfig& cfg);
void cmd_train(const TrainCommandConfig& cfg);
void cmd_generate(const GenerateConfig& cfg);
void cmd_evaluate(const EvaluateConfig& cfg);

// {kind}_{mode}.model for conditional models, {kind}_{mode}_{State}.model
// for per-state ones; loss histories use the same stem + "_loss.csv".
std::string model_file_name(const std::string& kind, const std::string& mode,
                            const std::optional<std::string>& state);

}  // namespace itgen
