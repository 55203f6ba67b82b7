#include <iostream>

#include <CLI11.hpp>

#include "itgen/cli.hpp"
#include "itgen/core.hpp"

namespace {

void add_common(CLI::App* cmd, std::string& out_dir, std::uint64_t& seed) {
  cmd->add_option("--out-dir", out_dir, "Directory for output artifacts")->required();
  cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  cmd->set_config("--config", "", "Read options from a config file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Production-state-aware industrial network traffic modeling and synthesis"};
  app.require_subcommand(1);

  itgen::SynthDataConfig synth;
  auto* synth_cmd = app.add_subcommand(
      "synth-data", "Generate a synthetic machine log with known ground truth");
  add_common(synth_cmd, synth.out_dir, synth.seed);
  synth_cmd->add_option("--jumps", synth.jumps, "Number of state transitions")->capture_default_str();
  synth_cmd->add_option("--spec", synth.spec_path, "Ground-truth spec JSON (default: built-in)");

  itgen::IngestConfig ingest;
  std::uint64_t ingest_seed = 0;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Parse a machine log into per-state samples");
  add_common(ingest_cmd, ingest.out_dir, ingest_seed);
  ingest_cmd->add_option("--log", ingest.log_path, "Machine log CSV")->required();
  ingest_cmd->add_option("--state-map", ingest.state_map_path, "Control-message map")
      ->required();

  itgen::FitSmpConfig fit;
  std::uint64_t fit_seed = 0;
  auto* fit_cmd =
      app.add_subcommand("fit-smp", "Estimate the semi-Markov production model");
  add_common(fit_cmd, fit.out_dir, fit_seed);
  fit_cmd->add_option("--episodes", fit.episodes_path, "episodes.csv from ingest")
      ->required();
  fit_cmd->add_option("--out-name", fit.out_name, "Model file name")->capture_default_str();

  itgen::TrainCommandConfig train;
  std::string train_state;
  auto* train_cmd = app.add_subcommand("train", "Train a generative traffic model");
  add_common(train_cmd, train.out_dir, train.seed);
  train_cmd->add_option("--samples", train.samples_path, "samples.csv from ingest")
      ->required();
  train_cmd->add_option("--kind", train.kind, "vae | cvae | gan")->capture_default_str();
  train_cmd->add_option("--mode", train.mode, "1d | 2d")->capture_default_str();
  train_cmd->add_option("--state", train_state,
                        "Train only this state (vae/gan; default: all five)");
  train_cmd->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--batch", train.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--lr", train.learning_rate, "Learning rate")->capture_default_str();
  train_cmd->add_option("--split", train.split_ratio, "Training fraction")->capture_default_str();

  itgen::GenerateConfig gen;
  auto* gen_cmd = app.add_subcommand("generate", "Synthesize a packet trace");
  add_common(gen_cmd, gen.out_dir, gen.seed);
  gen_cmd->add_option("--smp", gen.smp_path, "Semi-Markov model file")->required();
  gen_cmd->add_option("--model", gen.state_models,
                      "Per-state model as State=path (repeatable)");
  gen_cmd->add_option("--cvae", gen.cvae_path, "Conditional model file");
  gen_cmd->add_option("--samples", gen.samples_path,
                      "samples.csv for empirical sizes (1D models)");
  gen_cmd->add_option("--jumps", gen.jumps, "Number of state transitions")->capture_default_str();
  gen_cmd->add_option("--out-name", gen.out_name, "Trace file name")->capture_default_str();

  itgen::EvaluateConfig eval;
  auto* eval_cmd =
      app.add_subcommand("evaluate", "KL comparison of trained models per state");
  add_common(eval_cmd, eval.out_dir, eval.seed);
  eval_cmd->add_option("--samples", eval.samples_path, "samples.csv from ingest")
      ->required();
  eval_cmd->add_option("--models-dir", eval.models_dir, "Directory of trained models")
      ->required();
  eval_cmd->add_option("--split", eval.split_ratio, "Training fraction (test = rest)")->capture_default_str();
  eval_cmd->add_option("--bins", eval.bins, "Histogram bins")->capture_default_str();
  eval_cmd->add_option("--min-generated", eval.min_generated,
                       "Minimum generated samples per cell")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (synth_cmd->parsed()) itgen::cmd_synth_data(synth);
    if (ingest_cmd->parsed()) itgen::cmd_ingest(ingest);
    if (fit_cmd->parsed()) itgen::cmd_fit_smp(fit);
    if (train_cmd->parsed()) {
      if (!train_state.empty()) train.state = train_state;
      itgen::cmd_train(train);
    }
    if (gen_cmd->parsed()) itgen::cmd_generate(gen);
    if (eval_cmd->parsed()) itgen::cmd_evaluate(eval);
  } catch (const itgen::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const itgen::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
