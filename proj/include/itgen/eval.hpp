#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itgen/core.hpp"
#include "itgen/generative.hpp"
#include "itgen/ingest.hpp"
#include "itgen/rng.hpp"

namespace itgen {

// Normalized histogram over equal-width bins in ln-space. Bins include their
// upper edge; the first bin also includes its lower edge, and out-of-range
// samples clip into the end bins.
struct LogHistogram {
  std::vector<double> edges;   // ln-space, strictly increasing, bins+1 entries
  std::vector<double> masses;  // sums to 1
  std::int64_t sample_count = 0;
};

std::vector<double> make_log_edges(double ln_lo, double ln_hi, int bins);

LogHistogram build_histogram(const std::vector<double>& samples_ms, int bins,
                             std::optional<std::pair<double, double>> ln_range = std::nullopt);

// Sum over bins with p>0 of p ln(p/q), in nats. Empty q bins are raised to
// 1e-10 and q is renormalized; when q has no empty bins it is used as-is so
// kl_divergence(p, p) is exactly zero.
double kl_divergence(const LogHistogram& p, const LogHistogram& q);

// CSV `edge_lo,edge_hi,mass`, ln-space edges, lossless round trip.
void export_histogram(const LogHistogram& hist, const std::string& path);
LogHistogram import_histogram(const std::string& path);

// --- Synthetic ground truth -------------------------------------------------
// Stands in for the proprietary machine log: a semi-Markov state process with
// known per-state interarrival mixtures and size distributions.

struct MixtureComponent {
  double weight = 1.0;
  double mu = 0.0;     // mean of ln(ms)
  double sigma = 1.0;  // std of ln(ms)
};

struct SizePmfEntry {
  std::int64_t bytes = 32;  // multiple of 32
  double prob = 1.0;
};

struct StateSpec {
  std::vector<MixtureComponent> interarrival;
  std::vector<SizePmfEntry> sizes;
};

struct LogNormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

struct SyntheticSpec {
  std::array<StateSpec, kNumStates> states;
  std::array<std::array<double, kNumStates>, kNumStates> transition;  // row-stochastic, zero diag
  std::array<std::array<LogNormalParams, kNumStates>, kNumStates> jump_time;  // ln(ms)
  ProductionState initial = ProductionState::Running;
  std::int64_t base_time_ms = 0;  // epoch ms of the first control record
};

// Mirrors the published machine: transition counts from the factory study,
// Running sojourns up to minutes, Reentry short, and a three-peak Running
// interarrival profile spanning tens of ms to minutes.
SyntheticSpec default_synthetic_spec();

void save_synthetic_spec(const SyntheticSpec& spec, const std::string& path);
SyntheticSpec load_synthetic_spec(const std::string& path);

double sample_interarrival(const StateSpec& state, Rng& rng);
std::int64_t sample_size(const StateSpec& state, Rng& rng);

// Analytic bin masses of the ln-normal mixture over the given edges,
// renormalized across the range.
LogHistogram mixture_histogram(const StateSpec& state, const std::vector<double>& edges);

struct SyntheticDataset {
  AnnotatedTrace trace;                // episodes with control + packet records
  std::vector<TrafficSample> samples;  // ground-truth (T, L, state) draws
  SyntheticSpec spec;

  std::array<std::int64_t, kNumStates> state_counts() const;
};

// Simulates n_jumps state transitions and fills each episode with packets
// from the state's mixtures; interarrivals are whole milliseconds >= 1 to
// match the log's time resolution. A spec with no transitions at all yields
// one open episode of the initial state containing n_jumps packets.
SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec, std::int64_t n_jumps,
                                            std::uint64_t seed);

// Log-format CSV (`processed_time,...`) and the matching state-map config.
void write_log_csv(const AnnotatedTrace& trace, const std::string& path);
void write_state_map_csv(const std::string& path);
inline constexpr const char* kControlDataId = "machine.state";

// --- Model comparison --------------------------------------------------------

inline constexpr std::array<const char*, 6> kComparisonRows = {
    "VAE 1D", "CVAE 1D", "GAN 1D", "VAE 2D", "CVAE 2D", "GAN 2D"};

struct EvalModelSet {
  std::array<std::optional<GenerativeModel>, kNumStates> vae_1d;
  std::optional<GenerativeModel> cvae_1d;
  std::array<std::optional<GenerativeModel>, kNumStates> gan_1d;
  std::array<std::optional<GenerativeModel>, kNumStates> vae_2d;
  std::optional<GenerativeModel> cvae_2d;
  std::array<std::optional<GenerativeModel>, kNumStates> gan_2d;
};

struct ComparisonTable {
  std::array<std::array<double, kNumStates>, 6> kl{};  // [row][state]
};

struct ComparisonArtifacts {
  ComparisonTable table;
  std::array<LogHistogram, kNumStates> real_histograms;
};

// Per-state KL of each model's interarrival marginal against the real test
// samples: 2D rows are scored on the interarrival dimension only. Bin edges
// are fitted on the real per-state data and shared with the generated
// histograms; each model contributes max(|real|, min_generated) samples.
ComparisonArtifacts compare_models(const std::vector<TrafficSample>& test_samples,
                                   const EvalModelSet& models, std::uint64_t seed,
                                   int bins = 50, int min_generated = 10000);

void write_comparison_csv(const ComparisonTable& table, const std::string& path);

}  // namespace itgen
