#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "itgen/core.hpp"
#include "itgen/generative.hpp"
#include "itgen/rng.hpp"
#include "itgen/smp.hpp"

namespace itgen {

struct PacketEvent {
  std::int64_t timestamp_ms = 0;
  std::int64_t size_bytes = 0;
  ProductionState state = ProductionState::Running;
};

struct JumpEvent {
  std::int64_t index = 0;  // 1-based jump counter
  ProductionState from = ProductionState::Running;
  ProductionState to = ProductionState::Running;
  std::int64_t jump_time_ms = 0;
};

struct SyntheticTrace {
  std::vector<PacketEvent> packets;
  std::vector<JumpEvent> jumps;
};

// Traffic models driving packet generation: either one model per state or a
// single conditional model. 1D models pair generated interarrivals with
// sizes bootstrapped from the per-state empirical pools.
struct TrafficModels {
  std::array<std::optional<GenerativeModel>, kNumStates> per_state;
  std::optional<GenerativeModel> conditional;
  std::array<std::vector<std::int64_t>, kNumStates> size_pools;

  static TrafficModels conditional_model(GenerativeModel model);
  static TrafficModels per_state_models(
      std::array<std::optional<GenerativeModel>, kNumStates> models);

  // Registers positive empirical sizes for bootstrap pairing in 1D mode.
  void set_size_pool(ProductionState s, const std::vector<TrafficSample>& samples);

  const GenerativeModel& model_for(ProductionState s) const;
  bool covers(ProductionState s) const;
};

// Synthesizes a state-aware packet trace: starting from Running, repeatedly
// draws the next state and jumping time from the semi-Markov model and fills
// the episode with packets from the state's generative model. Interarrivals
// round to whole milliseconds (>= 1); a packet that would reach or pass the
// jump instant is dropped and the episode closes. With stop_at_dead the
// trace ends early at a state with no outgoing transitions instead of
// throwing.
SyntheticTrace generate_trace(const SemiMarkovModel& smp, const TrafficModels& models,
                              std::int64_t n_max, std::uint64_t seed,
                              bool stop_at_dead = false);

// i.i.d. exponential interarrivals with the given rate (1/ms).
std::vector<double> exponential_baseline(double rate_per_ms, int n, Rng& rng);

// CSV `timestamp_ms,size_bytes,state`. Rows with size 0 mark state entry
// (the jump instants); packet rows always carry size >= 32.
void export_trace(const SyntheticTrace& trace, const std::string& path);

struct ImportedTrace {
  std::vector<PacketEvent> packets;            // marker rows excluded
  std::vector<TrafficSample> samples;          // per-episode interarrival pairs
  std::array<std::int64_t, kNumStates> episode_counts{};
};

// Re-derives per-state samples from an exported trace; exact inverse of the
// pairing used during generation.
ImportedTrace import_trace(const std::string& path);

// Per-state (T, L) multisets of the packets as generated, for round-trip
// checks against import_trace.
std::vector<TrafficSample> trace_samples(const SyntheticTrace& trace);

}  // namespace itgen
