#pragma once

#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "itgen/core.hpp"

namespace itgen {

// Maximal run of time the machine spent in one state, with the log records
// that fell inside it. Consecutive episodes always have distinct states.
struct StateEpisode {
  ProductionState state = ProductionState::Running;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::vector<LogRecord> records;
};

struct AnnotatedTrace {
  std::vector<StateEpisode> episodes;
};

// One line of the state-map config: a control message is any record whose
// data_id equals `data_id` and whose value matches `pattern`.
struct StateMapEntry {
  std::string data_id;
  std::string pattern;
  std::regex re;
  ProductionState state = ProductionState::Running;
};

using StateMap = std::vector<StateMapEntry>;

// Config file format: one `data_id,value_regex,state_name` per line.
// '#' starts a comment.
StateMap load_state_map(const std::string& path);
StateMap parse_state_map(const std::string& content, const std::string& origin);

// Reads a log CSV with header `processed_time,data_id,data_value,data_payload`.
// Records come back sorted by timestamp (stable for ties). Errors carry the
// 1-based line number.
std::vector<LogRecord> parse_log(const std::string& path);
std::vector<LogRecord> parse_log_content(const std::string& content, const std::string& origin);

// Segments sorted records into episodes. An episode opens at each control
// record whose mapped state differs from the current one; records before the
// first control record are discarded; repeated controls for the same state
// merge into the open episode.
AnnotatedTrace annotate_states(const std::vector<LogRecord>& records, const StateMap& map);

// Per-episode consecutive record pairs become (T, L, state) samples with
// L = quantize_payload(second record's payload). Pairs never span episode
// boundaries; zero-gap pairs are dropped (the log cannot resolve them).
std::vector<TrafficSample> extract_samples(const AnnotatedTrace& trace);

struct DatasetSplit {
  std::vector<TrafficSample> train;
  std::vector<TrafficSample> test;
  std::uint64_t seed = 0;
  double ratio = 0.0;

  std::array<std::int64_t, kNumStates> train_state_counts() const;
  std::array<std::int64_t, kNumStates> test_state_counts() const;
};

// Deterministic shuffle under `seed`; first ceil(ratio*n) samples -> train.
DatasetSplit split_dataset(const std::vector<TrafficSample>& samples, double ratio,
                           std::uint64_t seed);

// Sample and episode artifacts exchanged between CLI stages.
void save_samples_csv(const std::vector<TrafficSample>& samples, const std::string& path);
std::vector<TrafficSample> load_samples_csv(const std::string& path);
void save_episodes_csv(const AnnotatedTrace& trace, const std::string& path);
AnnotatedTrace load_episodes_csv(const std::string& path);

}  // namespace itgen
