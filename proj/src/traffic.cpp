#include "itgen/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "itgen/util.hpp"

namespace itgen {

TrafficModels TrafficModels::conditional_model(GenerativeModel model) {
  TrafficModels m;
  m.conditional = std::move(model);
  return m;
}

TrafficModels TrafficModels::per_state_models(
    std::array<std::optional<GenerativeModel>, kNumStates> models) {
  TrafficModels m;
  m.per_state = std::move(models);
  return m;
}

void TrafficModels::set_size_pool(ProductionState s, const std::vector<TrafficSample>& samples) {
  auto& pool = size_pools[state_index(s)];
  for (const auto& sample : samples) {
    if (sample.state == s && sample.size_bytes > 0) pool.push_back(sample.size_bytes);
  }
}

const GenerativeModel& TrafficModels::model_for(ProductionState s) const {
  if (per_state[state_index(s)]) return *per_state[state_index(s)];
  if (conditional) return *conditional;
  throw DataError("no generative model for state " + std::string(state_name(s)));
}

bool TrafficModels::covers(ProductionState s) const {
  return per_state[state_index(s)].has_value() || conditional.has_value();
}

namespace {

std::int64_t quantize_generated_size(double bytes) {
  const auto q = static_cast<std::int64_t>(std::ceil(bytes / 32.0)) * 32;
  return q < 32 ? 32 : q;
}

std::vector<ProductionState> reachable_states(const SemiMarkovModel& smp,
                                              ProductionState start) {
  std::array<bool, kNumStates> seen{};
  std::vector<int> stack = {state_index(start)};
  seen[state_index(start)] = true;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < kNumStates; ++j) {
      if (smp.matrix.p[i][j] > 0.0 && !seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  std::vector<ProductionState> states;
  for (int i = 0; i < kNumStates; ++i) {
    if (seen[i]) states.push_back(state_from_code(i + 1));
  }
  return states;
}

}  // namespace

SyntheticTrace generate_trace(const SemiMarkovModel& smp, const TrafficModels& models,
                              std::int64_t n_max, std::uint64_t seed, bool stop_at_dead) {
  if (n_max < 1) throw DataError("n_max must be >= 1");
  const ProductionState initial = ProductionState::Running;
  for (ProductionState s : reachable_states(smp, initial)) {
    if (!models.covers(s)) {
      throw DataError("no generative model for reachable state " +
                      std::string(state_name(s)));
    }
    if (model_data_dim(models.model_for(s)) == 1 &&
        models.size_pools[state_index(s)].empty()) {
      throw DataError("1D model for state " + std::string(state_name(s)) +
                      " needs an empirical size pool");
    }
  }

  Rng rng(seed);
  SyntheticTrace trace;
  ProductionState state = initial;
  std::int64_t now = 0;

  for (std::int64_t n = 1; n <= n_max; ++n) {
    if (smp.matrix.dead_row(state_index(state))) {
      if (stop_at_dead) break;
      throw DataError("reached dead state " + std::string(state_name(state)) +
                      " with no outgoing transitions");
    }
    const ProductionState next = sample_next_state(smp, state, rng);
    const auto jump_ms = std::max<std::int64_t>(
        1, std::llround(sample_jumping_time(smp, state, next, rng)));

    const GenerativeModel& model = models.model_for(state);
    const bool joint = model_data_dim(model) == 2;
    const auto& pool = models.size_pools[state_index(state)];
    std::int64_t t = now;
    for (;;) {
      std::int64_t gap, bytes;
      if (joint) {
        const auto row = sample_denormalized(model, state, 1, rng).front();
        gap = std::max<std::int64_t>(1, std::llround(row[0]));
        bytes = quantize_generated_size(row[1]);
      } else {
        const auto ms = sample_interarrivals_ms(model, state, 1, rng).front();
        gap = std::max<std::int64_t>(1, std::llround(ms));
        bytes = pool[rng.uniform_index(pool.size())];
      }
      if (t + gap >= now + jump_ms) break;  // would land on or after the jump
      t += gap;
      trace.packets.push_back({t, bytes, state});
    }

    trace.jumps.push_back({n, state, next, jump_ms});
    now += jump_ms;
    state = next;
  }
  return trace;
}

std::vector<double> exponential_baseline(double rate_per_ms, int n, Rng& rng) {
  if (!(rate_per_ms > 0.0)) throw DataError("rate must be positive");
  if (n < 0) throw DataError("sample count must be >= 0");
  std::vector<double> draws(static_cast<std::size_t>(n));
  for (double& d : draws) d = rng.exponential(rate_per_ms);
  return draws;
}

void export_trace(const SyntheticTrace& trace, const std::string& path) {
  // State-entry markers (size 0) are reconstructed from the jump list so the
  // file alone supports exact re-derivation of per-episode samples.
  std::vector<PacketEvent> markers;
  if (!trace.jumps.empty()) {
    markers.reserve(trace.jumps.size() + 1);
    std::int64_t t = 0;
    markers.push_back({t, 0, trace.jumps.front().from});
    for (const auto& jump : trace.jumps) {
      t += jump.jump_time_ms;
      markers.push_back({t, 0, jump.to});
    }
  }
  std::ostringstream out;
  out << "timestamp_ms,size_bytes,state\n";
  std::size_t mi = 0, pi = 0;
  while (mi < markers.size() || pi < trace.packets.size()) {
    const bool take_marker =
        pi >= trace.packets.size() ||
        (mi < markers.size() && markers[mi].timestamp_ms <= trace.packets[pi].timestamp_ms);
    const PacketEvent& ev = take_marker ? markers[mi++] : trace.packets[pi++];
    out << ev.timestamp_ms << ',' << ev.size_bytes << ',' << state_name(ev.state) << '\n';
  }
  write_text_file(path, out.str());
}

ImportedTrace import_trace(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "timestamp_ms,size_bytes,state") {
    throw DataError(path + ": expected header 'timestamp_ms,size_bytes,state'");
  }
  ImportedTrace out;
  bool in_episode = false;
  ProductionState current = ProductionState::Running;
  std::int64_t prev_event_ms = 0;
  std::int64_t prev_row_ms = 0;
  bool first_row = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw DataError(where + ": expected 3 fields");
    const std::int64_t t = parse_int(f[0], where);
    const std::int64_t bytes = parse_int(f[1], where);
    const ProductionState s = state_from_name(f[2]);
    if (!first_row && t <= prev_row_ms) {
      throw DataError(where + ": timestamps must be strictly increasing");
    }
    first_row = false;
    prev_row_ms = t;
    if (bytes == 0) {  // state-entry marker
      in_episode = true;
      current = s;
      prev_event_ms = t;
      out.episode_counts[state_index(s)]++;
      continue;
    }
    if (bytes < 0 || bytes % 32 != 0) {
      throw DataError(where + ": packet sizes must be positive multiples of 32");
    }
    out.packets.push_back({t, bytes, s});
    if (!in_episode) continue;  // packets before the first marker
    if (s != current) {
      throw DataError(where + ": packet state does not match the open episode");
    }
    out.samples.push_back({static_cast<double>(t - prev_event_ms), bytes, s});
    prev_event_ms = t;
  }
  return out;
}

std::vector<TrafficSample> trace_samples(const SyntheticTrace& trace) {
  std::vector<TrafficSample> samples;
  if (trace.jumps.empty()) {
    for (std::size_t k = 1; k < trace.packets.size(); ++k) {
      const auto gap = trace.packets[k].timestamp_ms - trace.packets[k - 1].timestamp_ms;
      if (gap > 0 && trace.packets[k].state == trace.packets[k - 1].state) {
        samples.push_back({static_cast<double>(gap), trace.packets[k].size_bytes,
                           trace.packets[k].state});
      }
    }
    return samples;
  }
  std::int64_t episode_start = 0;
  std::size_t jump_idx = 0;
  std::int64_t prev_event = 0;
  for (const auto& p : trace.packets) {
    while (jump_idx < trace.jumps.size() &&
           episode_start + trace.jumps[jump_idx].jump_time_ms <= p.timestamp_ms) {
      episode_start += trace.jumps[jump_idx].jump_time_ms;
      ++jump_idx;
      prev_event = episode_start;
    }
    samples.push_back(
        {static_cast<double>(p.timestamp_ms - prev_event), p.size_bytes, p.state});
    prev_event = p.timestamp_ms;
  }
  return samples;
}

}  // namespace itgen
