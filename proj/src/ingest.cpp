#include "itgen/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "itgen/rng.hpp"
#include "itgen/util.hpp"

namespace itgen {

namespace {

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : content) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(std::move(cur));
  }
  return lines;
}

}  // namespace

StateMap parse_state_map(const std::string& content, const std::string& origin) {
  StateMap map;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw DataError(origin + ":" + std::to_string(i + 1) +
                      ": expected 'data_id,value_regex,state_name'");
    }
    StateMapEntry entry;
    entry.data_id = fields[0];
    entry.pattern = fields[1];
    try {
      entry.re = std::regex(fields[1]);
    } catch (const std::regex_error& e) {
      throw DataError(origin + ":" + std::to_string(i + 1) + ": bad regex: " + e.what());
    }
    entry.state = state_from_name(fields[2]);
    map.push_back(std::move(entry));
  }
  if (map.empty()) throw DataError(origin + ": state map has no entries");
  return map;
}

StateMap load_state_map(const std::string& path) {
  return parse_state_map(read_text_file(path), path);
}

std::vector<LogRecord> parse_log_content(const std::string& content,
                                         const std::string& origin) {
  const auto lines = split_lines(content);
  if (lines.empty()) throw DataError(origin + ": empty log file");

  const auto header = split_csv_line(lines[0]);
  const std::array<std::string, 4> expected = {"processed_time", "data_id", "data_value",
                                               "data_payload"};
  if (header.size() != expected.size()) {
    throw DataError(origin + ":1: expected header 'processed_time,data_id,data_value,data_payload'");
  }
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (header[c] != expected[c]) {
      throw DataError(origin + ":1: missing column '" + expected[c] + "'");
    }
  }

  std::vector<LogRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = origin + ":" + std::to_string(i + 1);
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 4) {
      throw DataError(where + ": expected 4 fields, got " + std::to_string(fields.size()));
    }
    LogRecord rec;
    try {
      rec.processed_time_ms = parse_iso8601_ms(fields[0]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    rec.data_id = fields[1];
    rec.data_value = fields[2];
    rec.data_payload = parse_int(fields[3], where + ": data_payload");
    if (rec.data_payload < 0) {
      throw DataError(where + ": data_payload must be non-negative");
    }
    records.push_back(std::move(rec));
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const LogRecord& a, const LogRecord& b) {
                     return a.processed_time_ms < b.processed_time_ms;
                   });
  return records;
}

std::vector<LogRecord> parse_log(const std::string& path) {
  return parse_log_content(read_text_file(path), path);
}

namespace {

std::optional<ProductionState> control_state(const LogRecord& rec, const StateMap& map) {
  for (const auto& entry : map) {
    if (entry.data_id == rec.data_id && std::regex_search(rec.data_value, entry.re)) {
      return entry.state;
    }
  }
  return std::nullopt;
}

}  // namespace

AnnotatedTrace annotate_states(const std::vector<LogRecord>& records, const StateMap& map) {
  if (map.empty()) throw DataError("annotate_states: empty state map");
  AnnotatedTrace trace;
  StateEpisode* open = nullptr;
  for (const auto& rec : records) {
    const auto mapped = control_state(rec, map);
    if (open == nullptr) {
      if (!mapped) continue;  // records before the first control record
      trace.episodes.push_back({*mapped, rec.processed_time_ms, rec.processed_time_ms, {}});
      open = &trace.episodes.back();
    } else if (mapped && *mapped != open->state) {
      open->end_ms = rec.processed_time_ms;
      trace.episodes.push_back({*mapped, rec.processed_time_ms, rec.processed_time_ms, {}});
      open = &trace.episodes.back();
    }
    open->records.push_back(rec);
    open->end_ms = std::max(open->end_ms, rec.processed_time_ms);
  }
  if (trace.episodes.empty()) throw DataError("no state information in log");
  return trace;
}

std::vector<TrafficSample> extract_samples(const AnnotatedTrace& trace) {
  std::vector<TrafficSample> samples;
  for (const auto& ep : trace.episodes) {
    for (std::size_t k = 1; k < ep.records.size(); ++k) {
      const std::int64_t gap =
          ep.records[k].processed_time_ms - ep.records[k - 1].processed_time_ms;
      if (gap <= 0) continue;
      samples.push_back({static_cast<double>(gap),
                         quantize_payload(ep.records[k].data_payload), ep.state});
    }
  }
  return samples;
}

std::array<std::int64_t, kNumStates> count_by_state(const std::vector<TrafficSample>& v) {
  std::array<std::int64_t, kNumStates> counts{};
  for (const auto& s : v) counts[state_index(s.state)]++;
  return counts;
}

std::array<std::int64_t, kNumStates> DatasetSplit::train_state_counts() const {
  return count_by_state(train);
}

std::array<std::int64_t, kNumStates> DatasetSplit::test_state_counts() const {
  return count_by_state(test);
}

DatasetSplit split_dataset(const std::vector<TrafficSample>& samples, double ratio,
                           std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DataError("split ratio must be in (0,1)");
  if (samples.size() < 2) throw DataError("split_dataset needs at least 2 samples");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_index(i + 1)]);
  }

  const auto n_train = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(samples.size())));
  DatasetSplit split;
  split.seed = seed;
  split.ratio = ratio;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? split.train : split.test).push_back(samples[order[i]]);
  }
  return split;
}

void save_samples_csv(const std::vector<TrafficSample>& samples, const std::string& path) {
  std::ostringstream out;
  out << "interarrival_ms,size_bytes,state\n";
  for (const auto& s : samples) {
    out << fmt_double(s.interarrival_ms) << ',' << s.size_bytes << ','
        << state_name(s.state) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<TrafficSample> load_samples_csv(const std::string& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty() || lines[0] != "interarrival_ms,size_bytes,state") {
    throw DataError(path + ": expected header 'interarrival_ms,size_bytes,state'");
  }
  std::vector<TrafficSample> samples;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 3) throw DataError(where + ": expected 3 fields");
    TrafficSample s;
    s.interarrival_ms = parse_double(f[0], where);
    s.size_bytes = parse_int(f[1], where);
    s.state = state_from_name(f[2]);
    if (!(s.interarrival_ms > 0.0)) throw DataError(where + ": interarrival must be > 0");
    samples.push_back(s);
  }
  return samples;
}

void save_episodes_csv(const AnnotatedTrace& trace, const std::string& path) {
  std::ostringstream out;
  out << "state,start_ms,end_ms\n";
  for (const auto& ep : trace.episodes) {
    out << state_name(ep.state) << ',' << ep.start_ms << ',' << ep.end_ms << '\n';
  }
  write_text_file(path, out.str());
}

AnnotatedTrace load_episodes_csv(const std::string& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty() || lines[0] != "state,start_ms,end_ms") {
    throw DataError(path + ": expected header 'state,start_ms,end_ms'");
  }
  AnnotatedTrace trace;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 3) throw DataError(where + ": expected 3 fields");
    StateEpisode ep;
    ep.state = state_from_name(f[0]);
    ep.start_ms = parse_int(f[1], where);
    ep.end_ms = parse_int(f[2], where);
    if (ep.end_ms < ep.start_ms) throw DataError(where + ": end before start");
    trace.episodes.push_back(std::move(ep));
  }
  if (trace.episodes.empty()) throw DataError(path + ": no episodes");
  return trace;
}

}  // namespace itgen
