#include <doctest.h>

#include "itgen/ingest.hpp"
#include "itgen/util.hpp"

using namespace itgen;

namespace {

const char* kStateMapText =
    "machine.state,^Running$,Running\n"
    "machine.state,^Reentry$,Reentry\n"
    "machine.state,^Stopped$,Stopped\n"
    "machine.state,^Aborted$,Aborted\n"
    "machine.state,^Ended$,Ended\n";

StateMap test_map() { return parse_state_map(kStateMapText, "test"); }

LogRecord ctrl(std::int64_t t, const char* state) {
  return {t, "machine.state", state, 16};
}

LogRecord data(std::int64_t t, std::int64_t payload) {
  return {t, "machine.data", "", payload};
}

}  // namespace

TEST_CASE("parse_log returns records sorted by timestamp") {
  const std::string content =
      "processed_time,data_id,data_value,data_payload\n"
      "2022-03-01T08:15:00.125,id2,v2,10\n"
      "2022-03-01T08:15:00.123,id1,v1,5\n"
      "2022-03-01T08:15:01.000,id3,v3,0\n";
  const auto records = parse_log_content(content, "test.csv");
  REQUIRE(records.size() == 3);
  CHECK(records[0].data_id == "id1");
  CHECK(records[1].data_id == "id2");
  CHECK(records[2].data_id == "id3");
  CHECK(records[1].processed_time_ms - records[0].processed_time_ms == 2);
  CHECK(records[2].processed_time_ms - records[1].processed_time_ms == 875);
}

TEST_CASE("parse_log keeps file order for identical timestamps") {
  const std::string content =
      "processed_time,data_id,data_value,data_payload\n"
      "2022-03-01T08:15:00.123,first,v,1\n"
      "2022-03-01T08:15:00.123,second,v,2\n";
  const auto records = parse_log_content(content, "test.csv");
  REQUIRE(records.size() == 2);
  CHECK(records[0].data_id == "first");
  CHECK(records[1].data_id == "second");
}

TEST_CASE("parse_log reports the offending line") {
  const std::string content =
      "processed_time,data_id,data_value,data_payload\n"
      "2022-03-01T08:15:00.123,a,v,1\n"
      "2022-03-01T08:15:00.124,b,v,2\n"
      "2022-03-01T08:15:00.125,c,v,3\n"
      "not-a-date,d,v,4\n";
  CHECK_THROWS_WITH_AS(parse_log_content(content, "test.csv"), doctest::Contains(":5"),
                       DataError);
}

TEST_CASE("parse_log names missing columns") {
  CHECK_THROWS_WITH_AS(
      parse_log_content("processed_time,data_id,data_value,payload\n", "test.csv"),
      doctest::Contains("data_payload"), DataError);
  CHECK_THROWS_WITH_AS(parse_log_content("a,b,c\n", "t"), doctest::Contains("header"),
                       DataError);
}

TEST_CASE("annotate_states opens episodes at state changes") {
  const auto trace = annotate_states({ctrl(0, "Running"), data(10, 4), ctrl(20, "Stopped")},
                                     test_map());
  REQUIRE(trace.episodes.size() == 2);
  CHECK(trace.episodes[0].state == ProductionState::Running);
  CHECK(trace.episodes[0].start_ms == 0);
  CHECK(trace.episodes[0].end_ms == 20);
  CHECK(trace.episodes[0].records.size() == 2);
  CHECK(trace.episodes[1].state == ProductionState::Stopped);
  CHECK(trace.episodes[1].start_ms == 20);
  CHECK(trace.episodes[1].end_ms == 20);  // open-ended, closed at last record
}

TEST_CASE("annotate_states discards records before the first control record") {
  const auto trace = annotate_states({data(0, 4), ctrl(10, "Running"), data(20, 8)},
                                     test_map());
  REQUIRE(trace.episodes.size() == 1);
  CHECK(trace.episodes[0].records.size() == 2);
  CHECK(trace.episodes[0].start_ms == 10);
}

TEST_CASE("annotate_states merges self-transitions") {
  const auto trace = annotate_states(
      {ctrl(0, "Running"), ctrl(10, "Running"), ctrl(20, "Stopped")}, test_map());
  REQUIRE(trace.episodes.size() == 2);
  CHECK(trace.episodes[0].state == ProductionState::Running);
  CHECK(trace.episodes[0].records.size() == 2);  // both control records inside
}

TEST_CASE("annotate_states requires state information") {
  CHECK_THROWS_WITH_AS(annotate_states({data(0, 4), data(10, 8)}, test_map()),
                       doctest::Contains("no state information"), DataError);
}

TEST_CASE("extract_samples pairs consecutive records inside episodes") {
  AnnotatedTrace trace;
  trace.episodes.push_back(
      {ProductionState::Running, 0, 25,
       {data(0, 1), data(10, 4), data(10, 8), data(25, 100)}});
  const auto samples = extract_samples(trace);
  REQUIRE(samples.size() == 2);  // zero-gap pair dropped
  CHECK(samples[0].interarrival_ms == 10.0);
  CHECK(samples[0].size_bytes == 32);
  CHECK(samples[0].state == ProductionState::Running);
  CHECK(samples[1].interarrival_ms == 15.0);
  CHECK(samples[1].size_bytes == 128);
}

TEST_CASE("extract_samples never crosses episode boundaries") {
  AnnotatedTrace trace;
  trace.episodes.push_back({ProductionState::Running, 0, 100, {data(0, 1), data(50, 2)}});
  trace.episodes.push_back({ProductionState::Stopped, 100, 200, {data(100, 3), data(150, 4)}});
  const auto samples = extract_samples(trace);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].state == ProductionState::Running);
  CHECK(samples[1].state == ProductionState::Stopped);
  CHECK(samples[1].interarrival_ms == 50.0);

  AnnotatedTrace single;
  single.episodes.push_back({ProductionState::Running, 0, 0, {data(0, 1)}});
  CHECK(extract_samples(single).empty());
}

TEST_CASE("extracted samples have positive gaps and 32-byte-aligned sizes") {
  const auto trace = annotate_states(
      {ctrl(0, "Running"), data(3, 7), data(9, 100), ctrl(40, "Ended"), data(41, 33)},
      test_map());
  std::size_t per_episode_total = 0;
  for (const auto& ep : trace.episodes) {
    AnnotatedTrace one;
    one.episodes.push_back(ep);
    per_episode_total += extract_samples(one).size();
  }
  const auto samples = extract_samples(trace);
  CHECK(samples.size() == per_episode_total);
  for (const auto& s : samples) {
    CHECK(s.interarrival_ms > 0);
    CHECK(s.size_bytes % 32 == 0);
  }
}

TEST_CASE("split_dataset is a deterministic disjoint split") {
  std::vector<TrafficSample> samples;
  for (int i = 1; i <= 10; ++i) {
    samples.push_back({static_cast<double>(i), 32 * i, ProductionState::Running});
  }
  const auto split = split_dataset(samples, 0.7, 42);
  CHECK(split.train.size() == 7);
  CHECK(split.test.size() == 3);

  const auto again = split_dataset(samples, 0.7, 42);
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    CHECK(split.train[i].interarrival_ms == again.train[i].interarrival_ms);
  }

  std::vector<double> seen;
  for (const auto& s : split.train) seen.push_back(s.interarrival_ms);
  for (const auto& s : split.test) seen.push_back(s.interarrival_ms);
  std::sort(seen.begin(), seen.end());
  for (int i = 1; i <= 10; ++i) CHECK(seen[i - 1] == i);  // partition, no overlap

  CHECK_THROWS_AS(split_dataset({samples[0]}, 0.7, 1), DataError);
  CHECK_THROWS_AS(split_dataset(samples, 0.0, 1), DataError);
  CHECK_THROWS_AS(split_dataset(samples, 1.0, 1), DataError);
}

TEST_CASE("samples and episodes round trip through CSV") {
  std::vector<TrafficSample> samples = {{10.5, 32, ProductionState::Running},
                                        {3.25, 0, ProductionState::Aborted}};
  const std::string path = "test_samples_rt.csv";
  save_samples_csv(samples, path);
  const auto back = load_samples_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].interarrival_ms == 10.5);
  CHECK(back[1].size_bytes == 0);
  CHECK(back[1].state == ProductionState::Aborted);

  AnnotatedTrace trace;
  trace.episodes.push_back({ProductionState::Running, 5, 25, {}});
  trace.episodes.push_back({ProductionState::Ended, 25, 30, {}});
  const std::string ep_path = "test_episodes_rt.csv";
  save_episodes_csv(trace, ep_path);
  const auto trace2 = load_episodes_csv(ep_path);
  REQUIRE(trace2.episodes.size() == 2);
  CHECK(trace2.episodes[0].start_ms == 5);
  CHECK(trace2.episodes[1].state == ProductionState::Ended);

  std::remove(path.c_str());
  std::remove(ep_path.c_str());
}

TEST_CASE("iso8601 parsing and formatting") {
  const auto t = parse_iso8601_ms("2022-03-01T08:15:00.123");
  CHECK(format_iso8601_ms(t) == "2022-03-01T08:15:00.123");
  CHECK(parse_iso8601_ms("2022-03-01T08:15:00.124") == t + 1);
  CHECK(parse_iso8601_ms("2022-03-01T08:15:01.123") == t + 1000);
  CHECK_THROWS_AS(parse_iso8601_ms("2022-03-01"), DataError);
  CHECK_THROWS_AS(parse_iso8601_ms("2022-13-01T00:00:00.000"), DataError);
}
