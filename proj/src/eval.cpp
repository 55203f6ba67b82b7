#include "itgen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "itgen/util.hpp"

namespace itgen {

std::vector<double> make_log_edges(double ln_lo, double ln_hi, int bins) {
  if (!(ln_hi > ln_lo)) throw DataError("histogram range must have positive width");
  if (bins < 2) throw DataError("histogram needs at least 2 bins");
  std::vector<double> edges(bins + 1);
  const double width = (ln_hi - ln_lo) / bins;
  for (int k = 0; k <= bins; ++k) edges[k] = ln_lo + k * width;
  edges[bins] = ln_hi;
  return edges;
}

LogHistogram build_histogram(const std::vector<double>& samples_ms, int bins,
                             std::optional<std::pair<double, double>> ln_range) {
  if (samples_ms.empty()) throw DataError("cannot build a histogram from no samples");
  if (bins < 2) throw DataError("histogram needs at least 2 bins");
  std::vector<double> lx;
  lx.reserve(samples_ms.size());
  for (double v : samples_ms) {
    if (!(v > 0.0)) throw DataError("histogram samples must be positive");
    lx.push_back(std::log(v));
  }
  double lo, hi;
  if (ln_range) {
    lo = ln_range->first;
    hi = ln_range->second;
  } else {
    lo = *std::min_element(lx.begin(), lx.end());
    hi = *std::max_element(lx.begin(), lx.end());
    if (!(hi > lo)) {
      throw DataError("histogram samples are constant; pass an explicit range");
    }
  }
  LogHistogram hist;
  hist.edges = make_log_edges(lo, hi, bins);
  hist.masses.assign(bins, 0.0);
  hist.sample_count = static_cast<std::int64_t>(lx.size());
  const double w = 1.0 / static_cast<double>(lx.size());
  for (double v : lx) {
    // First edge at or above v; values on an interior edge fall to the left.
    auto it = std::lower_bound(hist.edges.begin(), hist.edges.end(), v);
    std::int64_t idx;
    if (it == hist.edges.begin()) {
      idx = 0;
    } else if (it == hist.edges.end()) {
      idx = bins - 1;
    } else {
      idx = (it - hist.edges.begin()) - 1;
    }
    hist.masses[static_cast<std::size_t>(idx)] += w;
  }
  return hist;
}

double kl_divergence(const LogHistogram& p, const LogHistogram& q) {
  if (p.edges.size() != q.edges.size() || !std::equal(p.edges.begin(), p.edges.end(),
                                                      q.edges.begin())) {
    throw DataError("kl_divergence: histograms have different bin edges");
  }
  constexpr double kEps = 1e-10;
  bool needs_smoothing = false;
  for (std::size_t i = 0; i < q.masses.size(); ++i) {
    if (p.masses[i] > 0.0 && q.masses[i] == 0.0) needs_smoothing = true;
  }
  std::vector<double> qs;
  const std::vector<double>* qm = &q.masses;
  if (needs_smoothing) {
    qs = q.masses;
    double total = 0.0;
    for (double& v : qs) {
      if (v < kEps) v = kEps;
      total += v;
    }
    for (double& v : qs) v /= total;
    qm = &qs;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.masses.size(); ++i) {
    if (p.masses[i] > 0.0) kl += p.masses[i] * std::log(p.masses[i] / (*qm)[i]);
  }
  return kl < 0.0 ? 0.0 : kl;
}

void export_histogram(const LogHistogram& hist, const std::string& path) {
  std::ostringstream out;
  out << "edge_lo,edge_hi,mass\n";
  for (std::size_t i = 0; i < hist.masses.size(); ++i) {
    out << fmt_double(hist.edges[i]) << ',' << fmt_double(hist.edges[i + 1]) << ','
        << fmt_double(hist.masses[i]) << '\n';
  }
  write_text_file(path, out.str());
}

LogHistogram import_histogram(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "edge_lo,edge_hi,mass") {
    throw DataError(path + ": expected header 'edge_lo,edge_hi,mass'");
  }
  LogHistogram hist;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw DataError(path + ": expected 3 fields per row");
    const double lo = parse_double(f[0], path);
    const double hi = parse_double(f[1], path);
    if (hist.edges.empty()) {
      hist.edges.push_back(lo);
    } else if (hist.edges.back() != lo) {
      throw DataError(path + ": bin edges are not contiguous");
    }
    hist.edges.push_back(hi);
    hist.masses.push_back(parse_double(f[2], path));
  }
  if (hist.masses.empty()) throw DataError(path + ": histogram file has no bins");
  return hist;
}

// --- Synthetic ground truth -------------------------------------------------

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.base_time_ms = parse_iso8601_ms("2022-03-01T08:00:00.000");

  // Transition counts observed for the laser cutting machine.
  const std::array<std::array<double, kNumStates>, kNumStates> counts = {{
      {0, 4, 296, 17, 151},
      {51, 0, 36, 21, 0},
      {198, 52, 0, 2, 15},
      {9, 0, 31, 0, 0},
      {63, 0, 103, 0, 0},
  }};
  for (int i = 0; i < kNumStates; ++i) {
    double total = 0.0;
    for (double c : counts[i]) total += c;
    for (int j = 0; j < kNumStates; ++j) spec.transition[i][j] = counts[i][j] / total;
  }

  // Every state mixes the same three timing components (tens of ms, tens of
  // seconds, minutes) in state-specific proportions. The states' traffic
  // patterns are variations of one machine's messaging behavior, which is
  // also what lets a single conditional model cover the rarely visited
  // states.
  const MixtureComponent fast{0.0, std::log(30.0), 0.70};
  const MixtureComponent medium{0.0, std::log(20000.0), 0.60};
  const MixtureComponent slow{0.0, std::log(120000.0), 0.40};
  const auto mix = [&](double wf, double wm, double ws) {
    std::vector<MixtureComponent> m = {fast, medium, slow};
    m[0].weight = wf;
    m[1].weight = wm;
    m[2].weight = ws;
    return m;
  };

  auto& running = spec.states[0];
  running.interarrival = mix(0.60, 0.30, 0.10);
  running.sizes = {{32, 0.30}, {64, 0.25}, {96, 0.15}, {128, 0.12},
                   {256, 0.10}, {512, 0.05}, {1024, 0.03}};

  auto& reentry = spec.states[1];
  reentry.interarrival = mix(0.72, 0.21, 0.07);
  reentry.sizes = {{32, 0.50}, {64, 0.30}, {128, 0.20}};

  auto& stopped = spec.states[2];
  stopped.interarrival = mix(0.45, 0.45, 0.10);
  stopped.sizes = {{32, 0.40}, {64, 0.30}, {96, 0.20}, {160, 0.10}};

  auto& aborted = spec.states[3];
  aborted.interarrival = mix(0.68, 0.24, 0.08);
  aborted.sizes = {{64, 0.50}, {128, 0.30}, {256, 0.20}};

  auto& ended = spec.states[4];
  ended.interarrival = mix(0.55, 0.35, 0.10);
  ended.sizes = {{32, 0.60}, {96, 0.25}, {192, 0.15}};

  // Sojourn scale per source state, shared across destinations; tuned so
  // 1000 jumps yield roughly 15000/500/4000/500/2000 samples per state.
  const std::array<LogNormalParams, kNumStates> sojourn = {{
      {13.242, 0.80},  // Running: the longest, minutes-scale
      {10.870, 0.60},  // Reentry
      {12.330, 0.70},  // Stopped
      {11.990, 0.60},  // Aborted
      {12.330, 0.60},  // Ended
  }};
  for (int i = 0; i < kNumStates; ++i) {
    for (int j = 0; j < kNumStates; ++j) spec.jump_time[i][j] = sojourn[i];
  }
  return spec;
}

double sample_interarrival(const StateSpec& state, Rng& rng) {
  if (state.interarrival.empty()) throw DataError("state has no interarrival mixture");
  double total = 0.0;
  for (const auto& c : state.interarrival) total += c.weight;
  const double u = rng.uniform() * total;
  double cum = 0.0;
  const MixtureComponent* pick = &state.interarrival.back();
  for (const auto& c : state.interarrival) {
    cum += c.weight;
    if (u < cum) {
      pick = &c;
      break;
    }
  }
  return std::exp(pick->mu + pick->sigma * rng.normal());
}

std::int64_t sample_size(const StateSpec& state, Rng& rng) {
  if (state.sizes.empty()) throw DataError("state has no size distribution");
  double total = 0.0;
  for (const auto& e : state.sizes) total += e.prob;
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (const auto& e : state.sizes) {
    cum += e.prob;
    if (u < cum) return e.bytes;
  }
  return state.sizes.back().bytes;
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

LogHistogram mixture_histogram(const StateSpec& state, const std::vector<double>& edges) {
  if (edges.size() < 3) throw DataError("mixture_histogram needs at least 2 bins");
  double weight_total = 0.0;
  for (const auto& c : state.interarrival) weight_total += c.weight;
  LogHistogram hist;
  hist.edges = edges;
  hist.masses.assign(edges.size() - 1, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    double mass = 0.0;
    for (const auto& c : state.interarrival) {
      mass += c.weight / weight_total *
              (normal_cdf((edges[k + 1] - c.mu) / c.sigma) -
               normal_cdf((edges[k] - c.mu) / c.sigma));
    }
    hist.masses[k] = mass;
    total += mass;
  }
  if (!(total > 0.0)) throw DataError("mixture has no mass over the requested range");
  for (double& m : hist.masses) m /= total;
  return hist;
}

std::array<std::int64_t, kNumStates> SyntheticDataset::state_counts() const {
  std::array<std::int64_t, kNumStates> counts{};
  for (const auto& s : samples) counts[state_index(s.state)]++;
  return counts;
}

namespace {

LogRecord control_record(std::int64_t t, ProductionState s) {
  return {t, kControlDataId, std::string(state_name(s)), 16};
}

LogRecord packet_record(std::int64_t t, std::int64_t bytes) {
  return {t, "machine.data", "", bytes};
}

int categorical_row(const std::array<double, kNumStates>& row, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  int last = -1;
  for (int j = 0; j < kNumStates; ++j) {
    if (row[j] <= 0.0) continue;
    last = j;
    cum += row[j];
    if (u < cum) return j;
  }
  if (last < 0) throw DataError("synthetic spec: state has no outgoing transitions");
  return last;
}

}  // namespace

SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec, std::int64_t n_jumps,
                                            std::uint64_t seed) {
  if (n_jumps < 1) throw DataError("n_jumps must be >= 1");
  SyntheticDataset out;
  out.spec = spec;
  Rng rng(seed);

  bool any_transition = false;
  for (const auto& row : spec.transition) {
    for (double p : row) any_transition = any_transition || p > 0.0;
  }

  int state = state_index(spec.initial);
  std::int64_t now = spec.base_time_ms;

  if (!any_transition) {
    // Degenerate spec: one open episode, n_jumps i.i.d. packets.
    StateEpisode ep{state_from_code(state + 1), now, now, {control_record(now, spec.initial)}};
    std::int64_t t = now;
    for (std::int64_t k = 0; k < n_jumps; ++k) {
      const auto gap = std::max<std::int64_t>(
          1, std::llround(sample_interarrival(spec.states[state], rng)));
      const auto bytes = sample_size(spec.states[state], rng);
      t += gap;
      ep.records.push_back(packet_record(t, bytes));
      out.samples.push_back({static_cast<double>(gap), bytes, ep.state});
    }
    ep.end_ms = t;
    out.trace.episodes.push_back(std::move(ep));
    return out;
  }

  for (std::int64_t n = 0; n < n_jumps; ++n) {
    const int next = categorical_row(spec.transition[state], rng);
    const auto& jt = spec.jump_time[state][next];
    const auto sojourn = std::max<std::int64_t>(
        1, std::llround(std::exp(jt.mu + jt.sigma * rng.normal())));

    StateEpisode ep{state_from_code(state + 1), now, now + sojourn,
                    {control_record(now, state_from_code(state + 1))}};
    std::int64_t t = now;
    for (;;) {
      const auto gap = std::max<std::int64_t>(
          1, std::llround(sample_interarrival(spec.states[state], rng)));
      if (t + gap >= now + sojourn) break;  // packet would cross the jump
      t += gap;
      const auto bytes = sample_size(spec.states[state], rng);
      ep.records.push_back(packet_record(t, bytes));
      out.samples.push_back({static_cast<double>(gap), bytes, ep.state});
    }
    out.trace.episodes.push_back(std::move(ep));
    now += sojourn;
    state = next;
  }
  // Open-ended final episode: just the control record announcing the state.
  out.trace.episodes.push_back(
      {state_from_code(state + 1), now, now, {control_record(now, state_from_code(state + 1))}});
  return out;
}

void write_log_csv(const AnnotatedTrace& trace, const std::string& path) {
  std::ostringstream out;
  out << "processed_time,data_id,data_value,data_payload\n";
  for (const auto& ep : trace.episodes) {
    for (const auto& rec : ep.records) {
      out << format_iso8601_ms(rec.processed_time_ms) << ',' << csv_escape(rec.data_id)
          << ',' << csv_escape(rec.data_value) << ',' << rec.data_payload << '\n';
    }
  }
  write_text_file(path, out.str());
}

void write_state_map_csv(const std::string& path) {
  std::ostringstream out;
  out << "# control message id, value pattern, state\n";
  for (ProductionState s : kAllStates) {
    out << kControlDataId << ",^" << state_name(s) << "$," << state_name(s) << '\n';
  }
  write_text_file(path, out.str());
}

// --- Synthetic spec persistence ----------------------------------------------

void save_synthetic_spec(const SyntheticSpec& spec, const std::string& path) {
  nlohmann::json j;
  j["initial"] = std::string(state_name(spec.initial));
  j["base_time_ms"] = spec.base_time_ms;
  j["transition"] = spec.transition;
  for (int i = 0; i < kNumStates; ++i) {
    for (int k = 0; k < kNumStates; ++k) {
      j["jump_time"][i][k] = {{"mu", spec.jump_time[i][k].mu},
                              {"sigma", spec.jump_time[i][k].sigma}};
    }
  }
  for (ProductionState s : kAllStates) {
    const auto& st = spec.states[state_index(s)];
    nlohmann::json js;
    js["interarrival"] = nlohmann::json::array();
    js["sizes"] = nlohmann::json::array();
    for (const auto& c : st.interarrival) {
      js["interarrival"].push_back({{"weight", c.weight}, {"mu", c.mu}, {"sigma", c.sigma}});
    }
    for (const auto& e : st.sizes) {
      js["sizes"].push_back({{"bytes", e.bytes}, {"prob", e.prob}});
    }
    j["states"][std::string(state_name(s))] = std::move(js);
  }
  write_text_file(path, j.dump(2) + "\n");
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    SyntheticSpec spec;
    spec.initial = state_from_name(j.at("initial").get<std::string>());
    spec.base_time_ms = j.at("base_time_ms").get<std::int64_t>();
    for (int i = 0; i < kNumStates; ++i) {
      for (int k = 0; k < kNumStates; ++k) {
        spec.transition[i][k] = j.at("transition").at(i).at(k).get<double>();
        const auto& jt = j.at("jump_time").at(i).at(k);
        spec.jump_time[i][k] = {jt.at("mu").get<double>(), jt.at("sigma").get<double>()};
      }
    }
    for (ProductionState s : kAllStates) {
      const auto& js = j.at("states").at(std::string(state_name(s)));
      auto& st = spec.states[state_index(s)];
      for (const auto& c : js.at("interarrival")) {
        st.interarrival.push_back({c.at("weight").get<double>(), c.at("mu").get<double>(),
                                   c.at("sigma").get<double>()});
      }
      for (const auto& e : js.at("sizes")) {
        st.sizes.push_back({e.at("bytes").get<std::int64_t>(), e.at("prob").get<double>()});
      }
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed synthetic spec: " + e.what());
  }
}

// --- Model comparison ----------------------------------------------------------

namespace {

const std::optional<GenerativeModel>* cell_model(const EvalModelSet& models, int row,
                                                 int state_idx) {
  switch (row) {
    case 0: return &models.vae_1d[state_idx];
    case 1: return &models.cvae_1d;
    case 2: return &models.gan_1d[state_idx];
    case 3: return &models.vae_2d[state_idx];
    case 4: return &models.cvae_2d;
    case 5: return &models.gan_2d[state_idx];
  }
  throw DataError("bad comparison row");
}

}  // namespace

ComparisonArtifacts compare_models(const std::vector<TrafficSample>& test_samples,
                                   const EvalModelSet& models, std::uint64_t seed, int bins,
                                   int min_generated) {
  ComparisonArtifacts out;
  for (ProductionState s : kAllStates) {
    const int si = state_index(s);
    std::vector<double> real;
    for (const auto& sample : test_samples) {
      if (sample.state == s) real.push_back(sample.interarrival_ms);
    }
    if (real.empty()) {
      throw DataError("no test samples for state " + std::string(state_name(s)));
    }
    const LogHistogram real_hist = build_histogram(real, bins);
    out.real_histograms[si] = real_hist;
    const auto range = std::make_pair(real_hist.edges.front(), real_hist.edges.back());

    for (int row = 0; row < 6; ++row) {
      const auto* cell = cell_model(models, row, si);
      if (!cell->has_value()) {
        throw DataError(std::string("missing model for cell ") + kComparisonRows[row] +
                        " / " + std::string(state_name(s)));
      }
      const int n_gen = std::max<int>(static_cast<int>(real.size()), min_generated);
      Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(row * kNumStates + si)));
      const auto gen = sample_interarrivals_ms(**cell, s, n_gen, rng);
      const LogHistogram gen_hist = build_histogram(gen, bins, range);
      out.table.kl[row][si] = kl_divergence(real_hist, gen_hist);
    }
  }
  return out;
}

void write_comparison_csv(const ComparisonTable& table, const std::string& path) {
  std::ostringstream out;
  out << "model";
  for (ProductionState s : kAllStates) out << ',' << state_name(s);
  out << '\n';
  for (int row = 0; row < 6; ++row) {
    out << kComparisonRows[row];
    for (int si = 0; si < kNumStates; ++si) out << ',' << fmt_double(table.kl[row][si]);
    out << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace itgen
