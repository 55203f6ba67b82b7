#include "itgen/smp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "itgen/util.hpp"

namespace itgen {

double TransitionMatrix::row_sum(int i) const {
  double s = 0.0;
  for (int j = 0; j < kNumStates; ++j) s += p[i][j];
  return s;
}

std::vector<ProductionState> SemiMarkovModel::dead_states() const {
  std::vector<ProductionState> dead;
  for (int i = 0; i < kNumStates; ++i) {
    std::int64_t observed = 0;
    for (int j = 0; j < kNumStates; ++j) observed += counts[i][j];
    std::int64_t incoming = 0;
    for (int j = 0; j < kNumStates; ++j) incoming += counts[j][i];
    if (observed == 0 && incoming > 0) dead.push_back(state_from_code(i + 1));
  }
  return dead;
}

TransitionStats count_transitions(const AnnotatedTrace& trace) {
  if (trace.episodes.size() < 2) {
    throw DataError("count_transitions needs at least 2 episodes");
  }
  TransitionStats stats;
  for (std::size_t k = 0; k + 1 < trace.episodes.size(); ++k) {
    const auto& from = trace.episodes[k];
    const auto& to = trace.episodes[k + 1];
    if (from.state == to.state) {
      throw DataError("consecutive episodes share a state; trace is not annotated");
    }
    const int i = state_index(from.state);
    const int j = state_index(to.state);
    stats.counts[i][j]++;
    const auto duration = static_cast<double>(to.start_ms - from.start_ms);
    if (duration > 0.0) stats.jumping.samples[i][j].push_back(duration);
  }
  for (int i = 0; i < kNumStates; ++i) {
    for (int j = 0; j < kNumStates; ++j) {
      if (stats.counts[i][j] > 0 && stats.jumping.samples[i][j].empty()) {
        throw DataError("all observed jumps " + std::string(state_name(state_from_code(i + 1))) +
                        "->" + std::string(state_name(state_from_code(j + 1))) +
                        " have zero duration at millisecond resolution");
      }
      std::sort(stats.jumping.samples[i][j].begin(), stats.jumping.samples[i][j].end());
    }
  }
  return stats;
}

TransitionMatrix estimate_transition_matrix(const CountMatrix& counts) {
  TransitionMatrix m;
  for (int i = 0; i < kNumStates; ++i) {
    if (counts[i][i] != 0) {
      throw DataError("transition counts have nonzero diagonal at state " +
                      std::string(state_name(state_from_code(i + 1))));
    }
    std::int64_t total = 0;
    for (int j = 0; j < kNumStates; ++j) {
      if (counts[i][j] < 0) throw DataError("negative transition count");
      total += counts[i][j];
    }
    if (total == 0) continue;  // dead row stays all-zero
    for (int j = 0; j < kNumStates; ++j) {
      m.p[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(total);
    }
  }
  return m;
}

SemiMarkovModel make_smp(const CountMatrix& counts, JumpingTimeTable jumping) {
  SemiMarkovModel model;
  model.counts = counts;
  model.matrix = estimate_transition_matrix(counts);
  model.jumping = std::move(jumping);
  for (int i = 0; i < kNumStates; ++i) {
    for (int j = 0; j < kNumStates; ++j) {
      auto& v = model.jumping.samples[i][j];
      if (model.counts[i][j] == 0 && !v.empty()) {
        throw DataError("jumping-time samples present for unobserved transition");
      }
      if (model.counts[i][j] > 0 && v.empty()) {
        throw DataError("missing jumping-time samples for observed transition");
      }
      for (double t : v) {
        if (!(t > 0.0)) throw DataError("jumping times must be positive");
      }
      std::sort(v.begin(), v.end());
    }
  }
  return model;
}

SemiMarkovModel fit_smp(const AnnotatedTrace& trace) {
  auto stats = count_transitions(trace);
  return make_smp(stats.counts, std::move(stats.jumping));
}

double sojourn_cdf(const SemiMarkovModel& model, ProductionState i, double t_ms) {
  if (t_ms < 0.0) throw DataError("sojourn_cdf: t must be >= 0");
  const int row = state_index(i);
  if (model.matrix.dead_row(row)) {
    throw DataError(std::string("state ") + std::string(state_name(i)) +
                    " has no outgoing transitions");
  }
  double h = 0.0;
  for (int j = 0; j < kNumStates; ++j) {
    const double pij = model.matrix.p[row][j];
    if (pij == 0.0) continue;
    const auto& samples = model.jumping.samples[row][j];
    const auto le = std::upper_bound(samples.begin(), samples.end(), t_ms) - samples.begin();
    h += pij * static_cast<double>(le) / static_cast<double>(samples.size());
  }
  return h;
}

ProductionState sample_next_state(const SemiMarkovModel& model, ProductionState i, Rng& rng) {
  const int row = state_index(i);
  if (model.matrix.dead_row(row)) {
    throw DataError(std::string("cannot leave dead state ") + std::string(state_name(i)));
  }
  const double u = rng.uniform();
  double cum = 0.0;
  int last_positive = -1;
  for (int j = 0; j < kNumStates; ++j) {
    const double pij = model.matrix.p[row][j];
    if (pij == 0.0) continue;
    last_positive = j;
    cum += pij;
    if (u < cum) return state_from_code(j + 1);
  }
  return state_from_code(last_positive + 1);  // guards u==rounded row sum
}

double sample_jumping_time(const SemiMarkovModel& model, ProductionState i,
                           ProductionState j, Rng& rng) {
  const auto& samples = model.jumping.samples[state_index(i)][state_index(j)];
  if (samples.empty()) {
    throw DataError(std::string("no jumping-time samples for ") +
                    std::string(state_name(i)) + "->" + std::string(state_name(j)));
  }
  return samples[rng.uniform_index(samples.size())];
}

std::array<double, kNumStates> embedded_stationary(const TransitionMatrix& matrix) {
  // Support = states that appear in some transition.
  std::array<bool, kNumStates> in_support{};
  for (int i = 0; i < kNumStates; ++i) {
    for (int j = 0; j < kNumStates; ++j) {
      if (matrix.p[i][j] > 0.0) in_support[i] = in_support[j] = true;
    }
  }
  int support_size = 0;
  for (bool b : in_support) support_size += b;
  if (support_size == 0) throw DataError("embedded_stationary: empty transition matrix");
  for (int i = 0; i < kNumStates; ++i) {
    if (in_support[i] && matrix.dead_row(i)) {
      throw DataError("embedded_stationary: state " +
                      std::string(state_name(state_from_code(i + 1))) +
                      " is absorbing; chain is not irreducible");
    }
  }

  std::array<double, kNumStates> v{};
  for (int i = 0; i < kNumStates; ++i) {
    if (in_support[i]) v[i] = 1.0 / static_cast<double>(support_size);
  }
  constexpr std::int64_t kMaxIter = 1000000;
  for (std::int64_t iter = 0; iter < kMaxIter; ++iter) {
    std::array<double, kNumStates> next{};
    for (int i = 0; i < kNumStates; ++i) {
      if (v[i] == 0.0) continue;
      for (int j = 0; j < kNumStates; ++j) {
        next[j] += v[i] * matrix.p[i][j];
      }
    }
    double sum = 0.0;
    for (double x : next) sum += x;
    for (double& x : next) x /= sum;
    // Damping keeps periodic chains (e.g. two-state flips) convergent.
    double change = 0.0;
    for (int i = 0; i < kNumStates; ++i) {
      next[i] = 0.5 * next[i] + 0.5 * v[i];
      change += std::abs(next[i] - v[i]);
    }
    v = next;
    if (change < 1e-12) return v;
  }
  throw NumericalError("embedded_stationary did not converge");
}

namespace {
constexpr int kSmpFormatVersion = 1;
}

void save_smp(const SemiMarkovModel& model, const std::string& path) {
  std::ostringstream out;
  out << "itgen-smp version " << kSmpFormatVersion << "\n";
  out << "counts\n";
  for (int i = 0; i < kNumStates; ++i) {
    for (int j = 0; j < kNumStates; ++j) {
      out << model.counts[i][j] << (j + 1 < kNumStates ? ' ' : '\n');
    }
  }
  out << "jumping_times\n";
  for (int i = 0; i < kNumStates; ++i) {
    for (int j = 0; j < kNumStates; ++j) {
      const auto& v = model.jumping.samples[i][j];
      if (v.empty()) continue;
      out << "pair " << i + 1 << ' ' << j + 1 << ' ' << v.size() << '\n';
      for (std::size_t k = 0; k < v.size(); ++k) {
        out << fmt_double(v[k]) << (k + 1 < v.size() ? ' ' : '\n');
      }
    }
  }
  write_text_file(path, out.str());
}

SemiMarkovModel load_smp(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string tag, word;
  int version = -1;
  in >> tag >> word >> version;
  if (!in || tag != "itgen-smp" || word != "version") {
    throw DataError(path + ": not a semi-Markov model file");
  }
  if (version != kSmpFormatVersion) {
    throw DataError(path + ": unsupported model file version " + std::to_string(version));
  }
  in >> word;
  if (!in || word != "counts") throw DataError(path + ": truncated file (counts)");
  CountMatrix counts{};
  for (int i = 0; i < kNumStates; ++i) {
    for (int j = 0; j < kNumStates; ++j) {
      if (!(in >> counts[i][j])) throw DataError(path + ": truncated file (counts)");
    }
  }
  in >> word;
  if (!in || word != "jumping_times") throw DataError(path + ": truncated file (jumping_times)");
  JumpingTimeTable table;
  while (in >> word) {
    if (word != "pair") throw DataError(path + ": unexpected token '" + word + "'");
    int i = 0, j = 0;
    std::size_t n = 0;
    if (!(in >> i >> j >> n) || i < 1 || i > kNumStates || j < 1 || j > kNumStates) {
      throw DataError(path + ": bad pair header");
    }
    auto& v = table.samples[i - 1][j - 1];
    v.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::string num;
      if (!(in >> num)) throw DataError(path + ": truncated file (pair samples)");
      v[k] = parse_double(num, path);
    }
  }
  return make_smp(counts, std::move(table));
}

}  // namespace itgen
