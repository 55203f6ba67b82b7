#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "itgen/core.hpp"
#include "itgen/ingest.hpp"
#include "itgen/rng.hpp"

namespace itgen {

using CountMatrix = std::array<std::array<std::int64_t, kNumStates>, kNumStates>;

// Embedded-chain transition probabilities. Diagonal is exactly zero; every
// row with observed transitions sums to 1.
struct TransitionMatrix {
  std::array<std::array<double, kNumStates>, kNumStates> p{};

  double row_sum(int i) const;
  bool dead_row(int i) const { return row_sum(i) == 0.0; }
};

// Empirical jumping-time samples per ordered state pair, kept sorted so the
// empirical CDF is a binary search.
struct JumpingTimeTable {
  std::array<std::array<std::vector<double>, kNumStates>, kNumStates> samples;
};

struct TransitionStats {
  CountMatrix counts{};
  JumpingTimeTable jumping;
};

struct SemiMarkovModel {
  CountMatrix counts{};
  TransitionMatrix matrix;
  JumpingTimeTable jumping;

  std::vector<ProductionState> dead_states() const;
};

// Counts episode boundaries i->j; the jumping time of a boundary is the
// duration of the source episode. The open-ended final episode contributes
// no observation.
TransitionStats count_transitions(const AnnotatedTrace& trace);

// Row-normalizes counts. Rows without observations stay all-zero; callers
// decide whether such states are acceptable.
TransitionMatrix estimate_transition_matrix(const CountMatrix& counts);

SemiMarkovModel fit_smp(const AnnotatedTrace& trace);
SemiMarkovModel make_smp(const CountMatrix& counts, JumpingTimeTable jumping);

// H_i(t) = sum_j p_ij * F_ij(t) with F the empirical CDF.
double sojourn_cdf(const SemiMarkovModel& model, ProductionState i, double t_ms);

// Inverse-CDF draw over row i, cumulating in state order 1..5.
ProductionState sample_next_state(const SemiMarkovModel& model, ProductionState i, Rng& rng);

// Bootstrap draw from the empirical (i,j) jumping-time set.
double sample_jumping_time(const SemiMarkovModel& model, ProductionState i,
                           ProductionState j, Rng& rng);

// Left eigenvector of P for eigenvalue 1, by power iteration to L1 tolerance
// 1e-12, normalized to sum 1. States outside the support get weight 0.
std::array<double, kNumStates> embedded_stationary(const TransitionMatrix& matrix);

// Versioned plain-text persistence; round trip is bit-exact.
void save_smp(const SemiMarkovModel& model, const std::string& path);
SemiMarkovModel load_smp(const std::string& path);

}  // namespace itgen
