#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace itgen {

// Raised for malformed inputs, bad files, and contract violations on data.
// The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when training or estimation produces non-finite values.
// The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operational states of the machine. Integer codes are stable across
// persistence; do not reorder.
enum class ProductionState : int {
  Running = 1,
  Reentry = 2,
  Stopped = 3,
  Aborted = 4,
  Ended = 5,
};

inline constexpr int kNumStates = 5;

inline constexpr std::array<ProductionState, kNumStates> kAllStates = {
    ProductionState::Running, ProductionState::Reentry,
    ProductionState::Stopped, ProductionState::Aborted,
    ProductionState::Ended};

constexpr int state_code(ProductionState s) { return static_cast<int>(s); }

// Zero-based index for array storage.
constexpr int state_index(ProductionState s) { return static_cast<int>(s) - 1; }

ProductionState state_from_code(int code);
std::string_view state_name(ProductionState s);
ProductionState state_from_name(std::string_view name);

// One row of the machine log.
struct LogRecord {
  std::int64_t processed_time_ms = 0;  // epoch milliseconds
  std::string data_id;
  std::string data_value;
  std::int64_t data_payload = 0;  // raw bytes, >= 0
};

// One (interarrival, size) observation attributed to a production state.
struct TrafficSample {
  double interarrival_ms = 0.0;  // > 0
  std::int64_t size_bytes = 0;   // multiple of 32 (0 allowed for empty payloads)
  ProductionState state = ProductionState::Running;
};

// Payloads are rounded up to the next multiple of 32 bytes; zero stays zero.
inline constexpr std::int64_t kPayloadQuantum = 32;

std::int64_t quantize_payload(std::int64_t raw_bytes);

// Per-dimension bounds of natural-log values, fitted on training data.
// normalize() maps ln(x) affinely onto [0,1]; denormalize() inverts it.
struct NormalizationSpec {
  std::vector<double> min_log;
  std::vector<double> max_log;

  int dims() const { return static_cast<int>(min_log.size()); }
};

// Fits per-dimension ln min/max. All values must be strictly positive and
// every dimension must have spread (min < max).
NormalizationSpec fit_normalization(const std::vector<std::vector<double>>& samples);

// Maps a strictly positive value into [0,1]; out-of-range values clamp so a
// spec fitted on one split can score another.
double normalize_value(const NormalizationSpec& spec, int dim, double x);
std::vector<double> normalize(const NormalizationSpec& spec, const std::vector<double>& x);

// Inverse of normalize on in-range values; u outside [0,1] is an error.
double denormalize_value(const NormalizationSpec& spec, int dim, double u);
std::vector<double> denormalize(const NormalizationSpec& spec, const std::vector<double>& u);

}  // namespace itgen
