#include "itgen/core.hpp"

#include <cmath>
#include <limits>

namespace itgen {

ProductionState state_from_code(int code) {
  if (code < 1 || code > kNumStates) {
    throw DataError("invalid production state code " + std::to_string(code));
  }
  return static_cast<ProductionState>(code);
}

std::string_view state_name(ProductionState s) {
  switch (s) {
    case ProductionState::Running: return "Running";
    case ProductionState::Reentry: return "Reentry";
    case ProductionState::Stopped: return "Stopped";
    case ProductionState::Aborted: return "Aborted";
    case ProductionState::Ended: return "Ended";
  }
  throw DataError("invalid production state");
}

ProductionState state_from_name(std::string_view name) {
  for (ProductionState s : kAllStates) {
    if (state_name(s) == name) return s;
  }
  throw DataError("unknown production state name '" + std::string(name) + "'");
}

std::int64_t quantize_payload(std::int64_t raw_bytes) {
  if (raw_bytes < 0) throw DataError("payload must be non-negative");
  return (raw_bytes + kPayloadQuantum - 1) / kPayloadQuantum * kPayloadQuantum;
}

NormalizationSpec fit_normalization(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) {
    throw DataError("fit_normalization needs at least 2 samples");
  }
  const std::size_t dims = samples.front().size();
  if (dims == 0) throw DataError("fit_normalization: empty sample");
  NormalizationSpec spec;
  spec.min_log.assign(dims, std::numeric_limits<double>::infinity());
  spec.max_log.assign(dims, -std::numeric_limits<double>::infinity());
  for (const auto& row : samples) {
    if (row.size() != dims) {
      throw DataError("fit_normalization: inconsistent sample dimensions");
    }
    for (std::size_t d = 0; d < dims; ++d) {
      if (!(row[d] > 0.0)) {
        throw DataError("fit_normalization: values must be strictly positive");
      }
      const double lx = std::log(row[d]);
      spec.min_log[d] = std::min(spec.min_log[d], lx);
      spec.max_log[d] = std::max(spec.max_log[d], lx);
    }
  }
  for (std::size_t d = 0; d < dims; ++d) {
    if (!(spec.max_log[d] > spec.min_log[d])) {
      throw DataError("fit_normalization: degenerate dimension " + std::to_string(d));
    }
  }
  return spec;
}

double normalize_value(const NormalizationSpec& spec, int dim, double x) {
  if (dim < 0 || dim >= spec.dims()) throw DataError("normalize: bad dimension");
  if (!(x > 0.0)) throw DataError("normalize: value must be strictly positive");
  const double u = (std::log(x) - spec.min_log[dim]) /
                   (spec.max_log[dim] - spec.min_log[dim]);
  if (u < 0.0) return 0.0;
  if (u > 1.0) return 1.0;
  return u;
}

std::vector<double> normalize(const NormalizationSpec& spec, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != spec.dims()) {
    throw DataError("normalize: dimension mismatch");
  }
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    out[d] = normalize_value(spec, static_cast<int>(d), x[d]);
  }
  return out;
}

double denormalize_value(const NormalizationSpec& spec, int dim, double u) {
  if (dim < 0 || dim >= spec.dims()) throw DataError("denormalize: bad dimension");
  if (!(u >= 0.0 && u <= 1.0)) {
    throw DataError("denormalize: value outside [0,1]");
  }
  return std::exp(spec.min_log[dim] + u * (spec.max_log[dim] - spec.min_log[dim]));
}

std::vector<double> denormalize(const NormalizationSpec& spec, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != spec.dims()) {
    throw DataError("denormalize: dimension mismatch");
  }
  std::vector<double> out(u.size());
  for (std::size_t d = 0; d < u.size(); ++d) {
    out[d] = denormalize_value(spec, static_cast<int>(d), u[d]);
  }
  return out;
}

}  // namespace itgen
