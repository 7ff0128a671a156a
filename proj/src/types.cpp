#include "pcest/types.hpp"

#include <numeric>

namespace pcest {

void validate(const SystemParams& p) {
  if (!std::isfinite(p.delta) || !std::isfinite(p.omega) || !std::isfinite(p.gamma))
    throw DomainError("SystemParams: non-finite field");
  if (p.gamma <= 0.0) throw DomainError("SystemParams: gamma must be > 0");
  if (p.omega < 0.0) throw DomainError("SystemParams: omega must be >= 0");
  if (p.delta < 0.0) throw DomainError("SystemParams: delta must be >= 0");
}

void validate_emitting(const SystemParams& p) {
  validate(p);
  if (p.omega == 0.0) throw DomainError("SystemParams: omega = 0, the emitter never emits");
}

double DelayRecord::total_time() const {
  return std::accumulate(delays.begin(), delays.end(), 0.0);
}

double DelayRecord::mean_delay() const {
  if (delays.empty()) throw DomainError("mean_delay: empty record");
  return total_time() / static_cast<double>(delays.size());
}

void validate(const DelayRecord& r) {
  for (double t : r.delays)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw DomainError("DelayRecord: delays must be finite and non-negative");
}

}  // namespace pcest
