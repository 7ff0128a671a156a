#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcest {

// Error hierarchy. Everything derives from std::runtime_error or
// std::domain_error so callers can catch broadly when they do not care.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Physical parameters of the driven two-level emitter, in angular-frequency
/// units. All times elsewhere in the library are measured in 1/gamma.
struct SystemParams {
  double delta = 0.0;  ///< detuning, omega_q - omega_L
  double omega = 1.0;  ///< Rabi frequency
  double gamma = 1.0;  ///< spontaneous decay rate (known)

  bool operator==(const SystemParams&) const = default;
};

/// Throws DomainError unless gamma > 0, omega >= 0, delta >= 0 and all finite.
void validate(const SystemParams& p);

/// Same as validate() but additionally requires omega > 0 (photons are emitted).
void validate_emitting(const SystemParams& p);

/// One trajectory's photodetection record: the delays between consecutive
/// clicks, starting from the (ground-state) preparation at t = 0.
struct DelayRecord {
  std::vector<double> delays;
  std::optional<SystemParams> truth;

  std::size_t size() const { return delays.size(); }
  double total_time() const;
  double mean_delay() const;
};

/// Throws DomainError if any delay is negative or non-finite.
void validate(const DelayRecord& r);

}  // namespace pcest
