#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace accmd {

using Vector = std::vector<double>;

// Error taxonomy used across the library. The CLI maps usage/config errors
// (bad flags, unresolvable manifests, malformed file contents) to exit code 2;
// io/domain/step errors raised once computation or output has started map to
// exit code 1.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct step_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) {
  for (double t : v) {
    if (!std::isfinite(t)) return false;
  }
  return true;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw usage_error(msg);
}

}  // namespace accmd
