#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace evib {

// Bad sample data, malformed files, parameter values outside the physical contract.
// The CLI maps this to exit code 3.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Command-line / configuration misuse. The CLI maps this to exit code 2.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A fit that did not reach a usable optimum where the caller required one.
// The CLI maps this to exit code 4.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Non-fatal diagnostics collected by operations that can proceed anyway
// (extrapolation, skipped sweeps, clipped boosts, ...). Callers that don't
// care pass nullptr.
struct Warnings {
  std::vector<std::string> items;

  void add(std::string msg) { items.push_back(std::move(msg)); }
  bool empty() const { return items.empty(); }
};

inline void warn(Warnings* w, std::string msg) {
  if (w != nullptr) w->add(std::move(msg));
}

}  // namespace evib
