#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lcf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Attribute = double;

// Raised on malformed inputs: dimension mismatches, values outside a
// declared domain, invalid parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical procedure cannot produce a result (singular
// designs, non-finite evaluations).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic per-stream seed derivation (splitmix64 finalizer). Results
// depend only on (base, stream, index), never on scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index = 0);

// Neumaier-compensated accumulator.
class KahanSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }
  std::size_t count() const { return count_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  std::size_t count_ = 0;
};

// Hardware concurrency, overridden by LCF_LAB_THREADS.
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once; the
// caller writes into preallocated slots so output order is fixed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::string format_double(double v);  // 17 significant digits

}  // namespace lcf
