#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string_view>

namespace kryreg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Arithmetic used by the kernel matrix-vector product.
enum class Precision { Full, Reduced };

inline constexpr std::string_view to_string(Precision p) {
  return p == Precision::Full ? "full" : "reduced";
}

/// Tally of matrix-vector products split by precision mode.
struct MvpCounts {
  std::uint64_t full = 0;
  std::uint64_t reduced = 0;

  std::uint64_t total() const { return full + reduced; }
  friend MvpCounts operator-(MvpCounts a, MvpCounts b) {
    return {a.full - b.full, a.reduced - b.reduced};
  }
  friend bool operator==(const MvpCounts&, const MvpCounts&) = default;
};

}  // namespace kryreg
