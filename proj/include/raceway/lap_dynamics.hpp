#pragma once

// Multi-lap evolution C^{k+1}(0) = P (D C^k(0) + V) and its fixed point.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "raceway/kinetics.hpp"
#include "raceway/permutation.hpp"

namespace raceway {

/// Photoinhibition fraction C_n of every layer at the start of a lap.
class LapState {
 public:
  /// Throws InvalidInput unless every entry lies in [0, 1].
  explicit LapState(std::vector<double> values);

  static LapState zeros(std::size_t n) { return LapState(std::vector<double>(n, 0.0)); }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t n) const { return values_[n]; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const LapState&, const LapState&) = default;

 private:
  std::vector<double> values_;
};

inline constexpr double kFixedPointResidualTol = 1e-13;
inline constexpr double kPeriodicityTol = 1e-10;
/// Slack allowed past [0, 1] before apply_lap reports a box violation.
inline constexpr double kBoxSlack = 1e-12;

/// One lap followed by mixing. Throws InvariantViolation if the image leaves
/// the [0, 1] box by more than kBoxSlack (it is reported, not clamped).
LapState apply_lap(const Permutation& p, const LapCoefficients& coeffs,
                   const LapState& state);

/// Unique C* = P (D C* + V), solved cycle by cycle in O(N).
/// Requires every D_n < 1.
LapState fixed_point(const Permutation& p, const LapCoefficients& coeffs);

/// Throws InvalidInput if sizes disagree or some D_n lies outside [0, 1).
void require_contraction(const LapCoefficients& coeffs);

/// <weight, C*> for the fixed point of sigma without materializing C*.
///
/// Along a cycle j -> sigma(j) -> ..., each entry is affine in the cycle's
/// first entry: C_i = a_i C_start + b_i. One walk accumulates the products
/// and the weighted sums; closing the cycle gives C_start = b / (1 - a).
/// No argument checks: callers guarantee equal sizes, N <= 64 and
/// 0 <= D_n < 1. This is the inner kernel of the exhaustive search.
inline double fixed_point_dot_small(const std::uint8_t* sigma, std::size_t n,
                                    const double* decay, const double* forcing,
                                    const double* weight) {
  std::uint64_t seen = 0;
  double total = 0.0;
  for (std::size_t start = 0; start < n; ++start) {
    if ((seen >> start) & 1U) continue;
    double a = 1.0;
    double b = 0.0;
    double sum_a = 0.0;
    double sum_b = 0.0;
    std::size_t i = start;
    do {
      seen |= std::uint64_t{1} << i;
      sum_a += weight[i] * a;
      sum_b += weight[i] * b;
      a *= decay[i];
      b = decay[i] * b + forcing[i];
      i = sigma[i];
    } while (i != start);
    total += sum_a * (b / (1.0 - a)) + sum_b;
  }
  return total;
}

/// Any-size version of fixed_point_dot_small.
double fixed_point_dot(std::span<const std::uint8_t> sigma,
                       std::span<const double> decay,
                       std::span<const double> forcing,
                       std::span<const double> weight);

/// (C^0(0), ..., C^K(0)) under repeated apply_lap.
std::vector<LapState> simulate_laps(const Permutation& p,
                                    const LapCoefficients& coeffs,
                                    const LapState& initial, std::size_t laps);

/// Executable witness that a KT-periodic evolution is already T-periodic.
struct PeriodicityReport {
  std::size_t laps = 0;
  double return_gap = 0.0;   ///< ||C^K - C^0||_inf
  double max_drift = 0.0;    ///< max_k ||C^k - C^0||_inf over k = 1..K
  bool periodic = false;     ///< return_gap < tol
  bool constant = false;     ///< max_drift <= 10 tol
  /// Periodic implies constant; false here means the theory was contradicted.
  bool consistent() const { return !periodic || constant; }
};

PeriodicityReport check_periodicity(const Permutation& p,
                                    const LapCoefficients& coeffs,
                                    const LapState& initial, std::size_t laps,
                                    double tol = kPeriodicityTol);

/// ||a - b||_inf for equally sized states.
double max_abs_diff(const LapState& a, const LapState& b);

}  // namespace raceway
