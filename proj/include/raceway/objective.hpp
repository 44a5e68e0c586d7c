#pragma once

// Growth-rate functionals over mixing permutations.
//
// Growth rates are reported in 1/s: mu_bar is the depth- and lap-averaged net
// specific growth rate.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "raceway/kinetics.hpp"
#include "raceway/lap_dynamics.hpp"
#include "raceway/permutation.hpp"

namespace raceway {

struct ObjectiveValue {
  double J;       ///< <Gamma, C*>
  double mu_bar;  ///< (J + <1, Z>) / (N T)
};

/// (<Gamma, C0> + <1, Z>) / (N T) for a lap started from C0.
double mu_bar_from_state(const LapState& start, const LapCoefficients& coeffs);

/// K-lap average of mu_bar_from_state along C^0, ..., C^{K-1}.
double mu_bar_multi_lap(const Permutation& p, const LapCoefficients& coeffs,
                        const LapState& start, std::size_t laps);

/// J(P) = <Gamma, (I - PD)^{-1} P V>.
double objective_j(const Permutation& p, const LapCoefficients& coeffs);

/// J^approx(P) = <Gamma, P V> = sum_j Gamma_{sigma(j)} V_j.
double objective_j_approx(const Permutation& p, const LapCoefficients& coeffs);

/// J and mu_bar in the periodic regime of P.
ObjectiveValue evaluate(const Permutation& p, const LapCoefficients& coeffs);

/// Converts an objective value to mu_bar for the given coefficients.
double mu_bar_from_j(double j, const LapCoefficients& coeffs);

/// Two objective values are tied iff |a - b| <= kTieTolerance * max(1, |a|).
inline constexpr double kTieTolerance = 1e-12;
double tie_tolerance(double reference);
bool tied(double a, double b);

/// Relative gains between the best, worst and unmixed strategies.
struct Ratios {
  double r1 = 0.0;  ///< (mu(P_max) - mu(I)) / mu(I)
  double r2 = 0.0;  ///< (mu(P_max) - mu(P_min)) / mu(P_min)
  double r3 = 0.0;  ///< (mu(I) - mu(P_min)) / mu(I)
  /// A denominator was numerically zero; the affected ratio is NaN.
  bool degenerate = false;
  /// A denominator was negative, so the sign of a ratio no longer reads as
  /// gain/loss. Values are reported raw.
  bool negative_denominator = false;

  std::vector<std::string> warnings() const;
};

Ratios ratios_from_mu(double mu_max, double mu_min, double mu_identity);
Ratios ratios(const LapCoefficients& coeffs, const Permutation& p_max,
              const Permutation& p_min);

}  // namespace raceway
