#include "raceway/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "raceway/errors.hpp"

namespace raceway {

namespace {

double offset_sum(const LapCoefficients& coeffs) {
  return std::accumulate(coeffs.offset.begin(), coeffs.offset.end(), 0.0);
}

double lap_normalizer(const LapCoefficients& coeffs) {
  return static_cast<double>(coeffs.size()) * coeffs.lap_time;
}

void require_match(const Permutation& p, const LapCoefficients& coeffs) {
  if (p.size() != coeffs.size() || coeffs.forcing.size() != p.size() ||
      coeffs.gamma.size() != p.size() || coeffs.offset.size() != p.size()) {
    throw InvalidInput("permutation and lap coefficients have different sizes");
  }
}

}  // namespace

double mu_bar_from_state(const LapState& start, const LapCoefficients& coeffs) {
  if (start.size() != coeffs.gamma.size() ||
      coeffs.offset.size() != coeffs.gamma.size()) {
    throw InvalidInput("state and lap coefficients have different sizes");
  }
  double dot = 0.0;
  for (std::size_t n = 0; n < start.size(); ++n) {
    dot += coeffs.gamma[n] * start[n];
  }
  return (dot + offset_sum(coeffs)) / lap_normalizer(coeffs);
}

double mu_bar_multi_lap(const Permutation& p, const LapCoefficients& coeffs,
                        const LapState& start, std::size_t laps) {
  if (laps == 0) {
    throw InvalidInput("multi-lap average needs K >= 1");
  }
  LapState state = start;
  double sum = 0.0;
  for (std::size_t k = 0; k < laps; ++k) {
    sum += mu_bar_from_state(state, coeffs);
    if (k + 1 < laps) state = apply_lap(p, coeffs, state);
  }
  return sum / static_cast<double>(laps);
}

double objective_j(const Permutation& p, const LapCoefficients& coeffs) {
  require_match(p, coeffs);
  require_contraction(coeffs);
  return fixed_point_dot(p.targets(), coeffs.decay, coeffs.forcing,
                         coeffs.gamma);
}

double objective_j_approx(const Permutation& p, const LapCoefficients& coeffs) {
  require_match(p, coeffs);
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    s += coeffs.gamma[p[j]] * coeffs.forcing[j];
  }
  return s;
}

double mu_bar_from_j(double j, const LapCoefficients& coeffs) {
  return (j + offset_sum(coeffs)) / lap_normalizer(coeffs);
}

ObjectiveValue evaluate(const Permutation& p, const LapCoefficients& coeffs) {
  const double j = objective_j(p, coeffs);
  return {j, mu_bar_from_j(j, coeffs)};
}

double tie_tolerance(double reference) {
  return kTieTolerance * std::max(1.0, std::abs(reference));
}

bool tied(double a, double b) { return std::abs(a - b) <= tie_tolerance(a); }

Ratios ratios_from_mu(double mu_max, double mu_min, double mu_identity) {
  Ratios r;
  const double scale =
      std::max({std::abs(mu_max), std::abs(mu_min), std::abs(mu_identity)});
  const auto ratio = [&](double num, double den) {
    if (std::abs(den) <= 1e-15 * scale) {
      r.degenerate = true;
      return std::numeric_limits<double>::quiet_NaN();
    }
    if (den < 0.0) r.negative_denominator = true;
    // Normalize -0.0 so equal strategies print as 0.
    const double v = num / den;
    return v == 0.0 ? 0.0 : v;
  };
  r.r1 = ratio(mu_max - mu_identity, mu_identity);
  r.r2 = ratio(mu_max - mu_min, mu_min);
  r.r3 = ratio(mu_identity - mu_min, mu_identity);
  return r;
}

Ratios ratios(const LapCoefficients& coeffs, const Permutation& p_max,
              const Permutation& p_min) {
  const double mu_max = evaluate(p_max, coeffs).mu_bar;
  const double mu_min = evaluate(p_min, coeffs).mu_bar;
  const double mu_id =
      evaluate(Permutation::identity(coeffs.size()), coeffs).mu_bar;
  return ratios_from_mu(mu_max, mu_min, mu_id);
}

std::vector<std::string> Ratios::warnings() const {
  std::vector<std::string> w;
  if (degenerate) {
    w.emplace_back("a growth-rate denominator is numerically zero; ratio set to NaN");
  }
  if (negative_denominator) {
    w.emplace_back("a growth-rate denominator is negative; ratios reported raw");
  }
  return w;
}

}  // namespace raceway
