#include "raceway/lap_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "raceway/errors.hpp"

namespace raceway {

LapState::LapState(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t n = 0; n < values_.size(); ++n) {
    if (!(values_[n] >= 0.0 && values_[n] <= 1.0)) {
      throw InvalidInput("photoinhibition state of layer " +
                         std::to_string(n + 1) + " outside [0, 1]");
    }
  }
}

namespace {

void require_sizes(const Permutation& p, const LapCoefficients& coeffs) {
  const std::size_t n = p.size();
  if (coeffs.decay.size() != n || coeffs.forcing.size() != n ||
      coeffs.gamma.size() != n || coeffs.offset.size() != n) {
    throw InvalidInput("permutation and lap coefficients have different sizes");
  }
}

}  // namespace

void require_contraction(const LapCoefficients& coeffs) {
  const std::size_t n = coeffs.decay.size();
  if (coeffs.forcing.size() != n || coeffs.gamma.size() != n ||
      coeffs.offset.size() != n) {
    throw InvalidInput("lap coefficient vectors have different sizes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(coeffs.decay[i] >= 0.0 && coeffs.decay[i] < 1.0)) {
      std::ostringstream msg;
      msg << "decay factor of layer " << i + 1 << " is " << coeffs.decay[i]
          << "; the lap map must be a strict contraction (0 <= D_n < 1)";
      throw InvalidInput(msg.str());
    }
  }
}

LapState apply_lap(const Permutation& p, const LapCoefficients& coeffs,
                   const LapState& state) {
  require_sizes(p, coeffs);
  if (state.size() != p.size()) {
    throw InvalidInput("state and permutation have different sizes");
  }
  std::vector<double> next(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double v = coeffs.decay[j] * state[j] + coeffs.forcing[j];
    if (v < -kBoxSlack || v > 1.0 + kBoxSlack) {
      std::ostringstream msg;
      msg << "lap image of layer " << j + 1 << " left [0, 1]: " << v;
      throw InvariantViolation(msg.str());
    }
    next[p[j]] = std::clamp(v, 0.0, 1.0);
  }
  return LapState(std::move(next));
}

LapState fixed_point(const Permutation& p, const LapCoefficients& coeffs) {
  require_sizes(p, coeffs);
  require_contraction(coeffs);

  std::vector<double> c(p.size(), 0.0);
  for (const auto& cycle : p.cycles()) {
    // Unroll C_{sigma(j)} = d_j C_j + v_j once around the cycle.
    double a = 1.0;
    double b = 0.0;
    for (const std::size_t j : cycle) {
      a *= coeffs.decay[j];
      b = coeffs.decay[j] * b + coeffs.forcing[j];
    }
    const std::size_t head = cycle.front();
    c[head] = b / (1.0 - a);
    for (std::size_t k = 0; k + 1 < cycle.size(); ++k) {
      const std::size_t j = cycle[k];
      c[p[j]] = coeffs.decay[j] * c[j] + coeffs.forcing[j];
    }
  }
  for (double& v : c) {
    if (v < -kBoxSlack || v > 1.0 + kBoxSlack) {
      throw InvariantViolation("fixed point left the [0, 1] box");
    }
    v = std::clamp(v, 0.0, 1.0);
  }
  return LapState(std::move(c));
}

std::vector<LapState> simulate_laps(const Permutation& p,
                                    const LapCoefficients& coeffs,
                                    const LapState& initial, std::size_t laps) {
  std::vector<LapState> out;
  out.reserve(laps + 1);
  out.push_back(initial);
  for (std::size_t k = 0; k < laps; ++k) {
    out.push_back(apply_lap(p, coeffs, out.back()));
  }
  return out;
}

double max_abs_diff(const LapState& a, const LapState& b) {
  if (a.size() != b.size()) {
    throw InvalidInput("states have different sizes");
  }
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    m = std::max(m, std::abs(a[n] - b[n]));
  }
  return m;
}

PeriodicityReport check_periodicity(const Permutation& p,
                                    const LapCoefficients& coeffs,
                                    const LapState& initial, std::size_t laps,
                                    double tol) {
  if (laps == 0) {
    throw InvalidInput("periodicity check needs K >= 1 laps");
  }
  PeriodicityReport r;
  r.laps = laps;
  LapState state = initial;
  for (std::size_t k = 1; k <= laps; ++k) {
    state = apply_lap(p, coeffs, state);
    r.max_drift = std::max(r.max_drift, max_abs_diff(state, initial));
  }
  r.return_gap = max_abs_diff(state, initial);
  r.periodic = r.return_gap < tol;
  r.constant = r.max_drift <= 10.0 * tol;
  return r;
}

double fixed_point_dot(std::span<const std::uint8_t> sigma,
                       std::span<const double> decay,
                       std::span<const double> forcing,
                       std::span<const double> weight) {
  const std::size_t n = sigma.size();
  if (n <= 64) {
    return fixed_point_dot_small(sigma.data(), n, decay.data(), forcing.data(),
                                 weight.data());
  }
  std::vector<bool> seen(n, false);
  double total = 0.0;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    double a = 1.0;
    double b = 0.0;
    double sum_a = 0.0;
    double sum_b = 0.0;
    std::size_t i = start;
    do {
      seen[i] = true;
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

}  // namespace raceway
