#include "raceway/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "raceway/errors.hpp"

namespace raceway {

namespace {

void require_intensity(double intensity) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
    throw InvalidInput("light intensity must be finite and >= 0, got " +
                       std::to_string(intensity));
  }
}

// Saturating photon term shared by alpha, beta: k_d tau (sigma I)^2 / (tau sigma I + 1).
double damage_term(double intensity, const HanParams& p) {
  const double s = p.sigma * intensity;
  return p.k_d * p.tau * s * s / (p.tau * s + 1.0);
}

// exp(-x) that reaches exactly zero instead of a subnormal for large x.
constexpr double kExpCutoff = 745.0;

double decay_factor(double x) { return x > kExpCutoff ? 0.0 : std::exp(-x); }

}  // namespace

HanParams HanParams::reference() {
  return HanParams{6.8e-3, 2.99e-4, 0.25, 0.047, 8.7e-6, 1.389e-7};
}

void HanParams::validate() const {
  const auto check = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidInput(std::string("Han parameter ") + name +
                         " must be finite and > 0");
    }
  };
  check(k_r, "k_r");
  check(k_d, "k_d");
  check(tau, "tau");
  check(sigma, "sigma");
  check(k, "k");
  check(R, "R");
}

double rate_alpha(double intensity, const HanParams& p) {
  require_intensity(intensity);
  return damage_term(intensity, p) + p.k_r;
}

double rate_beta(double intensity, const HanParams& p) {
  require_intensity(intensity);
  return damage_term(intensity, p);
}

double rate_gamma(double intensity, const HanParams& p) {
  require_intensity(intensity);
  const double s = p.sigma * intensity;
  return p.k * s / (p.tau * s + 1.0);
}

double rate_zeta(double intensity, const HanParams& p) {
  return rate_gamma(intensity, p) - p.R;
}

LightField build_light_field(double surface_intensity, double bottom_fraction,
                             double depth, std::size_t layers) {
  if (!(surface_intensity >= 0.0) || !std::isfinite(surface_intensity)) {
    throw InvalidInput("surface intensity must be finite and >= 0");
  }
  if (!(bottom_fraction > 0.0 && bottom_fraction <= 1.0)) {
    throw InvalidInput("transmitted fraction q must lie in (0, 1], got " +
                       std::to_string(bottom_fraction));
  }
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidInput("depth must be finite and > 0");
  }
  if (layers == 0) {
    throw InvalidInput("layer count must be at least 1");
  }

  LightField field{surface_intensity, bottom_fraction, depth, layers,
                   std::log(1.0 / bottom_fraction) / depth, {}};
  field.intensity.resize(layers);
  const auto n_layers = static_cast<double>(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    const double z = -(static_cast<double>(i) + 0.5) * depth / n_layers;
    field.intensity[i] = surface_intensity * std::exp(field.extinction * z);
  }
  return field;
}

LapCoefficients lap_coefficients(const std::vector<double>& intensity,
                                 const HanParams& p, double lap_time) {
  if (!(lap_time > 0.0) || !std::isfinite(lap_time)) {
    throw InvalidInput("lap duration T must be finite and > 0");
  }
  p.validate();

  const std::size_t n = intensity.size();
  LapCoefficients out{lap_time, std::vector<double>(n), std::vector<double>(n),
                      std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double light = intensity[i];
    const double a = rate_alpha(light, p);
    const double b = rate_beta(light, p);
    const double g = rate_gamma(light, p);
    const double z = rate_zeta(light, p);
    const double x = a * lap_time;
    // em1 = exp(-aT) - 1, kept separate from D to avoid cancellation at small aT.
    const double em1 = std::expm1(-x);

    // alpha >= k_r > 0, so all ratios below are well defined; in the dark
    // beta = gamma = 0 and the formulas reduce to V = Gamma = 0, Z = -R T.
    out.decay[i] = decay_factor(x);
    out.forcing[i] = -(b / a) * em1;
    out.gamma[i] = (g / a) * em1;
    out.offset[i] = -(g * b / (a * a)) * (x + em1) + z * lap_time;
  }
  return out;
}

LapCoefficients lap_coefficients(const LightField& field, const HanParams& p,
                                 double lap_time) {
  return lap_coefficients(field.intensity, p, lap_time);
}

namespace {

struct Derivative {
  double a;
  double b;
  double c;
};

Derivative han_rhs(const HanState& s, double photon, const HanParams& p) {
  const double absorb = photon * s.a;
  const double relax = s.b / p.tau;
  const double damage = p.k_d * photon * s.b;
  const double repair = p.k_r * s.c;
  return {-absorb + relax, absorb - relax + repair - damage, damage - repair};
}

HanState rk4(HanState s, double photon, const HanParams& p, double duration,
             std::size_t steps) {
  const double h = duration / static_cast<double>(steps);
  const auto shift = [](const HanState& x, const Derivative& d, double w) {
    return HanState{x.a + w * d.a, x.b + w * d.b, x.c + w * d.c};
  };
  for (std::size_t i = 0; i < steps; ++i) {
    const Derivative k1 = han_rhs(s, photon, p);
    const Derivative k2 = han_rhs(shift(s, k1, 0.5 * h), photon, p);
    const Derivative k3 = han_rhs(shift(s, k2, 0.5 * h), photon, p);
    const Derivative k4 = han_rhs(shift(s, k3, h), photon, p);
    s.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    s.b += h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    s.c += h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c);
  }
  return s;
}

}  // namespace

HanState integrate_full_han(const HanState& initial, double intensity,
                            const HanParams& p, double duration) {
  require_intensity(intensity);
  p.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidInput("integration duration must be finite and > 0");
  }
  if (initial.a < 0.0 || initial.b < 0.0 || initial.c < 0.0 ||
      std::abs(initial.a + initial.b + initial.c - 1.0) > 1e-12) {
    throw InvalidInput("initial Han state must be non-negative and sum to 1");
  }

  const double photon = p.sigma * intensity;
  // Start near the explicit stability limit of the fastest rate.
  const double fastest = photon * (1.0 + p.k_d) + 1.0 / p.tau + p.k_r;
  const double h0 = std::min(duration, 1.0 / fastest);
  auto steps = static_cast<std::size_t>(std::ceil(duration / h0));

  HanState coarse = rk4(initial, photon, p, duration, steps);
  constexpr int kMaxHalvings = 24;
  for (int i = 0; i < kMaxHalvings; ++i) {
    steps *= 2;
    const HanState fine = rk4(initial, photon, p, duration, steps);
    if (std::abs(fine.c - coarse.c) < 1e-10) {
      return fine;
    }
    coarse = fine;
  }
  throw InvariantViolation("three-state integrator failed to self-converge");
}

}  // namespace raceway
