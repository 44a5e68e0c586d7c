#pragma once

// Han photoinhibition kinetics in a depth-discretized pond.
//
// Layer storage convention (used by every module of this library): vectors
// indexed by layer hold layer n = 1..N at position n - 1. Layer 1 is the
// top of the water column, layer N the bottom.

#include <cstddef>
#include <vector>

namespace raceway {

/// Han model constants plus respiration.
struct HanParams {
  double k_r;    ///< repair rate (1/s)
  double k_d;    ///< damage rate (dimensionless)
  double tau;    ///< turnover time (s)
  double sigma;  ///< specific photon absorption (m^2/umol)
  double k;      ///< photosynthetic activity to growth factor (dimensionless)
  double R;      ///< respiration rate (1/s)

  /// Reference parameter set for the raceway experiments.
  static HanParams reference();

  /// Throws InvalidInput unless every field is finite and strictly positive.
  void validate() const;

  friend bool operator==(const HanParams&, const HanParams&) = default;
};

/// alpha(I) = k_d tau (sigma I)^2 / (tau sigma I + 1) + k_r
double rate_alpha(double intensity, const HanParams& p);
/// beta(I) = alpha(I) - k_r
double rate_beta(double intensity, const HanParams& p);
/// gamma(I) = k sigma I / (tau sigma I + 1)
double rate_gamma(double intensity, const HanParams& p);
/// zeta(I) = gamma(I) - R
double rate_zeta(double intensity, const HanParams& p);

/// Beer-Lambert light field sampled at the mid-depth of N equal layers.
struct LightField {
  double surface_intensity;    ///< I_s (umol m^-2 s^-1)
  double bottom_fraction;      ///< q, fraction of I_s reaching the bottom
  double depth;                ///< h (m)
  std::size_t layers;          ///< N
  double extinction;           ///< (1/h) ln(1/q) (1/m)
  std::vector<double> intensity;  ///< I_n, layer n at index n - 1
};

/// Layer n sits at z_n = -(n - 1/2) h / N and receives I_s exp(extinction z_n).
/// Requires I_s >= 0, 0 < q <= 1, h > 0 and N >= 1.
LightField build_light_field(double surface_intensity, double bottom_fraction,
                             double depth, std::size_t layers);

/// Closed-form one-lap solution of dC/dt = -alpha C + beta for every layer,
/// together with the vectors that give the lap-integrated growth.
///
/// Over a lap of duration T, C(T) = D C(0) + V (D diagonal) and
///   integral_0^T mu(C_n(t), I_n) dt = Gamma_n C_n(0) + Z_n.
struct LapCoefficients {
  double lap_time;
  std::vector<double> decay;    ///< D_n = exp(-alpha T)
  std::vector<double> forcing;  ///< V_n = (beta/alpha)(1 - exp(-alpha T))
  std::vector<double> gamma;    ///< Gamma_n = (gamma/alpha)(exp(-alpha T) - 1)
  std::vector<double> offset;   ///< Z_n

  std::size_t size() const { return decay.size(); }
};

LapCoefficients lap_coefficients(const LightField& field, const HanParams& p,
                                 double lap_time);

/// Same, from an explicit list of per-layer intensities.
LapCoefficients lap_coefficients(const std::vector<double>& intensity,
                                 const HanParams& p, double lap_time);

/// Fractions of reaction centers in the open (A), closed (B) and
/// inhibited (C) states.
struct HanState {
  double a;
  double b;
  double c;
};

/// Integrates the full three-state Han system at constant intensity with
/// classical RK4. The step is halved until halving once more changes C(T) by
/// less than 1e-10; the finer of the last two solutions is returned.
HanState integrate_full_han(const HanState& initial, double intensity,
                            const HanParams& p, double duration);

}  // namespace raceway
