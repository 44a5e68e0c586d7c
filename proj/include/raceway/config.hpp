#pragma once

// Experiment configuration: flat key=value text, one entry per line.
//
//   mode=sweep
//   N=7
//   Is=lin:0:2500:26
//   q=log:0.001:0.1:41
//   T=1,500,1000
//
// Grids accept a comma list, "lin:a:b:n" or "log:a:b:n" (n points, both ends
// included). Lines starting with '#' are ignored.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "raceway/kinetics.hpp"

namespace raceway {

enum class Mode { optimize, sweep, ratios, simulate };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view text);

/// Expands a grid specification into its values.
std::vector<double> parse_grid(std::string_view spec);

struct ExperimentConfig {
  Mode mode = Mode::optimize;
  HanParams params = HanParams::reference();
  double depth = 0.4;
  std::size_t layers = 11;
  std::vector<double> surface_intensity{2000.0};
  std::vector<double> bottom_fraction{0.1};
  std::vector<double> lap_time{1000.0};
  std::size_t laps = 200;
  std::string perm;            ///< one-line notation; empty = identity
  std::string start = "zero";  ///< zero | fixed | comma list of N values
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  std::size_t verify_samples = 0;
  std::uint64_t budget = 1'000'000'000;  ///< max permutation evaluations
  std::string out;         ///< empty = standard output
  std::string checkpoint;  ///< empty = no checkpointing

  /// Defaults for a subcommand: N=11 device examples for optimize/simulate,
  /// N=7 grids for sweep and ratios.
  static ExperimentConfig defaults(Mode mode);

  /// Applies one key=value entry. Throws InvalidInput for unknown keys or
  /// malformed values.
  void set(std::string_view key, std::string_view value);

  /// Applies every entry of a key=value document.
  void apply_text(std::string_view text);

  /// Throws InvalidInput if any value is out of range.
  void validate() const;

  std::size_t grid_points() const {
    return surface_intensity.size() * bottom_fraction.size() * lap_time.size();
  }

  /// Lossless key=value rendering; apply_text(serialize()) reproduces *this.
  std::string serialize() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses key=value lines into an ordered map (later keys win).
std::map<std::string, std::string> parse_key_values(std::string_view text);

}  // namespace raceway
