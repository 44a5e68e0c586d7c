#pragma once

// Subcommand drivers shared by the CLI and the tests. Each writes its primary
// output (report or CSV) to `out` and notes/warnings to `diag`.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "raceway/config.hpp"
#include "raceway/kinetics.hpp"
#include "raceway/objective.hpp"
#include "raceway/solvers.hpp"

namespace raceway {

/// All four strategies evaluated at one (I_s, q, T) point.
struct StrategyPoint {
  double surface_intensity = 0.0;
  double bottom_fraction = 0.0;
  double lap_time = 0.0;
  SearchReport report;
  Ratios ratios;
};

LapCoefficients coefficients_for(const ExperimentConfig& config,
                                 double surface_intensity,
                                 double bottom_fraction, double lap_time);

StrategyPoint evaluate_point(const ExperimentConfig& config,
                             double surface_intensity, double bottom_fraction,
                             double lap_time, const SearchOptions& options);

/// Evaluates every grid point (T outer, then q, then I_s) in that order.
/// Points run concurrently on config.workers threads; the result order is the
/// grid order regardless.
std::vector<StrategyPoint> evaluate_grid(const ExperimentConfig& config);

/// Total permutation evaluations the config would need.
std::uint64_t estimated_evaluations(const ExperimentConfig& config);

/// Throws LimitExceeded (with the estimate) if the config is over budget or
/// N is above the exhaustive cap.
void require_budget(const ExperimentConfig& config);

void cmd_optimize(const ExperimentConfig& config, std::ostream& out,
                  std::ostream& diag);
void cmd_sweep(const ExperimentConfig& config, std::ostream& out,
               std::ostream& diag);
void cmd_ratios(const ExperimentConfig& config, std::ostream& out,
                std::ostream& diag);
void cmd_simulate(const ExperimentConfig& config, std::ostream& out,
                  std::ostream& diag);

/// Dispatches on config.mode.
void run(const ExperimentConfig& config, std::ostream& out, std::ostream& diag);

}  // namespace raceway
