#include "raceway/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "raceway/errors.hpp"
#include "raceway/lap_dynamics.hpp"

namespace raceway {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_progress(std::ostream& diag, const SearchProgress& p) {
  char line[160];
  std::snprintf(line, sizeof line,
                "progress: %llu/%llu permutations (%.1f%%), %.3g perm/s, ETA %.0f s\n",
                static_cast<unsigned long long>(p.evaluated),
                static_cast<unsigned long long>(p.total),
                100.0 * static_cast<double>(p.evaluated) / static_cast<double>(p.total),
                p.per_second, p.eta_seconds);
  diag << line << std::flush;
}

void write_permutation_block(std::ostream& out, const char* label,
                             const Permutation& p) {
  out << label << ": " << p.to_one_line() << '\n' << p.to_matrix_text() << '\n';
}

LapState parse_start(const ExperimentConfig& config, const Permutation& p,
                     const LapCoefficients& coeffs) {
  if (config.start == "zero") return LapState::zeros(coeffs.size());
  if (config.start == "fixed") return fixed_point(p, coeffs);
  std::vector<double> values = parse_grid(config.start);
  if (values.size() != coeffs.size()) {
    throw InvalidInput("c0 lists " + std::to_string(values.size()) +
                       " values for N = " + std::to_string(coeffs.size()));
  }
  return LapState(std::move(values));
}

void require_single_point(const ExperimentConfig& config, const char* command) {
  if (config.grid_points() != 1) {
    throw InvalidInput(std::string(command) +
                       " takes a single (Is, q, T) point; use sweep for grids");
  }
}

}  // namespace

LapCoefficients coefficients_for(const ExperimentConfig& config,
                                 double surface_intensity,
                                 double bottom_fraction, double lap_time) {
  const LightField field = build_light_field(surface_intensity, bottom_fraction,
                                             config.depth, config.layers);
  return lap_coefficients(field, config.params, lap_time);
}

StrategyPoint evaluate_point(const ExperimentConfig& config,
                             double surface_intensity, double bottom_fraction,
                             double lap_time, const SearchOptions& options) {
  const LapCoefficients coeffs =
      coefficients_for(config, surface_intensity, bottom_fraction, lap_time);
  SearchReport report = partitioned_search(coeffs, options);
  const Ratios r =
      ratios_from_mu(report.mu_best, report.mu_worst, report.mu_identity);
  return StrategyPoint{surface_intensity, bottom_fraction, lap_time,
                       std::move(report), r};
}

std::uint64_t estimated_evaluations(const ExperimentConfig& config) {
  if (config.layers > kMaxExhaustiveLayers) {
    throw LimitExceeded("N = " + std::to_string(config.layers) +
                        " exceeds the exhaustive search cap of " +
                        std::to_string(kMaxExhaustiveLayers) +
                        "; use the sorting solver for larger N");
  }
  return factorial(config.layers) * config.grid_points();
}

void require_budget(const ExperimentConfig& config) {
  const std::uint64_t need = estimated_evaluations(config);
  if (need > config.budget) {
    throw LimitExceeded("request needs " + std::to_string(need) +
                        " permutation evaluations (" +
                        std::to_string(config.grid_points()) + " grid points x " +
                        std::to_string(factorial(config.layers)) +
                        "), over the budget of " + std::to_string(config.budget) +
                        "; shrink the grid, lower N or raise budget");
  }
}

std::vector<StrategyPoint> evaluate_grid(const ExperimentConfig& config) {
  struct Point {
    double is, q, t;
  };
  std::vector<Point> points;
  points.reserve(config.grid_points());
  for (const double t : config.lap_time) {
    for (const double q : config.bottom_fraction) {
      for (const double is : config.surface_intensity) {
        points.push_back({is, q, t});
      }
    }
  }

  std::vector<std::optional<StrategyPoint>> results(points.size());
  if (points.size() == 1) {
    // One point: spend the workers inside the search instead.
    SearchOptions opts;
    opts.workers = config.workers;
    results[0] = evaluate_point(config, points[0].is, points[0].q, points[0].t, opts);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;
    const auto worker = [&] {
      try {
        for (std::size_t i = next.fetch_add(1); i < points.size();
             i = next.fetch_add(1)) {
          results[i] = evaluate_point(config, points[i].is, points[i].q,
                                      points[i].t, SearchOptions{});
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(points.size());
      }
    };
    const std::size_t n_threads = std::min(config.workers, points.size());
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<StrategyPoint> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

void cmd_optimize(const ExperimentConfig& config, std::ostream& out,
                  std::ostream& diag) {
  config.validate();
  require_single_point(config, "optimize");
  require_budget(config);

  const double is = config.surface_intensity.front();
  const double q = config.bottom_fraction.front();
  const double t = config.lap_time.front();
  const LapCoefficients coeffs = coefficients_for(config, is, q, t);

  SearchOptions opts;
  opts.workers = config.workers;
  if (!config.checkpoint.empty()) opts.checkpoint_path = config.checkpoint;
  if (factorial(config.layers) >= 1'000'000) {
    opts.on_progress = [&diag](const SearchProgress& p) { print_progress(diag, p); };
  }
  const SearchReport report = partitioned_search(coeffs, opts);
  const Ratios r = ratios_from_mu(report.mu_best, report.mu_worst, report.mu_identity);

  if (config.verify_samples > 0) {
    const std::size_t bad =
        spot_check(report, coeffs, config.verify_samples, config.seed);
    if (bad != 0) {
      throw InvariantViolation(std::to_string(bad) +
                               " sampled permutations fall outside the reported extrema");
    }
    diag << "spot check: " << config.verify_samples
         << " random permutations within [J_worst, J_best]\n";
  }
  for (const auto& w : r.warnings()) diag << "warning: " << w << '\n';
  if (report.ties_best > 1) {
    diag << "note: " << report.ties_best
         << " permutations tie for the maximum; reporting the lexicographically smallest\n";
  }

  out << "# mixing device optimization\n"
      << "N=" << config.layers << '\n'
      << "h=" << g17(config.depth) << '\n'
      << "Is=" << g17(is) << '\n'
      << "q=" << g17(q) << '\n'
      << "T=" << g17(t) << '\n'
      << report.to_text()
      << "r1=" << g17(r.r1) << '\n'
      << "r2=" << g17(r.r2) << '\n'
      << "r3=" << g17(r.r3) << '\n'
      << '\n';
  write_permutation_block(out, "P_max", report.best);
  write_permutation_block(out, "P_min", report.worst);
  write_permutation_block(out, "P_max_approx", report.approx);
}

void cmd_sweep(const ExperimentConfig& config, std::ostream& out,
               std::ostream& diag) {
  config.validate();
  require_budget(config);
  const auto points = evaluate_grid(config);
  out << "I_s,q,T,mu_max,mu_min,mu_identity,mu_approx,pmax_is_identity,pmax_is_approx\n";
  std::size_t tied = 0;
  for (const auto& p : points) {
    const SearchReport& r = p.report;
    if (r.ties_best > 1) ++tied;
    out << g17(p.surface_intensity) << ',' << g17(p.bottom_fraction) << ','
        << g17(p.lap_time) << ',' << g17(r.mu_best) << ',' << g17(r.mu_worst)
        << ',' << g17(r.mu_identity) << ',' << g17(r.mu_approx) << ','
        << (r.identity_in_argmax ? 1 : 0) << ',' << (r.approx_in_argmax ? 1 : 0)
        << '\n';
  }
  if (tied > 0) {
    diag << "note: " << tied << " of " << points.size()
         << " grid points have a tied maximum; flags use argmax-set membership\n";
  }
}

void cmd_ratios(const ExperimentConfig& config, std::ostream& out,
                std::ostream& diag) {
  config.validate();
  require_budget(config);
  const auto points = evaluate_grid(config);
  out << "T,I_s,q,r1,r2,r3\n";
  std::size_t warned = 0;
  for (const auto& p : points) {
    out << g17(p.lap_time) << ',' << g17(p.surface_intensity) << ','
        << g17(p.bottom_fraction) << ',' << g17(p.ratios.r1) << ','
        << g17(p.ratios.r2) << ',' << g17(p.ratios.r3) << '\n';
    if (!p.ratios.warnings().empty()) ++warned;
  }
  if (warned > 0) {
    diag << "warning: " << warned << " of " << points.size()
         << " grid points have a zero or negative growth-rate denominator "
            "(ratios reported raw, NaN where the denominator vanishes)\n";
  }
}

void cmd_simulate(const ExperimentConfig& config, std::ostream& out,
                  std::ostream& diag) {
  config.validate();
  require_single_point(config, "simulate");
  const LapCoefficients coeffs =
      coefficients_for(config, config.surface_intensity.front(),
                       config.bottom_fraction.front(), config.lap_time.front());
  const Permutation p = config.perm.empty() ? Permutation::identity(config.layers)
                                            : Permutation::parse_one_line(config.perm);
  if (p.size() != config.layers) {
    throw InvalidInput("permutation has " + std::to_string(p.size()) +
                       " entries but N = " + std::to_string(config.layers));
  }
  const LapState target = fixed_point(p, coeffs);
  const LapState start = parse_start(config, p, coeffs);
  const auto trajectory = simulate_laps(p, coeffs, start, config.laps);

  out << "k";
  for (std::size_t n = 1; n <= config.layers; ++n) out << ",C_" << n;
  out << ",mu_lap,err_inf\n";
  double mu_sum = 0.0;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const LapState& c = trajectory[k];
    const double mu = mu_bar_from_state(c, coeffs);
    if (k < config.laps) mu_sum += mu;
    out << k;
    for (std::size_t n = 0; n < c.size(); ++n) out << ',' << g17(c[n]);
    out << ',' << g17(mu) << ',' << g17(max_abs_diff(c, target)) << '\n';
  }

  const auto periodicity = check_periodicity(p, coeffs, start, p.order());
  diag << "permutation order: " << p.order() << '\n'
       << "mu_bar at fixed point: " << g17(mu_bar_from_state(target, coeffs)) << '\n'
       << "mu_bar averaged over " << config.laps
       << " laps: " << g17(mu_sum / static_cast<double>(config.laps)) << '\n'
       << "periodic after order laps: " << (periodicity.periodic ? "yes" : "no")
       << " (gap " << g17(periodicity.return_gap) << "), constant: "
       << (periodicity.constant ? "yes" : "no") << '\n';
  if (!periodicity.consistent()) {
    throw InvariantViolation("periodic trajectory that is not constant");
  }
}

void run(const ExperimentConfig& config, std::ostream& out, std::ostream& diag) {
  switch (config.mode) {
    case Mode::optimize: return cmd_optimize(config, out, diag);
    case Mode::sweep: return cmd_sweep(config, out, diag);
    case Mode::ratios: return cmd_ratios(config, out, diag);
    case Mode::simulate: return cmd_simulate(config, out, diag);
  }
}

}  // namespace raceway
