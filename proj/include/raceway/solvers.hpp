#pragma once

// Exact and approximate optimization of the mixing permutation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "raceway/kinetics.hpp"
#include "raceway/permutation.hpp"

namespace raceway {

/// Largest N accepted by the exhaustive search (12! ~ 4.8e8 evaluations).
inline constexpr std::size_t kMaxExhaustiveLayers = 12;

struct SearchReport {
  Permutation best;
  Permutation worst;
  double j_best = 0.0;
  double j_worst = 0.0;
  double mu_best = 0.0;
  double mu_worst = 0.0;
  double mu_identity = 0.0;
  /// Permutations whose J is tied with the maximum (minimum), including the
  /// reported one.
  std::uint64_t ties_best = 0;
  std::uint64_t ties_worst = 0;
  std::uint64_t evaluated = 0;

  /// Output of sorting_solver for the same coefficients.
  Permutation approx;
  double j_approx_solution = 0.0;  ///< J (not J^approx) at `approx`
  double mu_approx = 0.0;

  bool best_is_identity = false;    ///< best == identity
  bool best_is_approx = false;      ///< best == approx
  bool identity_in_argmax = false;  ///< J(identity) tied with the maximum
  bool approx_in_argmax = false;    ///< J(approx) tied with the maximum

  /// Canonical key=value rendering; byte-identical for identical reports.
  std::string to_text() const;
};

/// Rate and completion estimate, delivered roughly once per second.
struct SearchProgress {
  std::uint64_t evaluated = 0;
  std::uint64_t total = 0;
  double elapsed_seconds = 0.0;
  double per_second = 0.0;
  double eta_seconds = 0.0;
};

struct SearchOptions {
  std::size_t workers = 1;
  /// Permutations per work unit; 0 picks a size from N! and the worker count.
  std::uint64_t chunk_size = 0;
  std::function<void(const SearchProgress&)> on_progress;
  /// When set, completed work is saved here and resumed from if present.
  std::optional<std::string> checkpoint_path;
};

/// Exact argmax and argmin of J over S_N on one thread. Ties are broken by the
/// lexicographically smallest one-line notation. Throws LimitExceeded when
/// N > kMaxExhaustiveLayers.
SearchReport exhaustive_search(const LapCoefficients& coeffs);

/// Same result as exhaustive_search for any worker count and chunk size; the
/// work is split into disjoint lexicographic-rank ranges.
SearchReport partitioned_search(const LapCoefficients& coeffs,
                                std::size_t workers);
SearchReport partitioned_search(const LapCoefficients& coeffs,
                                const SearchOptions& options);

/// Permutation pairing the rank-r entry of V with the rank-r entry of Gamma
/// (both ascending, ties by index); maximizes J^approx over S_N.
Permutation sorting_solver(const LapCoefficients& coeffs);

/// Re-evaluates `samples` random permutations and counts those with J outside
/// [j_worst - tol, j_best + tol].
std::size_t spot_check(const SearchReport& report,
                       const LapCoefficients& coeffs, std::size_t samples,
                       std::uint64_t seed);

/// Running extremum of a stream of (value, rank) pairs visited in increasing
/// rank order. Keeps enough state to answer, for the final maximum M, both the
/// first rank with value >= M - tol(M) and how many values lie there, and can
/// be concatenated with the accumulator of a later rank range.
class ExtremumTracker {
 public:
  void offer(double value, std::uint64_t rank) {
    if (value < floor_) return;
    admit(value, rank);
  }
  /// Appends the accumulator of a rank range that follows this one.
  void append(const ExtremumTracker& later);

  bool empty() const { return records_.empty(); }
  double best() const { return best_; }
  /// First rank tied with the maximum.
  std::uint64_t winner_rank() const;
  std::uint64_t tie_count() const;

  static ExtremumTracker deserialize(const std::string& best,
                                     const std::string& records,
                                     const std::string& window);
  std::string serialize_best() const;
  std::string serialize_records() const;
  std::string serialize_window() const;

  friend bool operator==(const ExtremumTracker&, const ExtremumTracker&) = default;

 private:
  void admit(double value, std::uint64_t rank);
  void prune();

  double best_ = -std::numeric_limits<double>::infinity();
  double floor_ = -std::numeric_limits<double>::infinity();
  // Strict prefix maxima still within tolerance of best_, in rank order.
  std::vector<std::pair<double, std::uint64_t>> records_;
  // Multiplicity of every value within tolerance of best_.
  std::map<double, std::uint64_t> window_;
};

}  // namespace raceway
