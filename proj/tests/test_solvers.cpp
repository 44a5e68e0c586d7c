#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "raceway/errors.hpp"
#include "raceway/objective.hpp"
#include "raceway/solvers.hpp"

using namespace raceway;

namespace {

LapCoefficients realistic(std::size_t n, double is, double q, double t) {
  return lap_coefficients(build_light_field(is, q, 0.4, n), HanParams::reference(), t);
}

struct BruteForce {
  Permutation best = Permutation::identity(1);
  Permutation worst = Permutation::identity(1);
  double j_best = -INFINITY;
  double j_worst = INFINITY;
};

// First permutation in lexicographic order that is tied with the extremum.
BruteForce brute_force(const LapCoefficients& c) {
  const std::size_t n = c.size();
  std::vector<double> values;
  std::vector<Permutation> perms;
  oracle::for_each_permutation(n, [&](const Permutation& p) {
    values.push_back(oracle::dense_j(p, c));
    perms.push_back(p);
  });
  BruteForce r;
  for (const double v : values) {
    r.j_best = std::max(r.j_best, v);
    r.j_worst = std::min(r.j_worst, v);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= r.j_best - tie_tolerance(r.j_best)) {
      r.best = perms[i];
      break;
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= r.j_worst + tie_tolerance(r.j_worst)) {
      r.worst = perms[i];
      break;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("sorting solver") {
  SUBCASE("same order gives identity") {
    const LapCoefficients c{1.0, {0.5, 0.5, 0.5}, {0.1, 0.2, 0.3},
                            {-0.3, -0.2, -0.1}, {0, 0, 0}};
    CHECK(sorting_solver(c).is_identity());
  }
  SUBCASE("opposite order gives reversal") {
    const LapCoefficients c{1.0, {0.5, 0.5, 0.5, 0.5}, {0.4, 0.3, 0.2, 0.1},
                            {-0.4, -0.3, -0.2, -0.1}, {0, 0, 0, 0}};
    CHECK(sorting_solver(c) == Permutation::reversal(4));
  }
  SUBCASE("maximizes J approx over S_N") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 1 + trial % 7;
      const auto c = oracle::random_coefficients(n, rng);
      const auto p = sorting_solver(c);
      const double got = objective_j_approx(p, c);
      double best = -INFINITY;
      oracle::for_each_permutation(n, [&](const Permutation& q) {
        best = std::max(best, objective_j_approx(q, c));
      });
      CHECK(tied(got, best));
      CHECK(got >= best - tie_tolerance(best));
    }
  }
  SUBCASE("no transposition improves it") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 2 + trial % 11;
      const auto c = oracle::random_coefficients(n, rng);
      const auto p = sorting_solver(c);
      const double base = objective_j_approx(p, c);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          auto t = p.targets();
          std::swap(t[a], t[b]);
          CHECK(objective_j_approx(Permutation(t), c) <= base + tie_tolerance(base));
        }
      }
    }
  }
}

TEST_CASE("exhaustive search against brute force") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto c = trial % 2 == 0
                       ? oracle::random_coefficients(n, rng)
                       : realistic(n, 200.0 + 100.0 * trial, 0.001 + 0.01 * trial,
                                   1.0 + 40.0 * trial);
    const auto rep = exhaustive_search(c);
    const auto bf = brute_force(c);
    CHECK(rep.best == bf.best);
    CHECK(rep.worst == bf.worst);
    CHECK(std::abs(rep.j_best - bf.j_best) <= 1e-12 * std::max(1.0, std::abs(bf.j_best)));
    CHECK(std::abs(rep.j_worst - bf.j_worst) <= 1e-12 * std::max(1.0, std::abs(bf.j_worst)));
    CHECK(rep.evaluated == factorial(n));
    CHECK(spot_check(rep, c, 500, 3) == 0);
  }
}

TEST_CASE("report fields") {
  const auto c = realistic(6, 2000.0, 0.01, 1000.0);
  const auto rep = exhaustive_search(c);
  CHECK(rep.mu_best == mu_bar_from_j(rep.j_best, c));
  CHECK(rep.mu_worst == mu_bar_from_j(rep.j_worst, c));
  CHECK(rep.mu_identity == evaluate(Permutation::identity(6), c).mu_bar);
  CHECK(rep.approx == sorting_solver(c));
  CHECK(rep.j_approx_solution == objective_j(rep.approx, c));
  CHECK(rep.mu_best >= rep.mu_identity);
  CHECK(rep.mu_best >= rep.mu_approx);
  CHECK(rep.mu_worst <= rep.mu_identity);
  CHECK(rep.ties_best >= 1);
  CHECK(rep.best_is_identity == rep.best.is_identity());
  CHECK(rep.best_is_approx == (rep.best == rep.approx));
}

TEST_CASE("single layer") {
  const auto rep = exhaustive_search(realistic(1, 1000.0, 0.1, 10.0));
  CHECK(rep.best.is_identity());
  CHECK(rep.worst.is_identity());
  CHECK(rep.evaluated == 1);
  CHECK(rep.ties_best == 1);
}

TEST_CASE("ties are broken toward the smallest one-line notation") {
  // Equal layers make every permutation tie.
  const LapCoefficients c{1.0, std::vector<double>(4, 0.6), std::vector<double>(4, 0.2),
                          std::vector<double>(4, -0.5), std::vector<double>(4, 0.0)};
  const auto rep = exhaustive_search(c);
  CHECK(rep.best.is_identity());
  CHECK(rep.worst.is_identity());
  CHECK(rep.ties_best == 24);
  CHECK(rep.ties_worst == 24);
  CHECK(rep.identity_in_argmax);
  CHECK(rep.approx_in_argmax);

  // Two equal layers.
  const LapCoefficients d{1.0, {0.6, 0.3, 0.6}, {0.2, 0.5, 0.2}, {-0.5, -0.1, -0.5},
                          {0, 0, 0}};
  const auto r2 = exhaustive_search(d);
  const auto bf = brute_force(d);
  CHECK(r2.best == bf.best);
}

TEST_CASE("limits") {
  const auto big = realistic(13, 2000.0, 0.01, 10.0);
  CHECK_THROWS_AS(exhaustive_search(big), LimitExceeded);
  CHECK_NOTHROW(sorting_solver(big));
  CHECK_THROWS_AS(partitioned_search(realistic(4, 10.0, 0.5, 1.0), 0), InvalidInput);
}

TEST_CASE("partitioning does not change the report") {
  const auto c = realistic(8, 2000.0, 0.001, 30.0);
  const std::string reference = exhaustive_search(c).to_text();
  for (const std::size_t workers : {1U, 2U, 3U, 8U}) {
    for (const std::uint64_t chunk : {0ULL, 1ULL, 7ULL, 5040ULL, 1000000ULL}) {
      SearchOptions o;
      o.workers = workers;
      o.chunk_size = chunk;
      CHECK(partitioned_search(c, o).to_text() == reference);
    }
  }
}

TEST_CASE("ExtremumTracker") {
  std::mt19937_64 rng(73);
  std::uniform_int_distribution<int> level(0, 6);
  std::vector<double> values(400);
  // Coarse values so ties are frequent; a few near-ties inside the tolerance.
  for (auto& v : values) v = 0.25 * level(rng) + (level(rng) == 0 ? 1e-13 : 0.0);

  ExtremumTracker whole;
  for (std::size_t i = 0; i < values.size(); ++i) whole.offer(values[i], i);

  double max = -INFINITY;
  for (const double v : values) max = std::max(max, v);
  std::uint64_t first = values.size();
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= max - tie_tolerance(max)) {
      if (first == values.size()) first = i;
      ++count;
    }
  }
  CHECK(whole.best() == max);
  CHECK(whole.winner_rank() == first);
  CHECK(whole.tie_count() == count);

  for (const std::size_t split : {0UL, 1UL, 57UL, 200UL, 399UL, 400UL}) {
    ExtremumTracker a;
    ExtremumTracker b;
    for (std::size_t i = 0; i < split; ++i) a.offer(values[i], i);
    for (std::size_t i = split; i < values.size(); ++i) b.offer(values[i], i);
    a.append(b);
    CHECK(a.best() == whole.best());
    CHECK(a.winner_rank() == whole.winner_rank());
    CHECK(a.tie_count() == whole.tie_count());
  }

  const auto copy = ExtremumTracker::deserialize(
      whole.serialize_best(), whole.serialize_records(), whole.serialize_window());
  CHECK(copy == whole);
}

TEST_CASE("checkpoint resume") {
  const auto dir = std::filesystem::temp_directory_path() / "raceway_checkpoint_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "search.ckpt").string();
  std::filesystem::remove(path);

  // Interrupt an N=11 search at its first progress report; a checkpoint has
  // been written just before the callback fires.
  const auto c = realistic(11, 2000.0, 0.01, 1000.0);
  SearchOptions interrupted;
  interrupted.chunk_size = 20000;
  interrupted.checkpoint_path = path;
  struct Stop {};
  interrupted.on_progress = [](const SearchProgress&) { throw Stop{}; };
  CHECK_THROWS_AS(partitioned_search(c, interrupted), Stop);
  REQUIRE(std::filesystem::exists(path));

  SearchOptions resume;
  resume.chunk_size = 30011;
  resume.checkpoint_path = path;
  const auto resumed = partitioned_search(c, resume);
  const auto fresh = partitioned_search(c, 1);
  CHECK(resumed.to_text() == fresh.to_text());

  // A completed checkpoint is reused without rescanning.
  const auto again = partitioned_search(c, resume);
  CHECK(again.to_text() == fresh.to_text());

  // A checkpoint from different coefficients is refused.
  CHECK_THROWS_AS(partitioned_search(realistic(11, 2000.0, 0.1, 1000.0), resume),
                  InvalidInput);
  std::filesystem::remove_all(dir);
}
