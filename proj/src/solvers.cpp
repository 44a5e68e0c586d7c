#include "raceway/solvers.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "raceway/errors.hpp"
#include "raceway/lap_dynamics.hpp"
#include "raceway/objective.hpp"

namespace raceway {

namespace {

std::string hex_double(double v) {
  std::array<char, 64> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::hex);
  return std::string(buf.data(), res.ptr);
}

double parse_hex_double(std::string_view s) {
  double v = 0.0;
  const auto res =
      std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InvalidInput("malformed hex float \"" + std::string(s) + "\"");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InvalidInput("malformed integer \"" + std::string(s) + "\"");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExtremumTracker

void ExtremumTracker::admit(double value, std::uint64_t rank) {
  if (value > best_) {
    best_ = value;
    floor_ = best_ - tie_tolerance(best_);
    records_.emplace_back(value, rank);
    prune();
  }
  ++window_[value];
}

void ExtremumTracker::prune() {
  const auto keep = std::find_if(records_.begin(), records_.end(),
                                 [&](const auto& r) { return r.first >= floor_; });
  records_.erase(records_.begin(), keep);
  window_.erase(window_.begin(), window_.lower_bound(floor_));
}

void ExtremumTracker::append(const ExtremumTracker& later) {
  if (later.empty()) return;
  const double earlier_best = best_;
  for (const auto& r : later.records_) {
    if (r.first > earlier_best) records_.push_back(r);
  }
  for (const auto& [value, count] : later.window_) {
    window_[value] += count;
  }
  if (later.best_ > best_) {
    best_ = later.best_;
    floor_ = best_ - tie_tolerance(best_);
  }
  prune();
}

std::uint64_t ExtremumTracker::winner_rank() const {
  if (records_.empty()) {
    throw InvariantViolation("extremum requested from an empty search");
  }
  // records_ is pruned to [floor_, best_], so its first entry is the answer.
  return records_.front().second;
}

std::uint64_t ExtremumTracker::tie_count() const {
  std::uint64_t n = 0;
  for (const auto& [value, count] : window_) n += count;
  return n;
}

std::string ExtremumTracker::serialize_best() const { return hex_double(best_); }

std::string ExtremumTracker::serialize_records() const {
  std::string s;
  for (const auto& [value, rank] : records_) {
    if (!s.empty()) s += ',';
    s += hex_double(value) + '@' + std::to_string(rank);
  }
  return s;
}

std::string ExtremumTracker::serialize_window() const {
  std::string s;
  for (const auto& [value, count] : window_) {
    if (!s.empty()) s += ',';
    s += hex_double(value) + '*' + std::to_string(count);
  }
  return s;
}

ExtremumTracker ExtremumTracker::deserialize(const std::string& best,
                                             const std::string& records,
                                             const std::string& window) {
  ExtremumTracker t;
  t.best_ = parse_hex_double(best);
  t.floor_ = t.best_ - tie_tolerance(t.best_);
  for (const auto item : split(records, ',')) {
    const auto at = item.find('@');
    if (at == std::string_view::npos) throw InvalidInput("malformed record");
    t.records_.emplace_back(parse_hex_double(item.substr(0, at)),
                            parse_u64(item.substr(at + 1)));
  }
  for (const auto item : split(window, ',')) {
    const auto star = item.find('*');
    if (star == std::string_view::npos) throw InvalidInput("malformed window");
    t.window_[parse_hex_double(item.substr(0, star))] =
        parse_u64(item.substr(star + 1));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Search engine

namespace {

struct RangeResult {
  ExtremumTracker max;  // over J
  ExtremumTracker min;  // over -J
};

RangeResult scan_range(const LapCoefficients& coeffs, std::uint64_t first,
                       std::uint64_t count) {
  const std::size_t n = coeffs.size();
  const Permutation start = unrank_lexicographic(n, first);
  std::array<std::uint8_t, kMaxExhaustiveLayers> sigma{};
  std::copy(start.targets().begin(), start.targets().end(), sigma.begin());

  const double* d = coeffs.decay.data();
  const double* v = coeffs.forcing.data();
  const double* g = coeffs.gamma.data();

  RangeResult out;
  for (std::uint64_t k = 0; k < count; ++k) {
    const double j = fixed_point_dot_small(sigma.data(), n, d, v, g);
    out.max.offer(j, first + k);
    out.min.offer(-j, first + k);
    std::next_permutation(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

std::uint64_t coefficient_fingerprint(const LapCoefficients& coeffs) {
  // FNV-1a over the raw bits of every coefficient.
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&](double x) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<double>(coeffs.size()));
  mix(coeffs.lap_time);
  for (const auto* vec : {&coeffs.decay, &coeffs.forcing, &coeffs.gamma}) {
    for (const double x : *vec) mix(x);
  }
  return h;
}

constexpr const char* kCheckpointFormat = "raceway-search-checkpoint-1";

struct Checkpoint {
  std::uint64_t completed = 0;
  RangeResult state;
};

std::optional<Checkpoint> load_checkpoint(const std::string& path,
                                          const LapCoefficients& coeffs,
                                          std::uint64_t total) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("checkpoint line without '=': " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InvalidInput("checkpoint is missing key " + key);
    return it->second;
  };
  if (get("format") != kCheckpointFormat) {
    throw InvalidInput("unrecognized checkpoint format in " + path);
  }
  if (parse_u64(get("layers")) != coeffs.size() ||
      parse_u64(get("total")) != total ||
      get("fingerprint") != std::to_string(coefficient_fingerprint(coeffs))) {
    throw InvalidInput("checkpoint " + path +
                       " belongs to a different search configuration");
  }
  Checkpoint cp;
  cp.completed = parse_u64(get("completed_rank_end"));
  if (cp.completed > total) throw InvalidInput("checkpoint rank out of range");
  if (cp.completed > 0) {
    cp.state.max = ExtremumTracker::deserialize(get("max.best"), get("max.records"),
                                                get("max.window"));
    cp.state.min = ExtremumTracker::deserialize(get("min.best"), get("min.records"),
                                                get("min.window"));
  }
  return cp;
}

void save_checkpoint(const std::string& path, const LapCoefficients& coeffs,
                     std::uint64_t total, std::uint64_t completed,
                     const RangeResult& state) {
  std::ostringstream out;
  out << "format=" << kCheckpointFormat << '\n'
      << "layers=" << coeffs.size() << '\n'
      << "total=" << total << '\n'
      << "fingerprint=" << coefficient_fingerprint(coeffs) << '\n'
      << "completed_rank_begin=0\n"
      << "completed_rank_end=" << completed << '\n';
  if (completed > 0) {
    out << "max.best=" << state.max.serialize_best() << '\n'
        << "max.records=" << state.max.serialize_records() << '\n'
        << "max.window=" << state.max.serialize_window() << '\n'
        << "min.best=" << state.min.serialize_best() << '\n'
        << "min.records=" << state.min.serialize_records() << '\n'
        << "min.window=" << state.min.serialize_window() << '\n';
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw InvalidInput("cannot write checkpoint " + tmp);
    f << out.str();
  }
  std::filesystem::rename(tmp, path);
}

SearchReport build_report(const LapCoefficients& coeffs, const RangeResult& r,
                          std::uint64_t evaluated) {
  const std::size_t n = coeffs.size();
  const Permutation best = unrank_lexicographic(n, r.max.winner_rank());
  const Permutation worst = unrank_lexicographic(n, r.min.winner_rank());
  const Permutation id = Permutation::identity(n);
  const Permutation approx = sorting_solver(coeffs);

  SearchReport rep{.best = best, .worst = worst, .approx = approx};
  rep.j_best = r.max.best();
  rep.j_worst = -r.min.best();
  rep.mu_best = mu_bar_from_j(rep.j_best, coeffs);
  rep.mu_worst = mu_bar_from_j(rep.j_worst, coeffs);
  const double j_id = objective_j(id, coeffs);
  rep.mu_identity = mu_bar_from_j(j_id, coeffs);
  rep.j_approx_solution = objective_j(approx, coeffs);
  rep.mu_approx = mu_bar_from_j(rep.j_approx_solution, coeffs);
  rep.ties_best = r.max.tie_count();
  rep.ties_worst = r.min.tie_count();
  rep.evaluated = evaluated;
  rep.best_is_identity = best == id;
  rep.best_is_approx = best == approx;
  const double floor = rep.j_best - tie_tolerance(rep.j_best);
  rep.identity_in_argmax = j_id >= floor;
  rep.approx_in_argmax = rep.j_approx_solution >= floor;
  return rep;
}

}  // namespace

SearchReport partitioned_search(const LapCoefficients& coeffs,
                                const SearchOptions& options) {
  const std::size_t n = coeffs.size();
  if (n == 0) throw InvalidInput("search needs at least one layer");
  if (n > kMaxExhaustiveLayers) {
    throw LimitExceeded("exhaustive search is capped at N = " +
                        std::to_string(kMaxExhaustiveLayers) + " (N = " +
                        std::to_string(n) +
                        " requested); use the sorting solver for larger N");
  }
  if (options.workers == 0) throw InvalidInput("worker count must be positive");
  require_contraction(coeffs);

  const std::uint64_t total = factorial(n);
  RangeResult merged;
  std::uint64_t completed = 0;
  if (options.checkpoint_path) {
    if (auto cp = load_checkpoint(*options.checkpoint_path, coeffs, total)) {
      completed = cp->completed;
      merged = std::move(cp->state);
    }
  }
  const std::uint64_t remaining = total - completed;
  std::uint64_t chunk = options.chunk_size;
  if (chunk == 0) {
    chunk = std::clamp<std::uint64_t>(remaining / (options.workers * 16), 1,
                                      std::uint64_t{1} << 20);
  }
  const std::uint64_t n_chunks = remaining == 0 ? 0 : (remaining + chunk - 1) / chunk;
  const std::uint64_t resume_base = completed;

  std::atomic<std::uint64_t> next_chunk{0};
  std::mutex mu;
  std::map<std::uint64_t, RangeResult> pending;
  std::uint64_t merged_chunks = 0;
  std::exception_ptr failure;
  const auto t0 = std::chrono::steady_clock::now();
  auto last_report = t0;

  const auto worker = [&] {
    try {
      while (true) {
        const std::uint64_t c = next_chunk.fetch_add(1);
        if (c >= n_chunks) return;
        const std::uint64_t first = resume_base + c * chunk;
        const std::uint64_t count = std::min(chunk, total - first);
        RangeResult part = scan_range(coeffs, first, count);

        std::lock_guard lock(mu);
        if (failure) return;
        pending.emplace(c, std::move(part));
        bool advanced = false;
        for (auto it = pending.find(merged_chunks); it != pending.end();
             it = pending.find(merged_chunks)) {
          merged.max.append(it->second.max);
          merged.min.append(it->second.min);
          completed = std::min(total, resume_base + (merged_chunks + 1) * chunk);
          pending.erase(it);
          ++merged_chunks;
          advanced = true;
        }
        const auto now = std::chrono::steady_clock::now();
        if (advanced && now - last_report >= std::chrono::seconds(1)) {
          last_report = now;
          if (options.checkpoint_path) {
            save_checkpoint(*options.checkpoint_path, coeffs, total, completed, merged);
          }
          if (options.on_progress) {
            SearchProgress p;
            p.evaluated = completed;
            p.total = total;
            p.elapsed_seconds = std::chrono::duration<double>(now - t0).count();
            const double done = static_cast<double>(completed - resume_base);
            p.per_second = p.elapsed_seconds > 0 ? done / p.elapsed_seconds : 0.0;
            p.eta_seconds = p.per_second > 0
                                ? static_cast<double>(total - completed) / p.per_second
                                : 0.0;
            options.on_progress(p);
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      next_chunk.store(n_chunks);
    }
  };

  if (options.workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(options.workers);
    for (std::size_t w = 0; w < options.workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  if (merged_chunks != n_chunks || completed != total) {
    throw InvariantViolation("search finished with unmerged work");
  }
  if (options.checkpoint_path) {
    save_checkpoint(*options.checkpoint_path, coeffs, total, completed, merged);
  }
  return build_report(coeffs, merged, total);
}

SearchReport partitioned_search(const LapCoefficients& coeffs,
                                std::size_t workers) {
  SearchOptions opts;
  opts.workers = workers;
  return partitioned_search(coeffs, opts);
}

SearchReport exhaustive_search(const LapCoefficients& coeffs) {
  return partitioned_search(coeffs, 1);
}

Permutation sorting_solver(const LapCoefficients& coeffs) {
  const std::size_t n = coeffs.size();
  if (coeffs.gamma.size() != n || coeffs.forcing.size() != n || n == 0) {
    throw InvalidInput("sorting solver needs equally sized, non-empty Gamma and V");
  }
  std::vector<std::size_t> by_v(n);
  std::vector<std::size_t> by_gamma(n);
  std::iota(by_v.begin(), by_v.end(), std::size_t{0});
  std::iota(by_gamma.begin(), by_gamma.end(), std::size_t{0});
  std::stable_sort(by_v.begin(), by_v.end(), [&](std::size_t a, std::size_t b) {
    return coeffs.forcing[a] < coeffs.forcing[b];
  });
  std::stable_sort(by_gamma.begin(), by_gamma.end(),
                   [&](std::size_t a, std::size_t b) {
                     return coeffs.gamma[a] < coeffs.gamma[b];
                   });
  std::vector<std::uint8_t> sigma(n);
  for (std::size_t r = 0; r < n; ++r) {
    sigma[by_v[r]] = static_cast<std::uint8_t>(by_gamma[r]);
  }
  return Permutation(std::move(sigma));
}

std::size_t spot_check(const SearchReport& report,
                       const LapCoefficients& coeffs, std::size_t samples,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> sigma(coeffs.size());
  std::iota(sigma.begin(), sigma.end(), std::uint8_t{0});
  const double hi = report.j_best + tie_tolerance(report.j_best);
  const double lo = report.j_worst - tie_tolerance(report.j_worst);
  std::size_t violations = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::shuffle(sigma.begin(), sigma.end(), rng);
    const double j = objective_j(Permutation(sigma), coeffs);
    if (j > hi || j < lo) ++violations;
  }
  return violations;
}

std::string SearchReport::to_text() const {
  std::ostringstream out;
  out << "best=" << best.to_one_line() << '\n'
      << "worst=" << worst.to_one_line() << '\n'
      << "approx=" << approx.to_one_line() << '\n'
      << "j_best=" << format_g17(j_best) << '\n'
      << "j_worst=" << format_g17(j_worst) << '\n'
      << "j_approx_solution=" << format_g17(j_approx_solution) << '\n'
      << "mu_best=" << format_g17(mu_best) << '\n'
      << "mu_worst=" << format_g17(mu_worst) << '\n'
      << "mu_identity=" << format_g17(mu_identity) << '\n'
      << "mu_approx=" << format_g17(mu_approx) << '\n'
      << "ties_best=" << ties_best << '\n'
      << "ties_worst=" << ties_worst << '\n'
      << "evaluated=" << evaluated << '\n'
      << "best_is_identity=" << best_is_identity << '\n'
      << "best_is_approx=" << best_is_approx << '\n'
      << "identity_in_argmax=" << identity_in_argmax << '\n'
      << "approx_in_argmax=" << approx_in_argmax << '\n';
  return out.str();
}

}  // namespace raceway
