#include "raceway/permutation.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "raceway/errors.hpp"

namespace raceway {

Permutation::Permutation(std::vector<std::uint8_t> targets)
    : targets_(std::move(targets)) {
  if (targets_.empty()) {
    throw InvalidInput("permutation must have at least one element");
  }
  if (targets_.size() > kMaxPermutationSize) {
    throw InvalidInput("permutation too large");
  }
  std::vector<bool> hit(targets_.size(), false);
  for (const auto t : targets_) {
    if (t >= targets_.size() || hit[t]) {
      throw InvalidInput("not a bijection: target " + std::to_string(t + 1) +
                         " is out of range or repeated");
    }
    hit[t] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  if (n == 0 || n > kMaxPermutationSize) {
    throw InvalidInput("permutation size out of range");
  }
  std::vector<std::uint8_t> t(n);
  std::iota(t.begin(), t.end(), std::uint8_t{0});
  return Permutation(std::move(t));
}

Permutation Permutation::reversal(std::size_t n) {
  if (n == 0 || n > kMaxPermutationSize) {
    throw InvalidInput("permutation size out of range");
  }
  std::vector<std::uint8_t> t(n);
  for (std::size_t j = 0; j < n; ++j) {
    t[j] = static_cast<std::uint8_t>(n - 1 - j);
  }
  return Permutation(std::move(t));
}

Permutation Permutation::parse_one_line(std::string_view text) {
  std::vector<std::uint8_t> targets;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char ch = text[pos];
    if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\n' || ch == '\r') {
      ++pos;
      continue;
    }
    unsigned value = 0;
    const auto [end, ec] =
        std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc{} || value == 0 || value > kMaxPermutationSize) {
      throw InvalidInput("invalid permutation entry in \"" + std::string(text) +
                         "\" (expected one-based integers)");
    }
    targets.push_back(static_cast<std::uint8_t>(value - 1));
    pos = static_cast<std::size_t>(end - text.data());
  }
  return Permutation(std::move(targets));
}

Permutation Permutation::parse_matrix(std::string_view text) {
  std::vector<std::vector<int>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row_in(line);
    std::vector<int> row;
    int v = 0;
    while (row_in >> v) {
      if (v != 0 && v != 1) {
        throw InvalidInput("permutation matrix entries must be 0 or 1");
      }
      row.push_back(v);
    }
    if (!row.empty()) {
      rows.push_back(std::move(row));
    }
  }
  const std::size_t n = rows.size();
  if (n == 0 || n > kMaxPermutationSize) {
    throw InvalidInput("permutation matrix has no rows or is too large");
  }
  std::vector<int> target(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw InvalidInput("permutation matrix must be square");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (rows[i][j] == 1) {
        if (target[j] != -1) {
          throw InvalidInput("column with more than one 1");
        }
        target[j] = static_cast<int>(i);
      }
    }
  }
  std::vector<std::uint8_t> t(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (target[j] < 0) {
      throw InvalidInput("column without a 1");
    }
    t[j] = static_cast<std::uint8_t>(target[j]);
  }
  return Permutation(std::move(t));
}

bool Permutation::is_identity() const {
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    if (targets_[j] != j) return false;
  }
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<std::uint8_t> inv(targets_.size());
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    inv[targets_[j]] = static_cast<std::uint8_t>(j);
  }
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& other) const {
  if (other.size() != size()) {
    throw InvalidInput("cannot compose permutations of different sizes");
  }
  std::vector<std::uint8_t> t(size());
  for (std::size_t j = 0; j < size(); ++j) {
    t[j] = targets_[other[j]];
  }
  return Permutation(std::move(t));
}

std::vector<std::vector<std::size_t>> Permutation::cycles() const {
  std::vector<std::vector<std::size_t>> out;
  std::vector<bool> seen(size(), false);
  for (std::size_t start = 0; start < size(); ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> cycle;
    std::size_t j = start;
    do {
      seen[j] = true;
      cycle.push_back(j);
      j = targets_[j];
    } while (j != start);
    out.push_back(std::move(cycle));
  }
  return out;
}

std::uint64_t Permutation::order() const {
  std::uint64_t l = 1;
  for (const auto& c : cycles()) {
    l = std::lcm(l, static_cast<std::uint64_t>(c.size()));
  }
  return l;
}

std::string Permutation::to_one_line() const {
  std::string s;
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    if (j) s += ' ';
    s += std::to_string(targets_[j] + 1);
  }
  return s;
}

std::string Permutation::to_matrix_text() const {
  const std::size_t n = size();
  const Permutation inv = inverse();
  std::string s;
  s.reserve(2 * n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) s += ' ';
      s += (inv[i] == j) ? '1' : '0';
    }
    s += '\n';
  }
  return s;
}

std::uint64_t factorial(std::size_t n) {
  if (n > 20) {
    throw LimitExceeded("N! does not fit in 64 bits for N > 20");
  }
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

Permutation unrank_lexicographic(std::size_t n, std::uint64_t rank) {
  if (rank >= factorial(n)) {
    throw InvalidInput("lexicographic rank out of range");
  }
  std::vector<std::uint8_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::uint8_t{0});
  std::vector<std::uint8_t> out;
  out.reserve(n);
  for (std::size_t i = n; i > 0; --i) {
    const std::uint64_t block = factorial(i - 1);
    const auto digit = static_cast<std::size_t>(rank / block);
    rank %= block;
    out.push_back(pool[digit]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digit));
  }
  return Permutation(std::move(out));
}

std::uint64_t rank_lexicographic(const Permutation& p) {
  const std::size_t n = p.size();
  std::uint64_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (p[j] < p[i]) ++smaller;
    }
    rank += smaller * factorial(n - 1 - i);
  }
  return rank;
}

}  // namespace raceway
