#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace raceway {

/// A mixing device: the content of layer j is moved to layer sigma(j).
///
/// Stored zero-based (target(j) in 0..N-1); text forms are one-based. The
/// associated matrix P has P(sigma(j), j) = 1, so (P w)_{sigma(j)} = w_j.
/// Ordering is lexicographic on the one-line notation.
class Permutation {
 public:
  /// Validates that `targets` is a bijection on {0..N-1}.
  explicit Permutation(std::vector<std::uint8_t> targets);

  static Permutation identity(std::size_t n);
  /// sigma(j) = N + 1 - j; the anti-diagonal matrix.
  static Permutation reversal(std::size_t n);

  /// Parses one-based one-line notation, e.g. "2 4 6 8 10 11 9 7 5 3 1".
  /// Separators may be spaces, tabs or commas.
  static Permutation parse_one_line(std::string_view text);

  /// Parses N lines of N space-separated 0/1 entries in the matrix layout
  /// produced by to_matrix_text().
  static Permutation parse_matrix(std::string_view text);

  std::size_t size() const { return targets_.size(); }
  std::size_t operator[](std::size_t j) const { return targets_[j]; }
  const std::vector<std::uint8_t>& targets() const { return targets_; }

  bool is_identity() const;
  Permutation inverse() const;
  /// Composition: (this * other)(j) = this(other(j)).
  Permutation compose(const Permutation& other) const;
  /// Least K >= 1 with sigma^K = id.
  std::uint64_t order() const;
  /// Disjoint cycles, each starting at its smallest element.
  std::vector<std::vector<std::size_t>> cycles() const;

  std::string to_one_line() const;
  /// N lines, row i holds a 1 in column j iff i == sigma(j).
  std::string to_matrix_text() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend std::strong_ordering operator<=>(const Permutation& a,
                                          const Permutation& b) {
    return a.targets_ <=> b.targets_;
  }

 private:
  std::vector<std::uint8_t> targets_;
};

/// Largest layer count accepted by Permutation (fits the uint8_t storage).
inline constexpr std::size_t kMaxPermutationSize = 255;

/// N! as an unsigned 64-bit integer; throws LimitExceeded when N > 20.
std::uint64_t factorial(std::size_t n);

/// Lexicographic rank <-> permutation over S_N (rank 0 is the identity).
Permutation unrank_lexicographic(std::size_t n, std::uint64_t rank);
std::uint64_t rank_lexicographic(const Permutation& p);

}  // namespace raceway
