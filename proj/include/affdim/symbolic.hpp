#pragma once

// Finite words over {1..N}, matrix products along words, and (step-n)
// Bernoulli measures on the code space.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "affdim/linalg.hpp"
#include "affdim/random.hpp"

namespace affdim {

// Hard ceiling on any enumeration of Sigma_n.
inline constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 31;

// Finite word. Symbols are stored 0-based (0..N-1); text output is 1-based.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> symbols) : symbols_(std::move(symbols)) {}
  static Word from_one_based(const std::vector<int>& symbols);
  static Word repeat(const Word& block, std::size_t times);

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  int operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<int>& symbols() const { return symbols_; }

  // w|_n, the first n symbols.
  Word prefix(std::size_t n) const;
  Word suffix_from(std::size_t start) const;
  void push_back(int symbol) { symbols_.push_back(symbol); }

  // 1-based, e.g. "(1,2,2)"; the empty word prints as "()".
  std::string to_string() const;

  bool valid_for(int branches) const;

  friend Word operator+(const Word& a, const Word& b);
  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<int> symbols_;
};

// Common beginning of two words.
Word common_prefix(const Word& a, const Word& b);

// N^n, throwing ResourceError when it exceeds `limit`.
std::uint64_t word_count(int branches, int length, std::uint64_t limit = kEnumerationLimit);

// The word of Sigma_n with lexicographic rank `index`.
Word word_at(int branches, int length, std::uint64_t index);

// Lexicographic enumeration of Sigma_n, usable in range-for.
class WordRange {
 public:
  WordRange(int branches, int length);

  class iterator {
   public:
    iterator(int branches, Word current, std::uint64_t index) : branches_(branches), word_(std::move(current)), index_(index) {}
    const Word& operator*() const { return word_; }
    iterator& operator++();
    bool operator!=(const iterator& other) const { return index_ != other.index_; }

   private:
    int branches_;
    Word word_;
    std::uint64_t index_;
  };

  iterator begin() const;
  iterator end() const;
  std::uint64_t size() const { return count_; }

 private:
  int branches_;
  int length_;
  std::uint64_t count_;
};

WordRange enumerate_words(int branches, int length);

// A_{w_1} ... A_{w_n}; identity for the empty word.
Matrix word_product(std::span<const Matrix> matrices, const Word& w);

// Log singular values of A_w, nonincreasing, resolved even when A_w is
// numerically singular: log(alpha_1 ... alpha_k) is the log norm of the
// product of k-th compounds, and k = d comes from the determinants.
Vector word_log_singular_values(std::span<const Matrix> matrices, const Word& w);

// Products A_w for all |w| = n in lexicographic order, built level by level.
std::vector<Matrix> all_word_products(std::span<const Matrix> matrices, int length,
                                      std::uint64_t limit = kEnumerationLimit);

// Bernoulli measure on (Sigma_n)^N: i.i.d. blocks of length n drawn from a
// weight table over a support Gamma of Sigma_n. n = 1 with full support is
// the ordinary Bernoulli measure nu_p.
class StepMeasure {
 public:
  // Support words are sorted lexicographically; weights follow them.
  // Weights must be positive and sum to 1 within 1e-12.
  StepMeasure(int branches, std::vector<Word> support, std::vector<double> weights);

  // Drops zero weights and rescales the rest to sum 1.
  static StepMeasure normalized(int branches, std::vector<Word> support, std::vector<double> weights);
  static StepMeasure bernoulli(std::vector<double> p);
  static StepMeasure uniform(int branches, int block_length);

  int block_length() const { return block_length_; }
  int branches() const { return branches_; }
  std::size_t support_size() const { return support_.size(); }
  const std::vector<Word>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }

  // nu([w]) for |w| a multiple of the block length; 0 off the support.
  double cylinder_mass(const Word& w) const;

  // Support index of each of `blocks` i.i.d. draws (inverse CDF over the
  // fixed lexicographic support order).
  std::vector<std::size_t> sample_blocks(std::size_t blocks, Rng& rng) const;

 private:
  int branches_;
  int block_length_;
  std::vector<Word> support_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

// -(1/n) sum w log w, in nats per original symbol.
double entropy(const StepMeasure& m);

// Word of length n * blocks made of i.i.d. blocks.
Word sample_word(const StepMeasure& m, std::size_t blocks, Rng& rng);

}  // namespace affdim
