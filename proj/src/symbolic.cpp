#include "affdim/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace affdim {

Word Word::from_one_based(const std::vector<int>& symbols) {
  std::vector<int> s;
  s.reserve(symbols.size());
  for (int x : symbols) {
    if (x < 1) throw InvalidInput("Word: symbols are 1-based");
    s.push_back(x - 1);
  }
  return Word(std::move(s));
}

Word Word::repeat(const Word& block, std::size_t times) {
  std::vector<int> s;
  s.reserve(block.size() * times);
  for (std::size_t t = 0; t < times; ++t) s.insert(s.end(), block.symbols_.begin(), block.symbols_.end());
  return Word(std::move(s));
}

Word Word::prefix(std::size_t n) const {
  n = std::min(n, symbols_.size());
  return Word(std::vector<int>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(n)));
}

Word Word::suffix_from(std::size_t start) const {
  start = std::min(start, symbols_.size());
  return Word(std::vector<int>(symbols_.begin() + static_cast<std::ptrdiff_t>(start), symbols_.end()));
}

std::string Word::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < symbols_.size(); ++i) os << (i ? "," : "") << symbols_[i] + 1;
  os << ')';
  return os.str();
}

bool Word::valid_for(int branches) const {
  return std::all_of(symbols_.begin(), symbols_.end(), [&](int s) { return s >= 0 && s < branches; });
}

Word operator+(const Word& a, const Word& b) {
  std::vector<int> s = a.symbols_;
  s.insert(s.end(), b.symbols_.begin(), b.symbols_.end());
  return Word(std::move(s));
}

Word common_prefix(const Word& a, const Word& b) {
  std::size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return a.prefix(n);
}

std::uint64_t word_count(int branches, int length, std::uint64_t limit) {
  if (branches < 1) throw InvalidInput("word_count: need at least one branch");
  if (length < 0) throw InvalidInput("word_count: negative length");
  std::uint64_t count = 1;
  for (int i = 0; i < length; ++i) {
    if (count > limit / static_cast<std::uint64_t>(branches))
      throw ResourceError("enumeration of " + std::to_string(branches) + "^" + std::to_string(length) +
                          " words exceeds the budget of " + std::to_string(limit));
    count *= static_cast<std::uint64_t>(branches);
  }
  if (count > limit) throw ResourceError("enumeration budget exceeded");
  return count;
}

Word word_at(int branches, int length, std::uint64_t index) {
  std::vector<int> s(static_cast<std::size_t>(length));
  for (int i = length - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::uint64_t>(branches));
    index /= static_cast<std::uint64_t>(branches);
  }
  return Word(std::move(s));
}

WordRange::WordRange(int branches, int length)
    : branches_(branches), length_(length), count_(word_count(branches, length)) {
  if (branches < 2) throw InvalidInput("enumerate_words: need N >= 2");
}

WordRange::iterator& WordRange::iterator::operator++() {
  ++index_;
  std::vector<int> s = word_.symbols();
  for (auto i = static_cast<std::ptrdiff_t>(s.size()) - 1; i >= 0; --i) {
    auto& digit = s[static_cast<std::size_t>(i)];
    if (++digit < branches_) break;
    digit = 0;
  }
  word_ = Word(std::move(s));
  return *this;
}

WordRange::iterator WordRange::begin() const {
  return iterator(branches_, Word(std::vector<int>(static_cast<std::size_t>(length_), 0)), 0);
}

WordRange::iterator WordRange::end() const { return iterator(branches_, Word(), count_); }

WordRange enumerate_words(int branches, int length) { return WordRange(branches, length); }

Matrix word_product(std::span<const Matrix> matrices, const Word& w) {
  if (matrices.empty()) throw InvalidInput("word_product: no matrices");
  const auto d = matrices.front().rows();
  Matrix p = Matrix::Identity(d, d);
  for (int s : w.symbols()) {
    if (s < 0 || static_cast<std::size_t>(s) >= matrices.size()) throw InvalidInput("word_product: symbol out of range");
    p = p * matrices[static_cast<std::size_t>(s)];
  }
  return p;
}

Vector word_log_singular_values(std::span<const Matrix> matrices, const Word& w) {
  if (matrices.empty()) throw InvalidInput("word_log_singular_values: no matrices");
  if (!w.valid_for(static_cast<int>(matrices.size()))) throw InvalidInput("word_log_singular_values: symbol out of range");
  const int d = static_cast<int>(matrices.front().rows());
  Vector partial(d);  // log(alpha_1 ... alpha_k)
  for (int k = 1; k <= d; ++k) {
    double log_total = 0.0;
    if (k == d) {
      for (int s : w.symbols()) log_total += std::log(std::abs(matrices[static_cast<std::size_t>(s)].determinant()));
    } else {
      std::vector<Matrix> c;
      for (const auto& a : matrices) c.push_back(compound(a, k));
      Matrix p = Matrix::Identity(c.front().rows(), c.front().cols());
      for (int s : w.symbols()) {
        p = p * c[static_cast<std::size_t>(s)];
        const double scale = p.cwiseAbs().maxCoeff();
        p /= scale;
        log_total += std::log(scale);
      }
      log_total += std::log(operator_norm(p));
    }
    partial[k - 1] = log_total;
  }
  Vector out(d);
  out[0] = partial[0];
  for (int k = 1; k < d; ++k) out[k] = std::min(out[k - 1], partial[k] - partial[k - 1]);
  return out;
}

std::vector<Matrix> all_word_products(std::span<const Matrix> matrices, int length, std::uint64_t limit) {
  const int n_branches = static_cast<int>(matrices.size());
  word_count(n_branches, length, limit);
  const auto d = matrices.front().rows();
  std::vector<Matrix> level{Matrix::Identity(d, d)};
  for (int l = 0; l < length; ++l) {
    std::vector<Matrix> next;
    next.reserve(level.size() * matrices.size());
    for (const auto& p : level)
      for (const auto& a : matrices) next.push_back(p * a);
    level = std::move(next);
  }
  return level;
}

StepMeasure::StepMeasure(int branches, std::vector<Word> support, std::vector<double> weights)
    : branches_(branches), block_length_(0) {
  if (branches < 1) throw InvalidInput("StepMeasure: need at least one branch");
  if (support.empty() || support.size() != weights.size())
    throw InvalidInput("StepMeasure: support and weights must be nonempty and of equal size");
  block_length_ = static_cast<int>(support.front().size());
  if (block_length_ < 1) throw InvalidInput("StepMeasure: block length must be >= 1");

  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });

  double total = 0.0;
  for (std::size_t k : order) {
    const Word& w = support[k];
    if (static_cast<int>(w.size()) != block_length_) throw InvalidInput("StepMeasure: support words differ in length");
    if (!w.valid_for(branches)) throw InvalidInput("StepMeasure: symbol out of range");
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) throw InvalidInput("StepMeasure: weights must be positive");
    if (!support_.empty() && support_.back() == w) throw InvalidInput("StepMeasure: duplicate support word");
    support_.push_back(w);
    weights_.push_back(weights[k]);
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("StepMeasure: weights must sum to 1");

  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

StepMeasure StepMeasure::normalized(int branches, std::vector<Word> support, std::vector<double> weights) {
  if (support.size() != weights.size()) throw InvalidInput("StepMeasure: support and weights differ in size");
  std::vector<Word> s;
  std::vector<double> w;
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (weights[i] < 0.0 || !std::isfinite(weights[i])) throw InvalidInput("StepMeasure: negative weight");
    if (weights[i] == 0.0) continue;
    s.push_back(std::move(support[i]));
    w.push_back(weights[i]);
    total += weights[i];
  }
  if (w.empty()) throw InvalidInput("StepMeasure: all weights are zero");
  for (double& x : w) x /= total;
  // Pairwise rounding can leave the sum a few ulps off; fold it into the
  // largest weight.
  const double drift = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
  *std::max_element(w.begin(), w.end()) += drift;
  return StepMeasure(branches, std::move(s), std::move(w));
}

StepMeasure StepMeasure::bernoulli(std::vector<double> p) {
  std::vector<Word> support;
  for (std::size_t i = 0; i < p.size(); ++i) support.emplace_back(std::vector<int>{static_cast<int>(i)});
  const int n = static_cast<int>(p.size());
  return StepMeasure(n, std::move(support), std::move(p));
}

StepMeasure StepMeasure::uniform(int branches, int block_length) {
  const auto count = word_count(branches, block_length);
  std::vector<Word> support;
  support.reserve(count);
  for (const Word& w : enumerate_words(branches, block_length)) support.push_back(w);
  return normalized(branches, std::move(support), std::vector<double>(count, 1.0));
}

double StepMeasure::cylinder_mass(const Word& w) const {
  if (w.size() % static_cast<std::size_t>(block_length_) != 0)
    throw InvalidInput("cylinder_mass: length must be a multiple of the block length");
  double mass = 1.0;
  for (std::size_t start = 0; start < w.size(); start += static_cast<std::size_t>(block_length_)) {
    const Word block(std::vector<int>(w.symbols().begin() + static_cast<std::ptrdiff_t>(start),
                                      w.symbols().begin() + static_cast<std::ptrdiff_t>(start) + block_length_));
    auto it = std::lower_bound(support_.begin(), support_.end(), block);
    if (it == support_.end() || !(*it == block)) return 0.0;
    mass *= weights_[static_cast<std::size_t>(it - support_.begin())];
  }
  return mass;
}

std::vector<std::size_t> StepMeasure::sample_blocks(std::size_t blocks, Rng& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::size_t> out(blocks);
  for (auto& k : out) {
    const double u = uniform(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    k = static_cast<std::size_t>(it - cumulative_.begin());
  }
  return out;
}

double entropy(const StepMeasure& m) {
  double h = 0.0;
  for (double w : m.weights()) h -= w * std::log(w);
  return std::max(0.0, h) / m.block_length();
}

Word sample_word(const StepMeasure& m, std::size_t blocks, Rng& rng) {
  if (blocks < 1) throw InvalidInput("sample_word: need at least one block");
  std::vector<int> s;
  s.reserve(blocks * static_cast<std::size_t>(m.block_length()));
  for (std::size_t k : m.sample_blocks(blocks, rng)) {
    const auto& b = m.support()[k].symbols();
    s.insert(s.end(), b.begin(), b.end());
  }
  return Word(std::move(s));
}

}  // namespace affdim
