#include "affdim/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"

namespace affdim {

namespace {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Bisection for the root of a decreasing g with g(0) >= 0. The bracket is
// grown past d by doubling when needed; the upper end is returned.
double decreasing_root(const std::function<double(double)>& g, double start_hi, const AffinityOptions& options) {
  double lo = 0.0;
  double hi = start_hi;
  for (int k = 0; g(hi) > 0.0; ++k) {
    if (k > 60) throw NumericalFault("pressure root: no sign change");
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < options.max_iterations && hi - lo > options.tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

// Below this ratio alpha_d of an explicit product carries too few correct
// digits and the compound route is used instead.
constexpr double kResolvedRatio = 1e-6;

template <typename WordFn>
void fill_log_alpha(const Matrix& p, std::span<const Matrix> mats, WordFn&& word, double* out) {
  const auto spec = singular_values(p);
  if (!(spec.mininorm() >= kResolvedRatio * spec.norm())) {
    Eigen::Map<Vector>(out, p.rows()) = word_log_singular_values(mats, word());
    return;
  }
  for (Eigen::Index i = 0; i < spec.size(); ++i) out[i] = std::log(spec[i]);
}

}  // namespace

double log_sum_exp(const std::vector<double>& terms) {
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  std::vector<double> scaled(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) scaled[i] = std::exp(terms[i] - top);
  return top + std::log(pairwise_sum(scaled.data(), scaled.size()));
}

LevelSpectra::LevelSpectra(const AffineIFS& ifs, int n, std::uint64_t limit) : n_(n), d_(ifs.dim()), count_(0) {
  if (n < 1) throw InvalidInput("pressure: level n must be >= 1");
  require_contractive(ifs, "pressure");
  const int branches = ifs.branches();
  count_ = static_cast<std::size_t>(word_count(branches, n, limit));
  table_.assign(count_ * static_cast<std::size_t>(d_), 0.0);

  // Words are split by a prefix of length p; each prefix block is enumerated
  // depth-first with a stack of partial products and written in place.
  int p = 0;
  while (p < n && ipow(static_cast<std::uint64_t>(branches), p) < 64) ++p;
  const int rest = n - p;
  const std::size_t blocks = static_cast<std::size_t>(ipow(static_cast<std::uint64_t>(branches), p));
  const std::size_t block_size = static_cast<std::size_t>(ipow(static_cast<std::uint64_t>(branches), rest));
  const auto& mats = ifs.matrices();

  parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
    std::vector<Matrix> stack(static_cast<std::size_t>(rest) + 1);
    std::vector<int> path(static_cast<std::size_t>(rest));
    for (std::size_t b = begin; b < end; ++b) {
      const Word head = word_at(branches, p, b);
      stack[0] = word_product(mats, head);
      std::size_t out = b * block_size;
      std::function<void(int)> descend = [&](int depth) {
        if (depth == rest) {
          fill_log_alpha(stack[static_cast<std::size_t>(depth)], mats, [&] { return head + Word(path); },
                         table_.data() + out * static_cast<std::size_t>(d_));
          ++out;
          return;
        }
        for (int i = 0; i < branches; ++i) {
          path[static_cast<std::size_t>(depth)] = i;
          stack[static_cast<std::size_t>(depth) + 1].noalias() = stack[static_cast<std::size_t>(depth)] * mats[static_cast<std::size_t>(i)];
          descend(depth + 1);
        }
      };
      descend(0);
    }
  });
}

double LevelSpectra::log_pressure_sum(double s) const {
  std::vector<double> terms(count_);
  parallel_for(count_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) terms[w] = log_svf(log_alpha(w), s);
  });
  return log_sum_exp(terms);
}

double LevelSpectra::log_pressure_sum(double s, const std::vector<std::size_t>& subset) const {
  std::vector<double> terms(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) terms[k] = log_svf(log_alpha(subset[k]), s);
  return log_sum_exp(terms);
}

double pressure_sum(const AffineIFS& ifs, double s, int n, std::uint64_t limit) {
  return LevelSpectra(ifs, n, limit).log_pressure_sum(s);
}

PressureEstimate pressure_estimate(const AffineIFS& ifs, double s, int n, std::uint64_t limit) {
  PressureEstimate e;
  e.s = s;
  e.n = n;
  e.a_n = pressure_sum(ifs, s, n, limit);
  e.upper = e.a_n / n;
  const double prev = n > 1 ? pressure_sum(ifs, s, n - 1, limit) : 0.0;
  e.slope = e.a_n - prev;
  return e;
}

double affinity_upper(const LevelSpectra& spectra, const AffinityOptions& options) {
  const double d = spectra.dim();
  if (spectra.log_pressure_sum(d) > 0.0) return d;
  return decreasing_root([&](double s) { return spectra.log_pressure_sum(s); }, d, options);
}

double affinity_upper(const AffineIFS& ifs, int n, const AffinityOptions& options) {
  return affinity_upper(LevelSpectra(ifs, n, options.limit), options);
}

SubsystemMeasure subsystem_measure(const AffineIFS& ifs, int n, const std::optional<std::vector<Word>>& gamma,
                                   const AffinityOptions& options) {
  require_contractive(ifs, "subsystem_measure");
  if (n < 1) throw InvalidInput("subsystem_measure: level n must be >= 1");
  const int branches = ifs.branches();
  const int d = ifs.dim();

  std::vector<Word> words;
  std::vector<double> log_alpha;
  if (gamma) {
    if (gamma->empty()) throw PreconditionError("subsystem_measure: empty subset");
    words = *gamma;
    log_alpha.resize(words.size() * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (static_cast<int>(words[k].size()) != n || !words[k].valid_for(branches))
        throw InvalidInput("subsystem_measure: subset words must lie in Sigma_n");
      fill_log_alpha(word_product(ifs.matrices(), words[k]), ifs.matrices(), [&] { return words[k]; },
                     log_alpha.data() + k * static_cast<std::size_t>(d));
    }
  } else {
    const LevelSpectra spectra(ifs, n, options.limit);
    words.reserve(spectra.words());
    for (const Word& w : enumerate_words(branches, n)) words.push_back(w);
    log_alpha.resize(spectra.words() * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < spectra.words(); ++k)
      Eigen::Map<Vector>(log_alpha.data() + k * static_cast<std::size_t>(d), d) = spectra.log_alpha(k);
  }

  const auto row = [&](std::size_t k) { return Eigen::Map<const Vector>(log_alpha.data() + k * static_cast<std::size_t>(d), d); };
  if (words.size() == 1) return SubsystemMeasure{0.0, StepMeasure(branches, words, {1.0}), true};

  const auto g = [&](double s) {
    std::vector<double> terms(words.size());
    for (std::size_t k = 0; k < words.size(); ++k) terms[k] = log_svf(row(k), s);
    return log_sum_exp(terms);
  };
  const double s = decreasing_root(g, static_cast<double>(d), options);
  std::vector<double> weights(words.size());
  for (std::size_t k = 0; k < words.size(); ++k) weights[k] = std::exp(log_svf(row(k), s));
  return SubsystemMeasure{s, StepMeasure::normalized(branches, std::move(words), std::move(weights)), false};
}

QuasiMultiplicativity quasi_multiplicativity_diagnostic(const AffineIFS& ifs, double s, int n,
                                                        const QuasiMultiplicativityOptions& options) {
  if (n < 1) throw InvalidInput("quasi_multiplicativity: level n must be >= 1");
  const int branches = ifs.branches();
  const int d = ifs.dim();
  const auto log_phi = [&](const Matrix& a, auto&& word) {
    Vector log_alpha(d);
    fill_log_alpha(a, ifs.matrices(), word, log_alpha.data());
    return log_svf(log_alpha, s);
  };

  QuasiMultiplicativity q;
  q.s = s;
  q.n = n;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  std::uint64_t words = 0;
  bool exhaustive = true;
  try {
    words = word_count(branches, n, options.pair_budget);
    exhaustive = words <= options.pair_budget / words;
  } catch (const ResourceError&) {
    exhaustive = false;
  }

  if (exhaustive) {
    const auto products = all_word_products(ifs.matrices(), n);
    std::vector<double> phis(products.size());
    for (std::size_t i = 0; i < products.size(); ++i)
      phis[i] = log_phi(products[i], [&] { return word_at(branches, n, i); });
    std::vector<double> row_lo(products.size()), row_hi(products.size());
    parallel_for(products.size(), [&](std::size_t begin, std::size_t end) {
      Matrix ij;
      for (std::size_t i = begin; i < end; ++i) {
        double l = std::numeric_limits<double>::infinity();
        double h = -l;
        for (std::size_t j = 0; j < products.size(); ++j) {
          ij.noalias() = products[i] * products[j];
          const double r =
              phis[i] + phis[j] - log_phi(ij, [&] { return word_at(branches, n, i) + word_at(branches, n, j); });
          l = std::min(l, r);
          h = std::max(h, r);
        }
        row_lo[i] = l;
        row_hi[i] = h;
      }
    });
    lo = *std::min_element(row_lo.begin(), row_lo.end());
    hi = *std::max_element(row_hi.begin(), row_hi.end());
    q.pairs = words * words;
  } else {
    q.sampled = true;
    const std::uint64_t batch = 1024;
    const std::uint64_t batches = (options.samples + batch - 1) / batch;
    std::vector<double> b_lo(batches), b_hi(batches);
    parallel_for(static_cast<std::size_t>(batches), [&](std::size_t begin, std::size_t end) {
      for (std::size_t b = begin; b < end; ++b) {
        Rng rng = make_rng(options.seed, b);
        std::uniform_int_distribution<int> symbol(0, branches - 1);
        const std::uint64_t count = std::min(batch, options.samples - b * batch);
        double l = std::numeric_limits<double>::infinity();
        double h = -l;
        for (std::uint64_t k = 0; k < count; ++k) {
          std::vector<int> wi(static_cast<std::size_t>(n)), wj(static_cast<std::size_t>(n));
          for (auto& x : wi) x = symbol(rng);
          for (auto& x : wj) x = symbol(rng);
          const Word a(wi), b(wj);
          const Matrix ai = word_product(ifs.matrices(), a);
          const Matrix aj = word_product(ifs.matrices(), b);
          const double r = log_phi(ai, [&] { return a; }) + log_phi(aj, [&] { return b; }) -
                           log_phi(Matrix(ai * aj), [&] { return a + b; });
          l = std::min(l, r);
          h = std::max(h, r);
        }
        b_lo[b] = l;
        b_hi[b] = h;
      }
    });
    lo = *std::min_element(b_lo.begin(), b_lo.end());
    hi = *std::max_element(b_hi.begin(), b_hi.end());
    q.pairs = options.samples;
  }
  q.c_lower = std::exp(lo);
  q.c_defect = std::exp(hi);
  return q;
}

DimensionBracket dimension_bracket(const AffineIFS& ifs, int n, const LyapunovOptions& lyapunov,
                                   const AffinityOptions& options) {
  DimensionBracket b;
  b.n = n;
  const LevelSpectra spectra(ifs, n, options.limit);
  b.upper = affinity_upper(spectra, options);
  const auto sub = subsystem_measure(ifs, n, std::nullopt, options);
  b.subsystem_s = sub.s;
  b.entropy = entropy(sub.measure);
  b.spectrum = exponents_mc(ifs, sub.measure, lyapunov);
  const int d = ifs.dim();
  b.lower = lyapunov_dimension(b.entropy, b.spectrum.chi, d);
  // dim_L is nonincreasing in every exponent, so shifting all of them by one
  // standard error in either direction brackets the propagated error.
  const double up = lyapunov_dimension(b.entropy, (b.spectrum.chi - b.spectrum.std_error).cwiseMax(1e-300), d);
  const double down = lyapunov_dimension(b.entropy, b.spectrum.chi + b.spectrum.std_error, d);
  b.lower_std_error = 0.5 * (up - down);
  return b;
}

}  // namespace affdim
