#include "affdim/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"

namespace affdim {

namespace {

constexpr std::size_t kBatches = 10;

struct TrialSums {
  std::vector<Vector> batch_chi;  // per batch, ascending
  Vector chi;                     // whole trial, ascending
};

Vector ascending_exponents(const Vector& log_diag_sum, double symbols) {
  std::vector<double> v(log_diag_sum.data(), log_diag_sum.data() + log_diag_sum.size());
  std::sort(v.begin(), v.end(), std::greater<>());
  Vector chi(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) chi[static_cast<Eigen::Index>(i)] = -v[i] / symbols;
  return chi;
}

struct MeanError {
  Vector mean;
  Vector err;
  double sum_err = 0.0;
};

MeanError mean_and_error(const std::vector<Vector>& samples) {
  const auto d = samples.front().size();
  const double k = static_cast<double>(samples.size());
  MeanError out;
  out.mean = Vector::Zero(d);
  for (const auto& s : samples) out.mean += s;
  out.mean /= k;
  out.err = Vector::Zero(d);
  if (samples.size() < 2) return out;
  Vector var = Vector::Zero(d);
  double sum_var = 0.0;
  const double sum_mean = out.mean.sum();
  for (const auto& s : samples) {
    var += (s - out.mean).cwiseAbs2();
    sum_var += (s.sum() - sum_mean) * (s.sum() - sum_mean);
  }
  out.err = (var / (k - 1.0) / k).cwiseSqrt();
  out.sum_err = std::sqrt(sum_var / (k - 1.0) / k);
  return out;
}

}  // namespace

LyapunovSpectrum exponents_mc(const AffineIFS& ifs, const StepMeasure& m, const LyapunovOptions& options) {
  require_contractive(ifs, "exponents_mc");
  if (options.steps < 100) throw InvalidInput("exponents_mc: need at least 100 steps");
  if (options.trials < 1) throw InvalidInput("exponents_mc: need at least one trial");
  if (m.branches() != ifs.branches()) throw InvalidInput("exponents_mc: measure and system disagree on N");
  const int d = ifs.dim();
  const std::size_t n = static_cast<std::size_t>(m.block_length());

  std::vector<Matrix> cocycle;
  cocycle.reserve(m.support_size());
  for (const Word& w : m.support()) cocycle.push_back(word_product(ifs.matrices(), w).transpose());

  const std::size_t burn_blocks = (options.burn_in + n - 1) / n;
  const std::size_t main_blocks = (options.steps + n - 1) / n;
  const std::size_t batches = std::min(kBatches, main_blocks);
  const std::size_t cadence =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::max(1, options.reorthogonalize_every)) / n);

  std::vector<TrialSums> trials(options.trials);
  parallel_for(options.trials, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng = make_rng(options.seed, t);
      Matrix q = Matrix::Identity(d, d);
      Matrix acc = q;
      std::size_t pending = 0;
      Vector sums = Vector::Zero(d);
      const auto refactor = [&](Vector* into) {
        auto qr = positive_qr(acc);
        for (int i = 0; i < d; ++i) {
          const double r = qr.r(i, i);
          if (!(r > 1e-300)) throw NumericalFault("exponents_mc: vanishing triangular factor, renormalization failed");
          if (into) (*into)[i] += std::log(r);
        }
        q = std::move(qr.q);
        acc = q;
        pending = 0;
      };

      for (std::size_t k : m.sample_blocks(burn_blocks, rng)) {
        acc = cocycle[k] * acc;
        if (++pending == cadence) refactor(nullptr);
      }
      if (pending) refactor(nullptr);

      TrialSums& out = trials[t];
      Vector total = Vector::Zero(d);
      const auto draws = m.sample_blocks(main_blocks, rng);
      std::size_t pos = 0;
      for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t stop = main_blocks * (b + 1) / batches;
        const std::size_t count = stop - pos;
        sums.setZero();
        for (; pos < stop; ++pos) {
          acc = cocycle[draws[pos]] * acc;
          if (++pending == cadence) refactor(&sums);
        }
        if (pending) refactor(&sums);
        out.batch_chi.push_back(ascending_exponents(sums, static_cast<double>(count * n)));
        total += sums;
      }
      out.chi = ascending_exponents(total, static_cast<double>(main_blocks * n));
    }
  });

  LyapunovSpectrum spectrum;
  spectrum.trials = options.trials;
  spectrum.steps = options.trials * main_blocks * n;
  if (options.trials >= 2) {
    std::vector<Vector> per_trial;
    for (const auto& t : trials) per_trial.push_back(t.chi);
    const auto me = mean_and_error(per_trial);
    spectrum.chi = me.mean;
    spectrum.std_error = me.err;
    spectrum.sum_std_error = me.sum_err;
  } else {
    const auto me = mean_and_error(trials.front().batch_chi);
    spectrum.chi = trials.front().chi;
    spectrum.std_error = me.err;
    spectrum.sum_std_error = me.sum_err;
  }
  return spectrum;
}

double lyapunov_dimension(double h, const Vector& chi, int d) {
  if (!(h >= 0.0)) throw InvalidInput("lyapunov_dimension: entropy must be nonnegative");
  if (chi.size() != d) throw InvalidInput("lyapunov_dimension: spectrum length differs from d");
  for (int i = 0; i < d; ++i)
    if (!(chi[i] > 0.0)) throw InvalidInput("lyapunov_dimension: exponents must be positive");
  double best = static_cast<double>(d);
  double partial = 0.0;
  for (int k = 0; k < d; ++k) {
    best = std::min(best, k + (h - partial) / chi[k]);
    partial += chi[k];
  }
  return best;
}

double lyapunov_dimension(double h, const LyapunovSpectrum& chi, int d) { return lyapunov_dimension(h, chi.chi, d); }

const char* to_string(GapClass c) {
  switch (c) {
    case GapClass::dominated: return "dominated";
    case GapClass::undominated: return "undominated";
    case GapClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

bool DominationReport::all_dominated() const {
  return !gaps.empty() &&
         std::all_of(gaps.begin(), gaps.end(), [](const GapReport& g) { return g.classification == GapClass::dominated; });
}

DominationReport domination_test(const AffineIFS& ifs, int n_max, const DominationOptions& options) {
  if (n_max < 4) throw InvalidInput("domination_test: n_max must be >= 4");
  const int d = ifs.dim();
  const int branches = ifs.branches();
  if (d < 2) throw UnsupportedDimension("domination_test: needs d >= 2");
  if (options.exhaustive) word_count(branches, n_max, options.limit);

  DominationReport report;
  report.n_max = n_max;
  report.sampled = !options.exhaustive;
  report.gaps.resize(static_cast<std::size_t>(d - 1));
  for (int g = 0; g < d - 1; ++g) report.gaps[static_cast<std::size_t>(g)].gap = g + 1;

  // Per word: ratios alpha_{g+1}/alpha_g, folded into per-chunk extrema.
  const auto scan = [&](std::size_t count, const std::function<Matrix(std::size_t)>& product) {
    const std::size_t chunks = std::min<std::size_t>(count, 256);
    std::vector<Vector> lo(chunks, Vector::Constant(d - 1, std::numeric_limits<double>::infinity()));
    std::vector<Vector> hi(chunks, Vector::Constant(d - 1, 0.0));
    parallel_for(chunks, [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        for (std::size_t w = count * c / chunks; w < count * (c + 1) / chunks; ++w) {
          const auto spec = singular_values(product(w));
          for (int g = 0; g < d - 1; ++g) {
            const double r = spec[g + 1] / spec[g];
            lo[c][g] = std::min(lo[c][g], r);
            hi[c][g] = std::max(hi[c][g], r);
          }
        }
      }
    });
    Vector l = lo.front(), h = hi.front();
    for (std::size_t c = 1; c < chunks; ++c) {
      l = l.cwiseMin(lo[c]);
      h = h.cwiseMax(hi[c]);
    }
    return std::make_pair(l, h);
  };

  std::vector<Matrix> level{Matrix::Identity(d, d)};
  for (int n = 1; n <= n_max; ++n) {
    std::pair<Vector, Vector> ext;
    if (options.exhaustive) {
      std::vector<Matrix> next;
      next.reserve(level.size() * static_cast<std::size_t>(branches));
      for (const auto& p : level)
        for (const auto& a : ifs.matrices()) next.push_back(p * a);
      level = std::move(next);
      ext = scan(level.size(), [&](std::size_t w) { return level[w]; });
      report.words_examined += level.size();
    } else {
      std::vector<Word> words(options.samples);
      Rng rng = make_rng(options.seed, static_cast<std::uint64_t>(n));
      std::uniform_int_distribution<int> symbol(0, branches - 1);
      for (auto& w : words) {
        std::vector<int> s(static_cast<std::size_t>(n));
        for (auto& x : s) x = symbol(rng);
        w = Word(std::move(s));
      }
      ext = scan(words.size(), [&](std::size_t w) { return word_product(ifs.matrices(), words[w]); });
      report.words_examined += words.size();
    }
    for (int g = 0; g < d - 1; ++g) {
      auto& gap = report.gaps[static_cast<std::size_t>(g)];
      gap.min_ratio_by_level.push_back(ext.first[g]);
      gap.max_ratio_by_level.push_back(ext.second[g]);
    }
  }

  for (auto& gap : report.gaps) {
    const std::size_t k = gap.max_ratio_by_level.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < k; ++i) {
      sx += static_cast<double>(i + 1);
      sy += std::log(gap.max_ratio_by_level[i]);
    }
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double dx = static_cast<double>(i + 1) - mx;
      const double dy = std::log(gap.max_ratio_by_level[i]) - my;
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
    gap.decay_rate = sxy / sxx;
    gap.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
    gap.min_ratio = *std::min_element(gap.min_ratio_by_level.begin(), gap.min_ratio_by_level.end());
    if (gap.decay_rate < -options.epsilon && gap.r2 > options.min_r2)
      gap.classification = GapClass::dominated;
    else if (gap.min_ratio >= 0.5 * gap.max_ratio_by_level.front())
      gap.classification = GapClass::undominated;
    else
      gap.classification = GapClass::inconclusive;
  }
  return report;
}

namespace {

struct Eigenlines {
  Vector e1, e2;  // unit vectors; e1 for the larger |lambda|
};

// Real distinct-modulus eigenvalues of a 2x2 matrix, or nothing.
std::optional<Eigenlines> pinching_lines(const Matrix& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), dd = m(1, 1);
  const double tr = a + dd;
  const double det = a * dd - b * c;
  const double disc = tr * tr - 4.0 * det;
  if (!(disc > 0.0)) return std::nullopt;
  const double root = std::sqrt(disc);
  // Stable pair: the larger-modulus root without cancellation, the other via det.
  const double big = 0.5 * (tr + std::copysign(root, tr == 0.0 ? 1.0 : tr));
  if (big == 0.0) return std::nullopt;
  const double small = det / big;
  if (!(std::abs(small) / std::abs(big) < 1.0 - 1e-8)) return std::nullopt;
  const auto line = [&](double lambda) {
    Vector u(2), v(2);
    u << b, lambda - a;
    v << lambda - dd, c;
    Vector e = u.norm() >= v.norm() ? u : v;
    if (e.norm() == 0.0) {
      e = Vector::Zero(2);
      e[std::abs(a - lambda) < std::abs(dd - lambda) ? 0 : 1] = 1.0;
    }
    return Vector(e.normalized());
  };
  return Eigenlines{line(big), line(small)};
}

double line_sine(const Vector& x, const Vector& y) {
  return std::abs(x[0] * y[1] - x[1] * y[0]) / (x.norm() * y.norm());
}

}  // namespace

PinchingTwisting pinching_twisting_search(const AffineIFS& ifs, int max_len) {
  if (ifs.dim() != 2) throw UnsupportedDimension("pinching_twisting_search: only d = 2 is supported");
  if (max_len < 1) throw InvalidInput("pinching_twisting_search: max_len must be >= 1");
  const int branches = ifs.branches();
  for (int n = 1; n <= max_len; ++n) word_count(branches, n, std::uint64_t{1} << 22);

  std::vector<Word> words;
  std::vector<Matrix> products;
  {
    std::vector<Word> lw{Word()};
    std::vector<Matrix> lp{Matrix::Identity(2, 2)};
    for (int n = 1; n <= max_len; ++n) {
      std::vector<Word> nw;
      std::vector<Matrix> np;
      for (std::size_t k = 0; k < lw.size(); ++k)
        for (int i = 0; i < branches; ++i) {
          Word w = lw[k];
          w.push_back(i);
          nw.push_back(std::move(w));
          np.push_back(lp[k] * ifs.matrix(i));
        }
      words.insert(words.end(), nw.begin(), nw.end());
      products.insert(products.end(), np.begin(), np.end());
      lw = std::move(nw);
      lp = std::move(np);
    }
  }

  PinchingTwisting out;
  const double min_sine = std::sin(1e-8);
  std::size_t candidates = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    ++out.words_examined;
    const auto lines = pinching_lines(products[i]);
    if (!lines) continue;
    if (!out.pinching) out.pinching = words[i];
    for (std::size_t j = 0; j < words.size(); ++j) {
      bool twists = true;
      for (const Vector* e : {&lines->e1, &lines->e2}) {
        const Vector image = products[j] * *e;
        if (!(line_sine(image, lines->e1) > min_sine && line_sine(image, lines->e2) > min_sine)) {
          twists = false;
          break;
        }
      }
      if (twists) {
        out.pinching = words[i];
        out.twisting = words[j];
        return out;
      }
    }
    if (++candidates >= 64) break;
  }
  return out;
}

}  // namespace affdim
