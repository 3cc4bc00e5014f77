#include "affdim/furstenberg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "affdim/parallel.hpp"
#include "affdim/pressure.hpp"

namespace affdim {

namespace {

constexpr std::uint64_t kBatch = 1024;

Word sampled_word(const StepMeasure& m, std::size_t steps, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(m.block_length());
  return sample_word(m, (steps + n - 1) / n, rng).prefix(steps);
}

Vector sorted_desc(const Vector& x) {
  Vector y = x;
  std::sort(y.data(), y.data() + y.size(), std::greater<>());
  return y;
}

}  // namespace

OrbitSample grassmann_orbit(const AffineIFS& ifs, const StepMeasure& m, int k, std::size_t steps, Rng& rng) {
  require_contractive(ifs, "grassmann_orbit");
  const int d = ifs.dim();
  if (k < 1 || k > d - 1) throw InvalidInput("grassmann_orbit: need 1 <= k <= d - 1");
  std::vector<Matrix> inverses;
  for (int i = 0; i < ifs.branches(); ++i) {
    if (ifs.spectrum(i).mininorm() < kSingularRatio) throw PreconditionError("grassmann_orbit: near-singular matrix");
    inverses.push_back(ifs.matrix(i).inverse());
  }

  OrbitSample orbit;
  orbit.k = k;
  orbit.subspaces.reserve(steps + 1);
  orbit.factors.reserve(steps);
  orbit.subspaces.push_back(random_subspace(d, k, rng));
  orbit.word = sampled_word(m, steps, rng);
  for (std::size_t t = 0; t < steps; ++t) {
    auto qr = positive_qr(inverses[static_cast<std::size_t>(orbit.word[t])] * orbit.subspaces.back().basis());
    auto next = Subspace::from_orthonormal(std::move(qr.q));
    if (!next.is_orthonormal(1e-10)) throw NumericalFault("grassmann_orbit: lost orthonormality");
    orbit.subspaces.push_back(std::move(next));
    orbit.factors.push_back(std::move(qr.r));
  }
  return orbit;
}

std::vector<double> furstenberg_limit_residual(const OrbitSample& orbit, const LyapunovSpectrum& chi, std::size_t start) {
  const int k = orbit.k;
  const auto d = chi.chi.size();
  if (k < 1 || k >= d) throw InvalidInput("furstenberg_limit_residual: orbit and spectrum disagree");
  if (start >= orbit.factors.size()) throw InvalidInput("furstenberg_limit_residual: start beyond orbit");
  const double target = chi.chi[d - k];
  std::vector<double> r;
  r.reserve(orbit.factors.size() - start);
  Vector sums = Vector::Zero(k);
  for (std::size_t t = start; t < orbit.factors.size(); ++t) {
    sums += orbit.factors[t].diagonal().array().log().matrix();
    const double n = static_cast<double>(t - start + 1);
    r.push_back(sums.minCoeff() / n - target);
  }
  return r;
}

double svf_exponent(const LyapunovSpectrum& chi, double s) {
  // phi^s evaluated on exponents instead of log singular values.
  return -log_svf((-chi.chi).eval(), s);
}

std::vector<double> projected_svf_limit_residual(const AffineIFS& ifs, const StepMeasure& m, const Subspace& v,
                                                 double s, std::size_t steps, const LyapunovSpectrum& chi, Rng& rng) {
  const int d = ifs.dim();
  if (v.ambient() != d || !v.proper()) throw InvalidInput("projected_svf_limit_residual: need a proper subspace");
  const int k = d - v.dim();
  if (!(s >= 0.0 && s <= k)) throw InvalidInput("projected_svf_limit_residual: need 0 <= s <= k");
  const double target = svf_exponent(chi, s);
  const Word word = sampled_word(m, steps, rng);

  // Rows of B^T A_{i|n} are tracked through Y = A_{i_n}^T ... A_{i_1}^T B.
  Matrix y = v.complement().basis();
  Vector sums = Vector::Zero(k);
  std::vector<double> out;
  out.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    auto qr = positive_qr(ifs.matrix(word[t]).transpose() * y);
    sums += qr.r.diagonal().array().log().matrix();
    y = std::move(qr.q);
    out.push_back(-log_svf(sorted_desc(sums), s) / static_cast<double>(t + 1) - target);
  }
  return out;
}

namespace {

// pi over a finite word, with translations transformed by g.
Vector projection_with(const AffineIFS& ifs, const Word& w, const Matrix& g) {
  const int d = ifs.dim();
  Vector x = Vector::Zero(d);
  Matrix prefix = Matrix::Identity(d, d);
  for (std::size_t k = 0; k < w.size(); ++k) {
    x.noalias() += prefix * (g * ifs.translation(w[k]));
    prefix = prefix * ifs.matrix(w[k]);
  }
  return x;
}

Word periodic_word(int first, const std::vector<int>& prefix, const std::vector<int>& cycle, std::size_t depth) {
  std::vector<int> s{first};
  s.insert(s.end(), prefix.begin(), prefix.end());
  while (s.size() < depth) s.push_back(cycle[(s.size() - 1 - prefix.size()) % cycle.size()]);
  s.resize(depth);
  return Word(std::move(s));
}

}  // namespace

TransversalityDelta transversality_delta(const AffineIFS& ifs, const TransversalityOptions& options) {
  if (ifs.dim() != 2) throw UnsupportedDimension("transversality_delta: d must be 2");
  if (options.samples < 1 || options.depth < 1) throw InvalidInput("transversality_delta: need samples and depth >= 1");
  require_contractive(ifs, "transversality_delta");
  if (!duplicate_translations(ifs).empty()) throw PreconditionError("transversality_delta: translations must be distinct");
  const int branches = ifs.branches();
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix j90 = rotation(std::numbers::pi / 2);

  TransversalityDelta out;
  out.samples = options.samples;
  out.depth = options.depth;
  out.member = membership_margin(ifs).member();
  out.correction = 2.0 * std::pow(ifs.norm(), static_cast<double>(options.depth)) * ifs.radius_bound();

  const std::uint64_t batches = (options.samples + kBatch - 1) / kBatch;
  std::vector<double> raw(batches), profiled(batches);
  parallel_for(static_cast<std::size_t>(batches), [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      Rng rng = make_rng(options.seed, b);
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      std::uniform_int_distribution<int> symbol(0, branches - 1);
      std::uniform_int_distribution<int> other(1, branches - 1);
      std::uniform_int_distribution<int> prefix_len(0, 3);
      std::uniform_int_distribution<int> cycle_len(1, 3);
      const auto random_block = [&](int len) {
        std::vector<int> s(static_cast<std::size_t>(len));
        for (auto& x : s) x = symbol(rng);
        return s;
      };
      const std::uint64_t count = std::min(kBatch, options.samples - b * kBatch);
      double lo = std::numeric_limits<double>::infinity();
      double lo_prof = lo;
      for (std::uint64_t k = 0; k < count; ++k) {
        const int i1 = symbol(rng);
        const int j1 = (i1 + other(rng)) % branches;
        const auto pi = random_block(prefix_len(rng));
        const auto ci = random_block(cycle_len(rng));
        const auto pj = random_block(prefix_len(rng));
        const auto cj = random_block(cycle_len(rng));
        const Word wi = periodic_word(i1, pi, ci, options.depth);
        const Word wj = periodic_word(j1, pj, cj, options.depth);
        const double a0 = angle(rng);
        const double th = angle(rng);
        Vector u(2);
        u << std::cos(th), std::sin(th);

        const Vector d0 = projection_with(ifs, wi, id) - projection_with(ifs, wj, id);
        const Vector d1 = projection_with(ifs, wi, j90) - projection_with(ifs, wj, j90);
        const Vector at = std::cos(a0) * d0 + std::sin(a0) * d1;
        const Vector deriv = -std::sin(a0) * d0 + std::cos(a0) * d1;
        lo = std::min(lo, std::max(std::abs(u.dot(at)), std::abs(u.dot(deriv))));

        const Matrix gram = d0 * d0.transpose() + d1 * d1.transpose();
        const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues()[0];
        lo_prof = std::min(lo_prof, std::sqrt(std::max(0.0, lmin) / 2.0));
      }
      raw[b] = lo;
      profiled[b] = lo_prof;
    }
  });
  out.raw_min = *std::min_element(raw.begin(), raw.end());
  out.profiled_min = *std::min_element(profiled.begin(), profiled.end());
  out.delta_hat = std::max(0.0, out.raw_min - out.correction);
  return out;
}

double derivative_identity_residual(const AffineIFS& ifs, double alpha, const Word& w, double h) {
  if (ifs.dim() != 2) throw UnsupportedDimension("derivative_identity_residual: d must be 2");
  if (!(h > 0.0)) throw InvalidInput("derivative_identity_residual: h must be positive");
  const auto at = [&](double a) { return partial_projection(rotate_translations(ifs, a), w); };
  const Vector cd = (at(alpha + h) - at(alpha - h)) / (2.0 * h);
  return (cd - at(alpha + std::numbers::pi / 2)).norm();
}

TailEstimate transversality_tail(const AffineIFS& ifs, const Subspace& v, const Word& wi, const Word& wj,
                                 const std::vector<double>& t_grid, std::uint64_t samples, std::uint64_t seed) {
  const int d = ifs.dim();
  if (v.ambient() != d || !v.proper()) throw InvalidInput("transversality_tail: need a proper subspace");
  if (samples < 1) throw InvalidInput("transversality_tail: need samples >= 1");
  if (!wi.valid_for(ifs.branches()) || !wj.valid_for(ifs.branches()) || wi.empty() || wj.empty())
    throw InvalidInput("transversality_tail: invalid words");
  const Matrix bt = v.basis().transpose();

  const std::uint64_t batches = (samples + kBatch - 1) / kBatch;
  std::vector<std::vector<double>> dist(batches);
  parallel_for(static_cast<std::size_t>(batches), [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      Rng rng = make_rng(seed, b);
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      const std::uint64_t count = std::min(kBatch, samples - b * kBatch);
      for (std::uint64_t k = 0; k < count; ++k) {
        const Matrix g = d == 2 ? rotation(angle(rng)) : haar_orthogonal(d, rng);
        dist[b].push_back((bt * (projection_with(ifs, wi, g) - projection_with(ifs, wj, g))).norm());
      }
    }
  });

  std::vector<double> all;
  for (const auto& x : dist) all.insert(all.end(), x.begin(), x.end());
  std::sort(all.begin(), all.end());
  const Vector alpha = projected_singular_values(v, word_product(ifs.matrices(), common_prefix(wi, wj)));

  TailEstimate out;
  out.samples = samples;
  out.t = t_grid;
  std::sort(out.t.begin(), out.t.end());
  for (double t : out.t) {
    const auto below = std::lower_bound(all.begin(), all.end(), t) - all.begin();
    const double p = static_cast<double>(below) / static_cast<double>(all.size());
    double bound = 1.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) bound *= std::min(1.0, t / alpha[i]);
    out.p.push_back(p);
    out.bound.push_back(bound);
    out.c_hat.push_back(p / bound);
  }
  return out;
}

}  // namespace affdim
