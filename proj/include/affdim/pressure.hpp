#pragma once

// Singular value function, finite-level singular value pressure, and the
// affinity dimension bracket.

#include <cstdint>
#include <optional>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"
#include "affdim/lyapunov.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

inline constexpr std::uint64_t kPressureLimit = std::uint64_t{1} << 24;

// log phi^s from log singular values in nonincreasing order. At integer s the
// floor branch is used; both branches agree there.
template <typename Derived>
double log_svf(const Eigen::MatrixBase<Derived>& log_alpha, double s) {
  const auto d = static_cast<int>(log_alpha.size());
  if (!(s >= 0.0)) throw InvalidInput("svf: s must be nonnegative");
  if (s > d) return s / d * log_alpha.sum();
  const int fl = static_cast<int>(std::floor(s));
  double out = log_alpha.head(fl).sum();
  const double frac = s - fl;
  if (frac > 0.0) out += frac * log_alpha[fl];
  return out;
}

template <typename Scalar>
Scalar svf(const SingularSpectrum<Scalar>& spectrum, Scalar s) {
  if (spectrum.near_singular) throw PreconditionError("svf: singular matrix");
  return std::exp(log_svf(spectrum.values.array().log().matrix(), static_cast<double>(s)));
}

template <typename Derived>
typename Derived::Scalar svf(const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar s) {
  return svf(singular_values(a), s);
}

// log sum exp(t_k), evaluated with a fixed pairwise tree so the result does
// not depend on how the terms were produced.
double log_sum_exp(const std::vector<double>& terms);

// Log singular values of every A_w, |w| = n, in lexicographic word order.
class LevelSpectra {
 public:
  LevelSpectra(const AffineIFS& ifs, int n, std::uint64_t limit = kPressureLimit);

  int level() const { return n_; }
  int dim() const { return d_; }
  std::size_t words() const { return count_; }
  // Row w holds log alpha_1(A_w) >= ... >= log alpha_d(A_w).
  Eigen::Map<const Vector> log_alpha(std::size_t w) const {
    return Eigen::Map<const Vector>(table_.data() + w * static_cast<std::size_t>(d_), d_);
  }

  // a_n(s) = log sum_w phi^s(A_w).
  double log_pressure_sum(double s) const;
  // Same sum restricted to the given word indices.
  double log_pressure_sum(double s, const std::vector<std::size_t>& subset) const;

 private:
  int n_;
  int d_;
  std::size_t count_;
  std::vector<double> table_;
};

// a_n = log sum_{|w| = n} phi^s(A_w), exhaustive. Throws ResourceError when
// N^n exceeds `limit`.
double pressure_sum(const AffineIFS& ifs, double s, int n, std::uint64_t limit = kPressureLimit);

struct PressureEstimate {
  double s = 0.0;
  int n = 0;
  double a_n = 0.0;
  double upper = 0.0;  // a_n / n, >= P(s)
  double slope = 0.0;  // a_n - a_{n-1}
};

PressureEstimate pressure_estimate(const AffineIFS& ifs, double s, int n, std::uint64_t limit = kPressureLimit);

struct AffinityOptions {
  double tol = 1e-9;
  int max_iterations = 200;
  std::uint64_t limit = kPressureLimit;
};

// s_n: root of a_n(s) = 0 capped at d. Bisection returns the upper end of
// the final bracket, so a_n(s_n) <= 0 and s_n >= dim_aff.
double affinity_upper(const AffineIFS& ifs, int n, const AffinityOptions& options = {});
double affinity_upper(const LevelSpectra& spectra, const AffinityOptions& options = {});

struct SubsystemMeasure {
  double s = 0.0;
  StepMeasure measure;
  // |Gamma| = 1: phi^0 = 1 already, so s = 0 and the measure is a point mass.
  bool degenerate = false;
};

// Step-n Bernoulli measure with weights phi^s(A_w), w in Gamma, where s solves
// sum_Gamma phi^s(A_w) = 1. std::nullopt means Gamma = Sigma_n.
SubsystemMeasure subsystem_measure(const AffineIFS& ifs, int n, const std::optional<std::vector<Word>>& gamma,
                                   const AffinityOptions& options = {});

struct QuasiMultiplicativity {
  double s = 0.0;
  int n = 0;
  double c_lower = 0.0;   // min over pairs of phi(A_i) phi(A_j) / phi(A_ij)
  double c_defect = 0.0;  // max over pairs of the same ratio
  std::uint64_t pairs = 0;
  bool sampled = false;
};

struct QuasiMultiplicativityOptions {
  std::uint64_t pair_budget = std::uint64_t{1} << 22;
  std::uint64_t samples = std::uint64_t{1} << 16;  // used once the budget is exceeded
  std::uint64_t seed = 0;
};

QuasiMultiplicativity quasi_multiplicativity_diagnostic(const AffineIFS& ifs, double s, int n,
                                                        const QuasiMultiplicativityOptions& options = {});

struct DimensionBracket {
  int n = 0;
  double upper = 0.0;           // s_n
  double lower = 0.0;           // dim_L of the level-n subsystem measure
  double lower_std_error = 0.0;    // propagated from the exponent errors
  double subsystem_s = 0.0;
  double entropy = 0.0;
  LyapunovSpectrum spectrum;

  double midpoint() const { return 0.5 * (lower + upper); }
};

// Upper end from affinity_upper, lower end from the Lyapunov dimension of the
// full-support step-n measure with weights phi^{s_n}(A_w).
DimensionBracket dimension_bracket(const AffineIFS& ifs, int n, const LyapunovOptions& lyapunov,
                                   const AffinityOptions& options = {});

}  // namespace affdim
