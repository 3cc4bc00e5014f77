#pragma once

// Affine iterated function systems x -> A_i x + v_i, their natural
// projection, and the explicit separation conditions on (A, v).

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "affdim/linalg.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

class AffineIFS {
 public:
  // Throws InvalidInput on shape mismatches, non-finite entries, singular
  // matrices or weights that are not a strictly positive probability vector.
  AffineIFS(std::vector<Matrix> matrices, std::vector<Vector> translations,
            std::optional<std::vector<double>> weights = std::nullopt);

  int dim() const { return static_cast<int>(matrices_.front().rows()); }
  int branches() const { return static_cast<int>(matrices_.size()); }

  const std::vector<Matrix>& matrices() const { return matrices_; }
  const std::vector<Vector>& translations() const { return translations_; }
  const std::optional<std::vector<double>>& weights() const { return weights_; }
  std::vector<double> weights_or_uniform() const;

  const Matrix& matrix(int i) const { return matrices_[static_cast<std::size_t>(i)]; }
  const Vector& translation(int i) const { return translations_[static_cast<std::size_t>(i)]; }
  const SingularSpectrum<double>& spectrum(int i) const { return spectra_[static_cast<std::size_t>(i)]; }

  // ||A|| = max_i alpha_1(A_i)
  double norm() const { return norm_; }
  // m(A) = min_i alpha_d(A_i)
  double mininorm() const { return mininorm_; }
  // ||v|| = max_i |v_i|
  double translation_norm() const { return translation_norm_; }
  bool contractive() const { return norm_ < 1.0; }

  // ||v|| / (1 - ||A||): every projected point lies in this ball.
  double radius_bound() const;

  StepMeasure bernoulli_measure() const { return StepMeasure::bernoulli(weights_or_uniform()); }

  AffineIFS with_weights(std::optional<std::vector<double>> weights) const;
  AffineIFS with_translations(std::vector<Vector> translations) const;

 private:
  std::vector<Matrix> matrices_;
  std::vector<Vector> translations_;
  std::optional<std::vector<double>> weights_;
  std::vector<SingularSpectrum<double>> spectra_;
  double norm_ = 0.0;
  double mininorm_ = 0.0;
  double translation_norm_ = 0.0;
};

void require_contractive(const AffineIFS& ifs, const char* where);

// Truncation length n* guaranteeing ||A||^{n*} ||v|| / (1 - ||A||) <= tol.
std::size_t projection_depth(const AffineIFS& ifs, double tol);

// ||A||^n ||v|| / (1 - ||A||), the distance from pi_n(w) to pi(w . anything).
double tail_bound(const AffineIFS& ifs, std::size_t n);

// sum_{k=1}^{|w|} A_{w|k-1} v_{w_k}, the finite partial sum of the natural
// projection over the whole word.
Vector partial_projection(const AffineIFS& ifs, const Word& w);

// pi(w) truncated at min(|w|, n*); within tol of pi(w . anything) whenever
// |w| >= n*.
Vector natural_projection(const AffineIFS& ifs, const Word& w, double tol);

// Fixed point of f_i, i.e. pi(i i i ...).
Vector fixed_point(const AffineIFS& ifs, int i);

// Pairs (i, j), i < j (0-based), with |v_i - v_j| < 1e-12 max(1, ||v||).
std::vector<std::pair<int, int>> duplicate_translations(const AffineIFS& ifs);

inline constexpr double kPlanarThreshold = 0.70710678118654752440;       // sqrt(2)/2
inline constexpr double kHigherDimThreshold = 0.15470053837925152902;    // 2/sqrt(3) - 1

double membership_threshold(int d);

struct ConditionReport {
  // max_{i != j} (||A_i|| + ||A_j||) / |v_i - v_j| * ||v|| / (1 - ||A||)
  double max_ratio = std::numeric_limits<double>::quiet_NaN();
  // threshold - max_ratio; positive iff the tuple is a member.
  double membership_margin = std::numeric_limits<double>::quiet_NaN();
  double threshold_used = std::numeric_limits<double>::quiet_NaN();
  // min_{i != j} |v_i - v_j| - (||A_i|| + ||A_j||) ||v|| / (1 - ||A||)
  double ssc_gap = std::numeric_limits<double>::quiet_NaN();
  bool contractive = false;
  std::vector<std::pair<int, int>> duplicates;

  bool defined() const { return duplicates.empty(); }
  bool member() const { return defined() && max_ratio > 0.0 && membership_margin > 0.0; }
  bool ssc_certified() const { return defined() && ssc_gap > 0.0; }
};

// Evaluates the explicit membership condition (threshold sqrt(2)/2 for d = 2,
// 2/sqrt(3) - 1 for d >= 3) together with the separation gap. Duplicate
// translations leave the margin undefined (NaN) and are listed in the report.
// Throws PreconditionError when ||A|| >= 1 and UnsupportedDimension for d = 1.
ConditionReport membership_margin(const AffineIFS& ifs);

// Strong-separation gap; positive values certify SSC of (A, G(v)) for every
// orthogonal G. Throws PreconditionError on duplicate translations.
double ssc_certificate(const AffineIFS& ifs);

// (u^{-1} A_i u, v_i): the u(A) form.
AffineIFS conjugate(const AffineIFS& ifs, const Matrix& u);

// (A_i, u v_i): the u(v) form.
AffineIFS transform_translations(const AffineIFS& ifs, const Matrix& u);

// d = 2: translations rotated by `angle`, i.e. (A, u_angle(v)).
AffineIFS rotate_translations(const AffineIFS& ifs, double angle);

}  // namespace affdim
