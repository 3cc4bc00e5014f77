#include "affdim/ifs.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace affdim {

AffineIFS::AffineIFS(std::vector<Matrix> matrices, std::vector<Vector> translations,
                     std::optional<std::vector<double>> weights)
    : matrices_(std::move(matrices)), translations_(std::move(translations)), weights_(std::move(weights)) {
  if (matrices_.size() < 2) throw InvalidInput("AffineIFS: need at least two maps");
  if (matrices_.size() != translations_.size()) throw InvalidInput("AffineIFS: matrix/translation count mismatch");
  const auto d = matrices_.front().rows();
  if (d < 1) throw InvalidInput("AffineIFS: dimension must be positive");

  norm_ = 0.0;
  mininorm_ = std::numeric_limits<double>::infinity();
  translation_norm_ = 0.0;
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const auto& a = matrices_[i];
    const auto& v = translations_[i];
    if (a.rows() != d || a.cols() != d) throw InvalidInput("AffineIFS: map " + std::to_string(i + 1) + " is not d x d");
    if (v.size() != d) throw InvalidInput("AffineIFS: translation " + std::to_string(i + 1) + " has wrong length");
    if (!v.allFinite()) throw InvalidInput("AffineIFS: non-finite translation");
    auto spec = singular_values(a);
    if (spec.near_singular) throw InvalidInput("AffineIFS: matrix " + std::to_string(i + 1) + " is singular");
    norm_ = std::max(norm_, spec.norm());
    mininorm_ = std::min(mininorm_, spec.mininorm());
    translation_norm_ = std::max(translation_norm_, v.norm());
    spectra_.push_back(std::move(spec));
  }

  if (weights_) {
    const auto& p = *weights_;
    if (p.size() != matrices_.size()) throw InvalidInput("AffineIFS: weight count mismatch");
    double total = 0.0;
    for (double w : p) {
      if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("AffineIFS: weights must be strictly positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("AffineIFS: weights must sum to 1");
  }
}

std::vector<double> AffineIFS::weights_or_uniform() const {
  if (weights_) return *weights_;
  return std::vector<double>(matrices_.size(), 1.0 / static_cast<double>(matrices_.size()));
}

double AffineIFS::radius_bound() const {
  require_contractive(*this, "radius_bound");
  return translation_norm_ / (1.0 - norm_);
}

AffineIFS AffineIFS::with_weights(std::optional<std::vector<double>> weights) const {
  return AffineIFS(matrices_, translations_, std::move(weights));
}

AffineIFS AffineIFS::with_translations(std::vector<Vector> translations) const {
  return AffineIFS(matrices_, std::move(translations), weights_);
}

void require_contractive(const AffineIFS& ifs, const char* where) {
  if (!ifs.contractive())
    throw PreconditionError(std::string(where) + ": system is not contractive (||A|| = " + std::to_string(ifs.norm()) + ")");
}

std::size_t projection_depth(const AffineIFS& ifs, double tol) {
  require_contractive(ifs, "projection_depth");
  if (!(tol > 0.0)) throw InvalidInput("projection_depth: tol must be positive");
  const double vnorm = ifs.translation_norm();
  const double a = ifs.norm();
  if (vnorm == 0.0 || a == 0.0) return 1;
  const double ratio = tol * (1.0 - a) / vnorm;
  if (ratio >= 1.0) return 1;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(ratio) / std::log(a))));
}

double tail_bound(const AffineIFS& ifs, std::size_t n) {
  return std::pow(ifs.norm(), static_cast<double>(n)) * ifs.radius_bound();
}

Vector partial_projection(const AffineIFS& ifs, const Word& w) {
  const auto d = ifs.dim();
  Vector x = Vector::Zero(d);
  Matrix prefix = Matrix::Identity(d, d);
  for (int s : w.symbols()) {
    if (s < 0 || s >= ifs.branches()) throw InvalidInput("natural_projection: symbol out of range");
    x.noalias() += prefix * ifs.translation(s);
    prefix = prefix * ifs.matrix(s);
  }
  return x;
}

Vector natural_projection(const AffineIFS& ifs, const Word& w, double tol) {
  if (w.empty()) throw InvalidInput("natural_projection: empty word");
  const std::size_t depth = projection_depth(ifs, tol);
  return partial_projection(ifs, w.prefix(depth));
}

Vector fixed_point(const AffineIFS& ifs, int i) {
  const auto d = ifs.dim();
  return (Matrix::Identity(d, d) - ifs.matrix(i)).partialPivLu().solve(ifs.translation(i));
}

std::vector<std::pair<int, int>> duplicate_translations(const AffineIFS& ifs) {
  const double tol = 1e-12 * std::max(1.0, ifs.translation_norm());
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < ifs.branches(); ++i)
    for (int j = i + 1; j < ifs.branches(); ++j)
      if ((ifs.translation(i) - ifs.translation(j)).norm() < tol) out.emplace_back(i, j);
  return out;
}

double membership_threshold(int d) {
  if (d < 2) throw UnsupportedDimension("membership condition is defined for d >= 2 only");
  return d == 2 ? kPlanarThreshold : kHigherDimThreshold;
}

ConditionReport membership_margin(const AffineIFS& ifs) {
  ConditionReport report;
  report.threshold_used = membership_threshold(ifs.dim());
  report.contractive = ifs.contractive();
  require_contractive(ifs, "membership_margin");
  report.duplicates = duplicate_translations(ifs);
  if (!report.defined()) return report;

  const double radius = ifs.radius_bound();
  double worst = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ifs.branches(); ++i) {
    for (int j = 0; j < ifs.branches(); ++j) {
      if (i == j) continue;
      const double dist = (ifs.translation(i) - ifs.translation(j)).norm();
      const double norms = ifs.spectrum(i).norm() + ifs.spectrum(j).norm();
      worst = std::max(worst, norms / dist * radius);
      gap = std::min(gap, dist - norms * radius);
    }
  }
  report.max_ratio = worst;
  report.membership_margin = report.threshold_used - worst;
  report.ssc_gap = gap;
  return report;
}

double ssc_certificate(const AffineIFS& ifs) {
  require_contractive(ifs, "ssc_certificate");
  const auto dups = duplicate_translations(ifs);
  if (!dups.empty())
    throw PreconditionError("ssc_certificate: translations " + std::to_string(dups.front().first + 1) + " and " +
                            std::to_string(dups.front().second + 1) + " coincide");
  const double radius = ifs.radius_bound();
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ifs.branches(); ++i)
    for (int j = i + 1; j < ifs.branches(); ++j) {
      const double dist = (ifs.translation(i) - ifs.translation(j)).norm();
      gap = std::min(gap, dist - (ifs.spectrum(i).norm() + ifs.spectrum(j).norm()) * radius);
    }
  return gap;
}

AffineIFS conjugate(const AffineIFS& ifs, const Matrix& u) {
  if (u.rows() != ifs.dim() || u.cols() != ifs.dim()) throw InvalidInput("conjugate: dimension mismatch");
  Eigen::PartialPivLU<Matrix> lu(u);
  if (singular_values(u).near_singular) throw PreconditionError("conjugate: u is singular");
  std::vector<Matrix> mats;
  mats.reserve(ifs.matrices().size());
  for (const auto& a : ifs.matrices()) mats.push_back(lu.solve(a * u));
  return AffineIFS(std::move(mats), ifs.translations(), ifs.weights());
}

AffineIFS transform_translations(const AffineIFS& ifs, const Matrix& u) {
  if (u.rows() != ifs.dim() || u.cols() != ifs.dim()) throw InvalidInput("transform_translations: dimension mismatch");
  std::vector<Vector> vs;
  vs.reserve(ifs.translations().size());
  for (const auto& v : ifs.translations()) vs.push_back(u * v);
  return ifs.with_translations(std::move(vs));
}

AffineIFS rotate_translations(const AffineIFS& ifs, double angle) {
  if (ifs.dim() != 2) throw UnsupportedDimension("rotate_translations: d must be 2");
  return transform_translations(ifs, rotation(angle));
}

}  // namespace affdim
