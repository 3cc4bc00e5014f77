#pragma once

// Seeded generators and fixture access shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "affdim/cli.hpp"
#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"
#include "affdim/random.hpp"

#ifndef AFFDIM_FIXTURE_DIR
#define AFFDIM_FIXTURE_DIR "fixtures"
#endif

namespace testing {

using affdim::Matrix;
using affdim::Rng;
using affdim::Vector;

inline std::string fixture_path(const std::string& name) { return std::string(AFFDIM_FIXTURE_DIR) + "/" + name; }

inline affdim::AffineIFS fixture(const std::string& name) {
  return affdim::cli::read_spec_file(fixture_path(name)).ifs;
}

inline Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

// Gaussian matrix conditioned to have alpha_d / alpha_1 >= min_ratio.
inline Matrix well_conditioned(int d, Rng& rng, double min_ratio = 0.05) {
  while (true) {
    Matrix m = gaussian_matrix(d, d, rng);
    const auto sv = affdim::singular_values(m);
    if (sv.mininorm() >= min_ratio * sv.norm()) return m;
  }
}

inline Vector gaussian_vector(int d, Rng& rng) { return gaussian_matrix(d, 1, rng).col(0); }

// N maps with operator norms drawn from [lo, hi] and Gaussian translations.
inline affdim::AffineIFS random_contractive(int branches, int d, Rng& rng, double lo = 0.2, double hi = 0.6) {
  std::uniform_real_distribution<double> norm(lo, hi);
  std::vector<Matrix> mats;
  std::vector<Vector> trans;
  for (int i = 0; i < branches; ++i) {
    Matrix m = well_conditioned(d, rng, 0.1);
    m *= norm(rng) / affdim::operator_norm(m);
    mats.push_back(m);
    trans.push_back(gaussian_vector(d, rng));
  }
  return affdim::AffineIFS(std::move(mats), std::move(trans));
}

inline affdim::Word random_word(int branches, std::size_t length, Rng& rng) {
  std::uniform_int_distribution<int> symbol(0, branches - 1);
  std::vector<int> s(length);
  for (auto& x : s) x = symbol(rng);
  return affdim::Word(std::move(s));
}

inline bool rel_close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

// Equilateral unit-circle translations, three maps a * R(k * 2pi/3 + twist).
inline affdim::AffineIFS equilateral(double a, double twist = 0.37) {
  std::vector<Matrix> mats;
  std::vector<Vector> trans;
  for (int k = 0; k < 3; ++k) {
    const double t = M_PI / 2 + 2 * M_PI * k / 3;
    Vector v(2);
    v << std::cos(t), std::sin(t);
    trans.push_back(v);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = a;
    d(1, 1) = 0.4 * a;
    mats.push_back(affdim::rotation(twist * (k + 1)) * d * affdim::rotation(-0.9 * k));
  }
  return affdim::AffineIFS(std::move(mats), std::move(trans));
}

}  // namespace testing
