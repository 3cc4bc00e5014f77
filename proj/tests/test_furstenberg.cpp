#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "affdim/furstenberg.hpp"
#include "support.hpp"

using namespace affdim;
using testing::fixture;

namespace {

LyapunovSpectrum spectrum_of(const AffineIFS& ifs, std::size_t steps = 50000) {
  LyapunovOptions o;
  o.steps = steps;
  o.trials = 4;
  o.seed = 77;
  return exponents_mc(ifs, ifs.bernoulli_measure(), o);
}

}  // namespace

TEST_CASE("property: orbit subspaces stay orthonormal") {
  Rng rng(61);
  const auto ifs = testing::random_contractive(3, 4, rng);
  for (int k = 1; k <= 3; ++k) {
    const auto orbit = grassmann_orbit(ifs, ifs.bernoulli_measure(), k, 2000, rng);
    REQUIRE(orbit.subspaces.size() == 2001);
    REQUIRE(orbit.factors.size() == 2000);
    for (const auto& v : orbit.subspaces) REQUIRE(v.is_orthonormal(1e-10));
  }
}

TEST_CASE("orbit factors reproduce the inverse action") {
  Rng rng(62);
  const auto ifs = fixture("f1.json");
  const auto orbit = grassmann_orbit(ifs, ifs.bernoulli_measure(), 1, 50, rng);
  for (std::size_t t = 0; t < 50; ++t) {
    const Matrix lhs = ifs.matrix(orbit.word[t]).inverse() * orbit.subspaces[t].basis();
    CHECK((lhs - orbit.subspaces[t + 1].basis() * orbit.factors[t]).norm() <= 1e-9 * lhs.norm());
  }
}

TEST_CASE("Furstenberg residual decays on the dominated pair") {
  const auto ifs = fixture("dominated.json");
  const auto chi = spectrum_of(ifs);
  Rng rng(63);
  const auto orbit = grassmann_orbit(ifs, ifs.bernoulli_measure(), 1, 10000, rng);
  const auto r = furstenberg_limit_residual(orbit, chi);
  REQUIRE(r.size() == 10000);
  CHECK(std::abs(r.back()) <= 0.02);
  CHECK(std::abs(r.back()) < std::abs(r[9]) + 1e-12);
}

TEST_CASE("svf exponent interpolates the partial sums") {
  LyapunovSpectrum chi;
  chi.chi = Vector(3);
  chi.chi << 1.0, 2.0, 4.0;
  CHECK(svf_exponent(chi, 0.0) == 0.0);
  CHECK(svf_exponent(chi, 1.0) == doctest::Approx(1.0));
  CHECK(svf_exponent(chi, 1.5) == doctest::Approx(2.0));
  CHECK(svf_exponent(chi, 2.25) == doctest::Approx(4.0));
}

TEST_CASE("projected svf limit on the dominated pair") {
  const auto ifs = fixture("dominated.json");
  const auto chi = spectrum_of(ifs);
  Rng rng(64);
  const Subspace v = random_subspace(2, 1, rng);
  const auto r = projected_svf_limit_residual(ifs, ifs.bernoulli_measure(), v, 1.0, 10000, chi, rng);
  CHECK(std::abs(r.back()) <= 0.02);
}

TEST_CASE("derivative identity holds to second order") {
  const auto ifs = fixture("f1.json");
  Rng rng(65);
  for (int t = 0; t < 20; ++t) {
    const Word w = testing::random_word(3, 30, rng);
    const double alpha = std::uniform_real_distribution<double>(0, 2 * M_PI)(rng);
    const double r1 = derivative_identity_residual(ifs, alpha, w, 1e-3);
    const double r2 = derivative_identity_residual(ifs, alpha, w, 5e-4);
    CHECK(r1 <= 1e-6);
    if (r1 > 1e-12) CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("transversality constant on the member fixture") {
  TransversalityOptions o;
  o.samples = 4000;
  o.seed = 5;
  const auto t = transversality_delta(fixture("f1.json"), o);
  CHECK(t.member);
  CHECK(t.delta_hat > 0.0);
  CHECK(t.raw_min >= t.delta_hat);
  CHECK(t.correction < 1e-15);
  CHECK(t.samples == 4000);
  const auto again = transversality_delta(fixture("f1.json"), o);
  CHECK(again.delta_hat == t.delta_hat);
}

TEST_CASE("property: transversality constant is invariant under orthogonal conjugation") {
  // u(A) with v corresponds to A with u(v); the constant is a minimum over
  // all rotations of v, so conjugating by a rotation leaves it alone.
  TransversalityOptions o;
  o.samples = 4000;
  o.seed = 6;
  const auto ifs = fixture("f1.json");
  const auto base = transversality_delta(ifs, o);
  const auto c = conjugate(ifs, rotation(0.8));
  const auto moved = transversality_delta(rotate_translations(c, -0.8), o);
  CHECK(moved.delta_hat == doctest::Approx(base.delta_hat).epsilon(0.2));
}

TEST_CASE("transversality tail bound") {
  const auto ifs = fixture("f1.json");
  Matrix e1(2, 1);
  e1 << 1, 0;
  const std::vector<double> grid{1e-3, 1e-2, 1e-1};
  const auto tail = transversality_tail(ifs, Subspace(e1), Word({0, 1}), Word({1, 2}), grid, 20000, 3);
  REQUIRE(tail.p.size() == 3);
  CHECK(tail.p[0] <= tail.p[1]);
  CHECK(tail.p[1] <= tail.p[2]);
  for (std::size_t i = 0; i < 3; ++i) CHECK(tail.p[i] <= 1.0);
  CHECK(tail.samples == 20000);
}

TEST_CASE("d = 2 diagnostics refuse other dimensions") {
  Rng rng(66);
  const auto ifs = testing::random_contractive(3, 3, rng);
  CHECK_THROWS_AS(transversality_delta(ifs), UnsupportedDimension);
  CHECK_THROWS_AS(pinching_twisting_search(ifs, 3), UnsupportedDimension);
}
