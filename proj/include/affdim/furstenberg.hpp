#pragma once

// Grassmannian orbits of the inverse cocycle, numerical checks of the
// Furstenberg-type limits, and transversality diagnostics.

#include <cstdint>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"
#include "affdim/lyapunov.hpp"
#include "affdim/random.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

// V_0 Haar-random, V_{t+1} = A_{i_t}^{-1} V_t. factors[t] is the k x k
// triangular R with A_{i_t}^{-1} basis(V_t) = basis(V_{t+1}) R.
struct OrbitSample {
  int k = 0;
  Word word;
  std::vector<Subspace> subspaces;  // steps + 1 entries
  std::vector<Matrix> factors;      // steps entries
};

OrbitSample grassmann_orbit(const AffineIFS& ifs, const StepMeasure& m, int k, std::size_t steps, Rng& rng);

// r_n = (1/n) log m(A_{i_{s+n-1}}^{-1} ... A_{i_s}^{-1} | V_s) - chi_{d-k+1} for
// n = 1 .. steps - s, where s = start. Exact for k = 1; for k >= 2 the
// co-norm is read off the sorted accumulated log diagonals.
std::vector<double> furstenberg_limit_residual(const OrbitSample& orbit, const LyapunovSpectrum& chi,
                                               std::size_t start = 0);

// Sum_{j <= floor s} chi_j + (s - floor s) chi_{ceil s}.
double svf_exponent(const LyapunovSpectrum& chi, double s);

// residual_n = -(1/n) log phi^s(P_{V^perp} A_{i|n}) - svf_exponent(chi, s) for
// n = 1 .. steps along a fresh word drawn from m. V has dimension d - k and
// 0 <= s <= k.
std::vector<double> projected_svf_limit_residual(const AffineIFS& ifs, const StepMeasure& m, const Subspace& v,
                                                 double s, std::size_t steps, const LyapunovSpectrum& chi, Rng& rng);

struct TransversalityOptions {
  std::uint64_t samples = 10000;
  std::size_t depth = 40;
  std::uint64_t seed = 0;
};

struct TransversalityDelta {
  double delta_hat = 0.0;   // max(0, raw_min - correction)
  double raw_min = 0.0;
  double correction = 0.0;  // 2 ||A||^depth ||v|| / (1 - ||A||)
  // Same minimum with alpha and v optimized exactly for each sampled pair.
  double profiled_min = 0.0;
  std::uint64_t samples = 0;
  std::size_t depth = 0;
  bool member = false;  // false: delta_hat may legitimately be 0
};

// d = 2. Sampled pairs i, j with distinct first symbols and periodic tails.
TransversalityDelta transversality_delta(const AffineIFS& ifs, const TransversalityOptions& options = {});

// |central difference_h of pi_alpha(w) - pi_{alpha + pi/2}(w)|, d = 2.
double derivative_identity_residual(const AffineIFS& ifs, double alpha, const Word& w, double h);

struct TailEstimate {
  std::vector<double> t;
  std::vector<double> p;      // fraction of G with |P_V(pi_G(i) - pi_G(j))| < t
  std::vector<double> bound;  // prod_i min{1, t / alpha_i(P_V A_{i^j})}
  std::vector<double> c_hat;  // p / bound
  std::uint64_t samples = 0;
};

// G uniform on rotations for d = 2, Haar on O(d) otherwise.
TailEstimate transversality_tail(const AffineIFS& ifs, const Subspace& v, const Word& wi, const Word& wj,
                                 const std::vector<double>& t_grid, std::uint64_t samples, std::uint64_t seed);

}  // namespace affdim
