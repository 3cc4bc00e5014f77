#pragma once

// Lyapunov exponents of matrix cocycles driven by (step-n) Bernoulli
// measures, Lyapunov dimension, domination and pinching/twisting.

#include <cstdint>
#include <optional>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

struct LyapunovOptions {
  std::size_t steps = 100000;  // symbols per trial after burn-in
  std::size_t trials = 8;
  std::uint64_t seed = 0;
  std::size_t burn_in = 100;
  int reorthogonalize_every = 8;
};

struct LyapunovSpectrum {
  Vector chi;     // chi_1 <= ... <= chi_d, nats per symbol
  Vector std_error;  // per exponent
  double sum_std_error = 0.0;
  std::size_t steps = 0;  // total symbols consumed over all trials
  std::size_t trials = 0;
};

// QR cocycle estimate. With a single trial the standard errors come from
// batch means inside the trial instead of the across-trial spread.
LyapunovSpectrum exponents_mc(const AffineIFS& ifs, const StepMeasure& m, const LyapunovOptions& options);

// min over k of k + (h - sum_{j<=k} chi_j) / chi_{k+1}, capped at d.
double lyapunov_dimension(double h, const Vector& chi, int d);
double lyapunov_dimension(double h, const LyapunovSpectrum& chi, int d);

enum class GapClass { dominated, undominated, inconclusive };
const char* to_string(GapClass c);

struct GapReport {
  int gap = 1;  // ratio alpha_{gap+1} / alpha_gap
  GapClass classification = GapClass::inconclusive;
  double decay_rate = 0.0;  // fitted slope of log max-ratio against n
  double r2 = 0.0;
  double min_ratio = 0.0;   // over all levels
  std::vector<double> max_ratio_by_level;  // index n - 1
  std::vector<double> min_ratio_by_level;
};

struct DominationReport {
  int n_max = 0;
  bool sampled = false;
  std::uint64_t words_examined = 0;
  std::vector<GapReport> gaps;

  bool all_dominated() const;
};

struct DominationOptions {
  bool exhaustive = true;
  std::uint64_t samples = 4096;  // per level in sampled mode
  std::uint64_t seed = 0;
  double epsilon = 0.01;
  double min_r2 = 0.9;
  std::uint64_t limit = std::uint64_t{1} << 24;
};

DominationReport domination_test(const AffineIFS& ifs, int n_max, const DominationOptions& options = {});

struct PinchingTwisting {
  std::optional<Word> pinching;
  std::optional<Word> twisting;
  std::uint64_t words_examined = 0;
};

// d = 2 only. Breadth-first over words up to max_len. The twisting witness is
// reported relative to the returned pinching word.
PinchingTwisting pinching_twisting_search(const AffineIFS& ifs, int max_len);

}  // namespace affdim
