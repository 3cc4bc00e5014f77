#pragma once

// Point clouds on self-affine sets and measures, box-counting and
// correlation dimension, CSV/PPM export.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"

namespace affdim {

struct PointCloud {
  int d = 0;
  Matrix points;  // d x count, one column per point
  std::optional<std::vector<double>> weights;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  // max |x| over the cloud.
  double radius() const;
};

// f_w(x_1) for every |w| = depth, x_1 the fixed point of f_1, in
// lexicographic order. Carries cylinder masses when the system has weights.
PointCloud generate_exhaustive(const AffineIFS& ifs, int depth, std::uint64_t limit = std::uint64_t{1} << 24);

// `count` i.i.d. points pi(w), w ~ nu_p truncated at `depth`.
PointCloud generate_random(const AffineIFS& ifs, std::size_t count, std::size_t depth, std::uint64_t seed);

// Distinct boxes floor((x - offset) / delta) met by the cloud.
std::uint64_t box_count(const PointCloud& cloud, double delta, double offset = 0.0);

// Median nearest-neighbour distance, estimated from at most `queries` evenly
// strided query points against the full cloud.
double median_nn_spacing(const PointCloud& cloud, std::size_t queries = 2000);

// R 2^-m for m = m_min .. m_max.
std::vector<double> dyadic_scales(double radius, int m_min, int m_max);

struct WindowPolicy {
  double min_spacing_factor = 10.0;  // delta >= factor * median NN spacing
  double max_fraction = 0.25;        // delta <= fraction * R
  std::optional<double> radius;      // R; defaults to the cloud radius
};

struct BoxCountCurve {
  std::vector<double> scales;  // decreasing
  std::vector<std::uint64_t> counts;
  std::size_t fit_begin = 0, fit_end = 0;  // half-open index window into scales
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double nn_spacing = 0.0;
};

// Throws DegenerateFit with fewer than 4 scales inside the window.
BoxCountCurve box_dimension(const PointCloud& cloud, std::vector<double> scales, const WindowPolicy& policy = {});

struct CorrelationCurve {
  std::vector<double> radii;
  std::vector<double> fractions;  // C(r)
  std::size_t used_points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool proxy = true;
};

// C(r) over pairs of an evenly strided subsample of at most max_points.
CorrelationCurve correlation_dimension(const PointCloud& cloud, std::vector<double> radii,
                                       std::size_t max_points = 20000);

struct LocalDimensionHistogram {
  double r_small = 0.0;
  double r_large = 0.0;
  std::vector<double> edges;           // bins + 1 entries spanning [0, d]
  std::vector<std::uint64_t> counts;   // estimates outside [0, d] go to the end bins
  double mean = 0.0;
  double median = 0.0;
  std::size_t used_points = 0;
  std::size_t queries = 0;  // query points with a neighbour inside r_small
};
// Per query point x: log(n(x, r_large) / n(x, r_small)) / log(r_large / r_small),
// n(x, r) counting other subsample points within r of x. Noisier than the
// correlation slope at the same point budget.
LocalDimensionHistogram local_dimension_histogram(const PointCloud& cloud, double r_small, double r_large, int bins = 20,
                                                  std::size_t max_points = 20000, std::size_t queries = 2000);

// One row per point, x_1..x_d[,weight], 17 significant digits.
void write_csv(std::ostream& out, const PointCloud& cloud);

// Binary P6, white background, black points, row-major from the top-left.
// Uses the first two coordinates (d = 1 plots along a horizontal line).
std::string render_ppm(const PointCloud& cloud, int width, int height);

}  // namespace affdim
