#include "affdim/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "affdim/parallel.hpp"
#include "affdim/random.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

double PointCloud::radius() const {
  if (points.cols() == 0) return 0.0;
  return points.colwise().norm().maxCoeff();
}

PointCloud generate_exhaustive(const AffineIFS& ifs, int depth, std::uint64_t limit) {
  require_contractive(ifs, "generate_exhaustive");
  if (depth < 0) throw InvalidInput("generate_exhaustive: negative depth");
  const int d = ifs.dim();
  const int branches = ifs.branches();
  word_count(branches, depth, limit);

  Matrix level = fixed_point(ifs, 0);
  std::vector<double> mass{1.0};
  const auto p = ifs.weights_or_uniform();
  // Points of level n are f_i applied to level n - 1, with the outermost map
  // giving the first symbol; block i then holds the words starting with i.
  for (int n = 0; n < depth; ++n) {
    const Eigen::Index prev = level.cols();
    Matrix next(d, prev * branches);
    std::vector<double> next_mass(static_cast<std::size_t>(prev * branches));
    for (int i = 0; i < branches; ++i) {
      next.middleCols(i * prev, prev) = (ifs.matrix(i) * level).colwise() + ifs.translation(i);
      for (Eigen::Index k = 0; k < prev; ++k)
        next_mass[static_cast<std::size_t>(i * prev + k)] = p[static_cast<std::size_t>(i)] * mass[static_cast<std::size_t>(k)];
    }
    level = std::move(next);
    mass = std::move(next_mass);
  }

  PointCloud cloud;
  cloud.d = d;
  cloud.points = std::move(level);
  if (ifs.weights()) cloud.weights = std::move(mass);
  return cloud;
}

PointCloud generate_random(const AffineIFS& ifs, std::size_t count, std::size_t depth, std::uint64_t seed) {
  require_contractive(ifs, "generate_random");
  if (count < 1) throw InvalidInput("generate_random: empty point cloud requested");
  if (depth < 1) throw InvalidInput("generate_random: depth must be >= 1");
  const int d = ifs.dim();
  const StepMeasure nu = ifs.bernoulli_measure();

  PointCloud cloud;
  cloud.d = d;
  cloud.points.resize(d, static_cast<Eigen::Index>(count));
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (count + chunk - 1) / chunk;
  parallel_for(chunks, [&](std::size_t begin, std::size_t end) {
    Vector x(d);
    for (std::size_t c = begin; c < end; ++c) {
      Rng rng = make_rng(seed, c);
      for (std::size_t k = c * chunk; k < std::min(count, (c + 1) * chunk); ++k) {
        const auto symbols = nu.sample_blocks(depth, rng);
        // pi_depth(w) = f_{w_1}(f_{w_2}(... f_{w_depth}(0))).
        x.setZero();
        for (auto it = symbols.rbegin(); it != symbols.rend(); ++it) {
          const int i = static_cast<int>(*it);
          x = ifs.matrix(i) * x + ifs.translation(i);
        }
        cloud.points.col(static_cast<Eigen::Index>(k)) = x;
      }
    }
  });
  return cloud;
}

std::uint64_t box_count(const PointCloud& cloud, double delta, double offset) {
  if (!(delta > 0.0)) throw InvalidInput("box_count: scale must be positive");
  const std::size_t count = cloud.size();
  if (count == 0) return 0;
  const int d = cloud.d;
  std::vector<std::int64_t> cells(count * static_cast<std::size_t>(d));
  std::vector<std::int64_t> lo(static_cast<std::size_t>(d), std::numeric_limits<std::int64_t>::max());
  std::vector<std::int64_t> hi(static_cast<std::size_t>(d), std::numeric_limits<std::int64_t>::min());
  for (std::size_t k = 0; k < count; ++k)
    for (int j = 0; j < d; ++j) {
      const double f = std::floor((cloud.points(j, static_cast<Eigen::Index>(k)) - offset) / delta);
      if (!(std::abs(f) < 4e18)) throw InvalidInput("box_count: scale too small for the cloud extent");
      const auto c = static_cast<std::int64_t>(f);
      cells[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] = c;
      lo[static_cast<std::size_t>(j)] = std::min(lo[static_cast<std::size_t>(j)], c);
      hi[static_cast<std::size_t>(j)] = std::max(hi[static_cast<std::size_t>(j)], c);
    }

  int bits = 0;
  std::vector<int> width(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const auto range = static_cast<std::uint64_t>(hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)]);
    int w = 1;
    while (w < 64 && (range >> w) != 0) ++w;
    width[static_cast<std::size_t>(j)] = w;
    bits += w;
  }

  if (bits <= 64) {
    std::vector<std::uint64_t> keys(count);
    for (std::size_t k = 0; k < count; ++k) {
      std::uint64_t key = 0;
      for (int j = 0; j < d; ++j) {
        const auto off = static_cast<std::uint64_t>(cells[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] -
                                                    lo[static_cast<std::size_t>(j)]);
        key = (width[static_cast<std::size_t>(j)] == 64 ? 0 : key << width[static_cast<std::size_t>(j)]) | off;
      }
      keys[k] = key;
    }
    std::sort(keys.begin(), keys.end());
    return static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  const auto cell = [&](std::size_t k) { return cells.begin() + static_cast<std::ptrdiff_t>(k * static_cast<std::size_t>(d)); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(cell(a), cell(a) + d, cell(b), cell(b) + d);
  });
  std::uint64_t distinct = 1;
  for (std::size_t k = 1; k < count; ++k)
    if (!std::equal(cell(order[k]), cell(order[k]) + d, cell(order[k - 1]))) ++distinct;
  return distinct;
}

double median_nn_spacing(const PointCloud& cloud, std::size_t queries) {
  const std::size_t count = cloud.size();
  if (count < 2) return 0.0;
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  const auto& pts = cloud.points;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts(0, static_cast<Eigen::Index>(a)) < pts(0, static_cast<Eigen::Index>(b));
  });

  const std::size_t q = std::min(queries, count);
  std::vector<double> nn(q);
  parallel_for(q, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t pos = t * count / q;  // position in sorted order
      const auto self = static_cast<Eigen::Index>(order[pos]);
      const double x0 = pts(0, self);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = pos + 1; r < count; ++r) {
        const auto o = static_cast<Eigen::Index>(order[r]);
        if (pts(0, o) - x0 >= best) break;
        best = std::min(best, (pts.col(o) - pts.col(self)).norm());
      }
      for (std::size_t l = pos; l-- > 0;) {
        const auto o = static_cast<Eigen::Index>(order[l]);
        if (x0 - pts(0, o) >= best) break;
        best = std::min(best, (pts.col(o) - pts.col(self)).norm());
      }
      nn[t] = best;
    }
  });
  std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(q / 2), nn.end());
  return nn[q / 2];
}

std::vector<double> dyadic_scales(double radius, int m_min, int m_max) {
  if (!(radius > 0.0)) throw InvalidInput("dyadic_scales: radius must be positive");
  std::vector<double> out;
  for (int m = m_min; m <= m_max; ++m) out.push_back(std::ldexp(radius, -m));
  return out;
}

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 && sxx > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace

BoxCountCurve box_dimension(const PointCloud& cloud, std::vector<double> scales, const WindowPolicy& policy) {
  if (cloud.size() < 1000) throw InvalidInput("box_dimension: need at least 1000 points");
  for (double s : scales)
    if (!(s > 0.0)) throw InvalidInput("box_dimension: scales must be positive");
  std::sort(scales.begin(), scales.end(), std::greater<>());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());

  BoxCountCurve curve;
  curve.scales = scales;
  curve.nn_spacing = median_nn_spacing(cloud);
  const double radius = policy.radius.value_or(cloud.radius());
  const double lo = policy.min_spacing_factor * curve.nn_spacing;
  const double hi = policy.max_fraction * radius;
  const auto inside = [&](double s) { return s >= lo && (radius == 0.0 || s <= hi * (1.0 + 1e-12)); };

  curve.fit_begin = scales.size();
  curve.fit_end = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!inside(scales[i])) continue;
    curve.fit_begin = std::min(curve.fit_begin, i);
    curve.fit_end = i + 1;
  }
  if (curve.fit_end < curve.fit_begin + 4)
    throw DegenerateFit("box_dimension: fewer than 4 scales inside the fit window");

  curve.counts.resize(scales.size());
  for (std::size_t i = 0; i < scales.size(); ++i) curve.counts[i] = box_count(cloud, scales[i]);

  std::vector<double> x, y;
  for (std::size_t i = curve.fit_begin; i < curve.fit_end; ++i) {
    x.push_back(-std::log(scales[i]));
    y.push_back(std::log(static_cast<double>(curve.counts[i])));
  }
  const auto f = least_squares(x, y);
  curve.slope = f.slope;
  curve.intercept = f.intercept;
  curve.r2 = f.r2;
  return curve;
}

CorrelationCurve correlation_dimension(const PointCloud& cloud, std::vector<double> radii, std::size_t max_points) {
  if (cloud.size() < 10000) throw InvalidInput("correlation_dimension: need at least 10^4 points");
  for (double r : radii)
    if (!(r > 0.0)) throw InvalidInput("correlation_dimension: radii must be positive");
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  if (radii.size() < 4) throw DegenerateFit("correlation_dimension: need at least 4 radii");

  const std::size_t m = std::min(cloud.size(), std::max<std::size_t>(max_points, 2));
  Matrix sub(cloud.d, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k)
    sub.col(static_cast<Eigen::Index>(k)) = cloud.points.col(static_cast<Eigen::Index>(k * cloud.size() / m));

  std::vector<double> r2(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) r2[i] = radii[i] * radii[i];
  const std::size_t rows = m;
  std::vector<std::vector<std::uint64_t>> hist(rows);
  parallel_for(rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a) {
      auto& h = hist[a];
      h.assign(radii.size() + 1, 0);
      for (std::size_t b = a + 1; b < m; ++b) {
        const double dist2 = (sub.col(static_cast<Eigen::Index>(a)) - sub.col(static_cast<Eigen::Index>(b))).squaredNorm();
        ++h[static_cast<std::size_t>(std::lower_bound(r2.begin(), r2.end(), dist2) - r2.begin())];
      }
    }
  });
  std::vector<std::uint64_t> bins(radii.size() + 1, 0);
  for (const auto& h : hist)
    for (std::size_t i = 0; i < h.size(); ++i) bins[i] += h[i];

  const double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  CorrelationCurve curve;
  curve.radii = radii;
  curve.used_points = m;
  std::uint64_t cumulative = 0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    cumulative += bins[i];
    const double c = static_cast<double>(cumulative) / pairs;
    curve.fractions.push_back(c);
    if (c > 0.0) {
      x.push_back(std::log(radii[i]));
      y.push_back(std::log(c));
    }
  }
  if (x.size() < 4) throw DegenerateFit("correlation_dimension: fewer than 4 radii with pairs");
  const auto f = least_squares(x, y);
  curve.slope = f.slope;
  curve.intercept = f.intercept;
  curve.r2 = f.r2;
  return curve;
}

LocalDimensionHistogram local_dimension_histogram(const PointCloud& cloud, double r_small, double r_large, int bins,
                                                  std::size_t max_points, std::size_t queries) {
  if (cloud.size() < 10000) throw InvalidInput("local_dimension_histogram: need at least 10^4 points");
  if (!(r_small > 0.0 && r_large > r_small)) throw InvalidInput("local_dimension_histogram: need 0 < r_small < r_large");
  if (bins < 1) throw InvalidInput("local_dimension_histogram: bins must be positive");
  const std::size_t m = std::min(cloud.size(), std::max<std::size_t>(max_points, 2));
  Matrix sub(cloud.d, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k)
    sub.col(static_cast<Eigen::Index>(k)) = cloud.points.col(static_cast<Eigen::Index>(k * cloud.size() / m));
  const std::size_t q = std::min(m, std::max<std::size_t>(queries, 1));

  const double s2 = r_small * r_small, l2 = r_large * r_large;
  std::vector<double> estimate(q, std::numeric_limits<double>::quiet_NaN());
  parallel_for(q, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto a = static_cast<Eigen::Index>(i * m / q);
      std::uint64_t near = 0, far = 0;
      for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(m); ++b) {
        if (b == a) continue;
        const double dist2 = (sub.col(a) - sub.col(b)).squaredNorm();
        near += dist2 <= s2;
        far += dist2 <= l2;
      }
      if (near > 0) estimate[i] = std::log(static_cast<double>(far) / near) / std::log(r_large / r_small);
    }
  });

  LocalDimensionHistogram h;
  h.r_small = r_small;
  h.r_large = r_large;
  h.used_points = m;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(static_cast<double>(cloud.d) * b / bins);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  std::vector<double> kept;
  for (double e : estimate) {
    if (std::isnan(e)) continue;
    kept.push_back(e);
    const int b = std::clamp(static_cast<int>(std::floor(e / cloud.d * bins)), 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  h.queries = kept.size();
  if (kept.empty()) throw DegenerateFit("local_dimension_histogram: no query point has a neighbour within r_small");
  h.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
  std::nth_element(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(kept.size() / 2), kept.end());
  h.median = kept[kept.size() / 2];
  return h;
}

void write_csv(std::ostream& out, const PointCloud& cloud) {
  char buf[32];
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    for (int j = 0; j < cloud.d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", cloud.points(j, static_cast<Eigen::Index>(k)));
      if (j) out << ',';
      out << buf;
    }
    if (cloud.weights) {
      std::snprintf(buf, sizeof buf, "%.17g", (*cloud.weights)[k]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::string render_ppm(const PointCloud& cloud, int width, int height) {
  if (width < 1 || height < 1) throw InvalidInput("render_ppm: resolution must be positive");
  const std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::string img(header.size() + static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, '\xff');
  std::copy(header.begin(), header.end(), img.begin());
  if (cloud.size() == 0) return img;

  const auto coord = [&](int j, std::size_t k) {
    return j < cloud.d ? cloud.points(j, static_cast<Eigen::Index>(k)) : 0.0;
  };
  double x0 = coord(0, 0), x1 = x0, y0 = coord(1, 0), y1 = y0;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    x0 = std::min(x0, coord(0, k));
    x1 = std::max(x1, coord(0, k));
    y0 = std::min(y0, coord(1, k));
    y1 = std::max(y1, coord(1, k));
  }
  const double sx = x1 > x0 ? (width - 1) / (x1 - x0) : std::numeric_limits<double>::infinity();
  const double sy = y1 > y0 ? (height - 1) / (y1 - y0) : std::numeric_limits<double>::infinity();
  double scale = std::min(sx, sy);
  if (!std::isfinite(scale)) scale = 1.0;
  // Center the drawing; y grows upward in the plane and downward in rows.
  const double ox = 0.5 * ((width - 1) - (x1 - x0) * scale);
  const double oy = 0.5 * ((height - 1) - (y1 - y0) * scale);
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const auto col = static_cast<long>(std::lround(ox + (coord(0, k) - x0) * scale));
    const auto row = static_cast<long>(std::lround((height - 1) - (oy + (coord(1, k) - y0) * scale)));
    if (col < 0 || col >= width || row < 0 || row >= height) continue;
    const std::size_t at = header.size() + (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                                            static_cast<std::size_t>(col)) * 3;
    img[at] = img[at + 1] = img[at + 2] = '\0';
  }
  return img;
}

}  // namespace affdim
