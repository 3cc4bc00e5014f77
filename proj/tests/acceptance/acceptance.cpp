// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Run with a criterion number to execute only that one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "affdim/attractor.hpp"
#include "affdim/cli.hpp"
#include "affdim/furstenberg.hpp"
#include "affdim/lyapunov.hpp"
#include "affdim/pressure.hpp"
#include "support.hpp"

using namespace affdim;
using testing::fixture;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

class Detail {
 public:
  template <typename T>
  Detail& operator<<(const T& x) {
    out_ << x;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

Verdict remark_boundary() {
  const double closed = std::sqrt(6.0) / (4 + std::sqrt(6.0));
  auto margin = [](double a) { return membership_margin(testing::equilateral(a)).membership_margin; };
  double lo = 0.05, hi = 0.9;
  if (!(margin(lo) > 0 && margin(hi) < 0)) return {false, "margin does not change sign on [0.05, 0.9]"};
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) > 0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  const double err = std::abs(root - closed);
  return {err <= 1e-10, (Detail() << "a* = " << fmt("%.15f", root) << ", closed form " << fmt("%.15f", closed)
                                  << ", |err| = " << fmt("%.2e", err))
                            .str()};
}

Verdict pressure_at_zero() {
  Rng rng(2002);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n_maps = 2 + k % 4;
    const auto ifs = testing::random_contractive(n_maps, 2 + k % 3, rng);
    const int level = 1 + k % 5;
    const double p = pressure_estimate(ifs, 0.0, level).upper;
    const double expect = std::log(static_cast<double>(n_maps));
    worst = std::max(worst, std::abs(p - expect) / expect);
  }
  return {worst <= 8 * std::numeric_limits<double>::epsilon(),
          (Detail() << "20 fixtures, max relative error " << fmt("%.2e", worst)).str()};
}

Verdict affinity_oracles() {
  const auto conformal = fixture("conformal.json");
  const auto diagonal = fixture("diagonal.json");
  const double diag = 1 + std::log(1.5) / std::log(4.0);
  AffinityOptions opts;
  opts.tol = 1e-12;
  double worst_c = 0.0, worst_d = 0.0;
  for (int n : {2, 4, 8}) worst_c = std::max(worst_c, std::abs(affinity_upper(conformal, n, opts) - 1.0));
  for (int n = 1; n <= 8; ++n) worst_d = std::max(worst_d, std::abs(affinity_upper(diagonal, n, opts) - diag));
  return {worst_c <= 1e-9 && worst_d <= 1e-9,
          (Detail() << "conformal max |s_n - 1| = " << fmt("%.2e", worst_c) << ", diagonal max |s_n - "
                    << fmt("%.6f", diag) << "| = " << fmt("%.2e", worst_d))
              .str()};
}

Verdict monotone_bracket() {
  Rng rng(2004);
  AffinityOptions opts;
  opts.tol = 1e-14;
  LyapunovOptions lyap;
  lyap.steps = 20000;
  lyap.trials = 4;
  double worst_step = -1e300, worst_gap = -1e300;
  for (int k = 0; k < 10; ++k) {
    const int d = 2 + k % 2;
    const auto ifs = testing::random_contractive(2 + k % 2, d, rng);
    for (int n : {1, 2, 3}) {
      const double sn = affinity_upper(ifs, n, opts);
      const double s2n = affinity_upper(ifs, 2 * n, opts);
      worst_step = std::max(worst_step, s2n - sn);
    }
    lyap.seed = 100 + k;
    const auto bracket = dimension_bracket(ifs, 3, lyap, opts);
    worst_gap = std::max(worst_gap, bracket.lower - bracket.upper);
  }
  return {worst_step <= 1e-12 && worst_gap <= 0.02,
          (Detail() << "max s_2n - s_n = " << fmt("%.2e", worst_step) << ", max dim_L - s_n = " << fmt("%.4f", worst_gap))
              .str()};
}

Verdict lyapunov_oracles() {
  LyapunovOptions o;
  o.steps = 100000;
  o.trials = 8;
  o.seed = 5;
  Detail d;
  bool ok = true;

  // unequal weights so the expectation is not symmetric
  std::vector<Matrix> mats;
  std::vector<Vector> trans;
  const double lam[3] = {0.5, 0.3, 0.6}, gam[3] = {0.2, 0.25, 0.1};
  const std::vector<double> p{0.2, 0.5, 0.3};
  double e1 = 0.0, e2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << lam[i], gam[i];
    mats.push_back(a);
    trans.push_back(Vector::Unit(2, i % 2) * i);
    e1 -= p[i] * std::log(lam[i]);
    e2 -= p[i] * std::log(gam[i]);
  }
  const AffineIFS diag(mats, trans, p);
  const auto spec = exponents_mc(diag, diag.bernoulli_measure(), o);
  const double err1 = std::abs(spec.chi[0] - e1), err2 = std::abs(spec.chi[1] - e2);
  ok &= err1 <= std::max(0.01, 3 * spec.std_error[0]) && err2 <= std::max(0.01, 3 * spec.std_error[1]);
  d << "diagonal |err| " << fmt("%.4f", err1) << "/" << fmt("%.4f", err2);

  const auto conf = fixture("conformal.json");
  const auto cs = exponents_mc(conf, conf.bernoulli_measure(), o);
  const double spread = cs.chi[1] - cs.chi[0];
  const double se = std::hypot(cs.std_error[0], cs.std_error[1]);
  // exact equality up to rounding; the floor covers a zero error bar
  ok &= spread <= std::max(3 * se, 1e-12);
  d << "; conformal spread " << fmt("%.2e", spread);

  Rng rng(2005);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto ifs = testing::random_contractive(2 + k % 3, 2 + k % 3, rng);
    o.seed = 50 + k;
    const auto s = exponents_mc(ifs, ifs.bernoulli_measure(), o);
    double expect = 0.0;
    for (const auto& a : ifs.matrices()) expect -= std::log(std::abs(a.determinant())) / ifs.branches();
    const double z = std::abs(s.chi.sum() - expect) / std::max(s.sum_std_error, 1e-300);
    worst = std::max(worst, z);
  }
  ok &= worst <= 3.0;
  d << "; determinant sum max " << fmt("%.2f", worst) << " stderr";
  return {ok, d.str()};
}

Verdict lyapunov_dimension_formula() {
  Vector chi(2);
  chi << std::log(2.0), std::log(4.0);
  const double a = lyapunov_dimension(std::log(2.0), chi, 2);
  const double b = lyapunov_dimension(0.0, chi, 2);
  const double c = lyapunov_dimension(10.0, chi, 2);
  Vector chi3(3);
  chi3 << 0.1, 0.2, 0.3;
  const double e = lyapunov_dimension(5.0, chi3, 3);
  return {a == 1.0 && b == 0.0 && c == 2.0 && e == 3.0,
          (Detail() << "values " << a << ", " << b << ", caps " << c << ", " << e).str()};
}

Verdict svf_suite() {
  Rng rng(2007);
  double sub = 0.0, sandwich = 0.0, compound_err = 0.0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int d : {2, 3, 4})
    for (int trial = 0; trial < 1000; ++trial) {
      // Gaussian draws with condition number above 1e6 are redrawn: past that
      // alpha_d itself is only known to about kappa * eps.
      const Matrix a = testing::well_conditioned(d, rng, 1e-6);
      const Matrix b = testing::well_conditioned(d, rng, 1e-6);
      const double s = d * unif(rng);
      const auto sa = singular_values(a);
      if (sa.near_singular || singular_values(b).near_singular) continue;
      sub = std::max(sub, svf(Matrix(a * b), s) / (svf(a, s) * svf(b, s)) - 1);

      // sandwich on a word of length 3 over {a scaled, b scaled}
      std::vector<Matrix> mats{a * (0.5 / operator_norm(a)), b * (0.5 / operator_norm(b))};
      const Matrix w = mats[0] * mats[1] * mats[0];
      const double m = std::min(mininorm(mats[0]), mininorm(mats[1]));
      const double big = std::max(operator_norm(mats[0]), operator_norm(mats[1]));
      const double delta = unif(rng);
      const double mid = svf(w, s + delta);
      sandwich = std::max(sandwich, svf(w, s) * std::pow(m, 3 * delta) / mid - 1);
      sandwich = std::max(sandwich, mid / (svf(w, s) * std::pow(big, 3 * delta)) - 1);

      for (int k = 1; k <= d; ++k) {
        const double prod = sa.values.head(k).prod();
        compound_err = std::max(compound_err, std::abs(operator_norm(compound(a, k)) - prod) / prod);
      }
    }
  return {sub <= 1e-10 && sandwich <= 1e-10 && compound_err <= 1e-10,
          (Detail() << "submult excess " << fmt("%.1e", sub) << ", sandwich excess " << fmt("%.1e", sandwich)
                    << ", compound rel err " << fmt("%.1e", compound_err))
              .str()};
}

Verdict derivative_identity() {
  const auto ifs = fixture("f1.json");
  Rng rng(2008);
  std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
  std::uniform_int_distribution<int> len(1, 60);
  double max_h = 0.0, max_half = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Word w = testing::random_word(3, static_cast<std::size_t>(len(rng)), rng);
    const double alpha = angle(rng);
    max_h = std::max(max_h, derivative_identity_residual(ifs, alpha, w, 1e-4));
    max_half = std::max(max_half, derivative_identity_residual(ifs, alpha, w, 0.5e-4));
  }
  const double ratio = max_h / max_half;
  return {max_h <= 1e-5 && ratio >= 3.5 && ratio <= 4.5,
          (Detail() << "max residual " << fmt("%.2e", max_h) << ", Richardson ratio " << fmt("%.3f", ratio)).str()};
}

Verdict transversality() {
  const auto ifs = fixture("f1.json");
  TransversalityOptions o;
  o.samples = 10000;
  o.depth = 40;
  o.seed = 42;
  const auto a = transversality_delta(ifs, o);
  o.samples = 20000;
  const auto b = transversality_delta(ifs, o);
  const double change = std::abs(b.delta_hat - a.delta_hat) / a.delta_hat;
  return {a.delta_hat > 0.0 && change < 0.2,
          (Detail() << "delta_hat " << fmt("%.4f", a.delta_hat) << " (1e4), " << fmt("%.4f", b.delta_hat)
                    << " (2e4), change " << fmt("%.1f", 100 * change) << "%")
              .str()};
}

Verdict furstenberg() {
  const auto ifs = fixture("dominated.json");
  LyapunovOptions lo;
  lo.steps = 100000;
  lo.trials = 8;
  lo.seed = 10;
  const auto chi = exponents_mc(ifs, ifs.bernoulli_measure(), lo);
  Rng rng(2010);
  const auto orbit = grassmann_orbit(ifs, ifs.bernoulli_measure(), 1, 10000, rng);
  const double r = furstenberg_limit_residual(orbit, chi).back();
  const Subspace v = random_subspace(2, 1, rng);
  const double q = projected_svf_limit_residual(ifs, ifs.bernoulli_measure(), v, 1.0, 10000, chi, rng).back();
  return {std::abs(r) <= 0.02 && std::abs(q) <= 0.02,
          (Detail() << "r_n " << fmt("%.2e", r) << ", projected svf residual " << fmt("%.2e", q)).str()};
}

Verdict domination() {
  std::vector<Matrix> rot{0.5 * rotation(0.3), 0.4 * rotation(1.2)};
  Vector v0(2), v1(2);
  v0 << 0, 1;
  v1 << 0, -1;
  const AffineIFS rotations(rot, {v0, v1});
  const auto dominated = fixture("dominated.json");
  bool ok = true;
  Detail d;
  for (int n : {8, 10, 12}) {
    const auto a = domination_test(dominated, n).gaps.at(0).classification;
    const auto b = domination_test(rotations, n).gaps.at(0).classification;
    ok &= a == GapClass::dominated && b == GapClass::undominated;
    d << "n_max " << n << ": " << to_string(a) << "/" << to_string(b) << (n < 12 ? "; " : "");
  }
  return {ok, d.str()};
}

Verdict conjugation() {
  Rng rng(2012);
  double worst = 0.0;
  for (int d : {2, 3}) {
    const auto ifs = d == 2 ? fixture("f1.json") : testing::random_contractive(3, 3, rng, 0.2, 0.5);
    for (int k = 0; k < 10; ++k) {
      const Matrix u = haar_orthogonal(d, rng);
      const auto left = conjugate(ifs, u);
      const auto right = transform_translations(ifs, u);
      for (int j = 0; j < 100; ++j) {
        const Word w = testing::random_word(3, 1 + rng() % 60, rng);
        const Vector x = partial_projection(left, w);
        const Vector y = u.transpose() * partial_projection(right, w);
        worst = std::max(worst, (x - y).norm());
      }
    }
  }
  return {worst <= 1e-10, (Detail() << "max discrepancy " << fmt("%.2e", worst)).str()};
}

Verdict end_to_end() {
  using namespace affdim::cli;
  VerifyOptions vo;
  vo.points = 1000000;
  const auto spec = read_spec_file(testing::fixture_path("f1.json"));
  const auto f1 = run_verify(spec, vo, 42);
  const auto& r = f1.report.at("results");
  const double box = r.at("box_dimension").get<double>();
  const double mid = r.at("bracket_midpoint").get<double>();
  const bool f1_ok = f1.exit_code == kPass && r.at("verdict") == "PASS" && std::abs(box - mid) <= 0.2;

  EnsembleOptions eo;
  eo.size = 20;
  const auto ens = run_ensemble(eo, vo, 42);
  const double rate = ens.report.at("results").at("pass_rate").get<double>();
  return {f1_ok && rate >= 0.9,
          (Detail() << "F1 box " << fmt("%.4f", box) << " vs midpoint " << fmt("%.4f", mid) << " ("
                    << r.at("verdict").get<std::string>() << "); ensemble pass rate " << fmt("%.2f", rate))
              .str()};
}

Verdict box_counting() {
  const auto cantor = fixture("cantor.json");
  const auto cc = generate_random(cantor, 1000000, 40, 14);
  WindowPolicy pc;
  pc.radius = 1.0;
  const auto c = box_dimension(cc, dyadic_scales(1.0, 0, 20), pc);

  const auto square = fixture("square.json");
  const auto sc = generate_random(square, 1000000, 40, 15);
  WindowPolicy ps;
  ps.radius = 1.0;
  const auto s = box_dimension(sc, dyadic_scales(1.0, 0, 12), ps);
  const double target = std::log(2.0) / std::log(3.0);
  return {std::abs(c.slope - target) <= 0.02 && std::abs(s.slope - 2.0) <= 0.05,
          (Detail() << "Cantor " << fmt("%.4f", c.slope) << ", square " << fmt("%.4f", s.slope)).str()};
}

Verdict quasi_multiplicativity() {
  const auto defect = fixture("qm_defect.json");
  const double c2 = quasi_multiplicativity_diagnostic(defect, 1.0, 2).c_defect;
  const double c8 = quasi_multiplicativity_diagnostic(defect, 1.0, 8).c_defect;
  const auto diag = fixture("diagonal.json");
  double worst = 0.0;
  for (int n : {2, 4, 6}) {
    const auto q = quasi_multiplicativity_diagnostic(diag, 1.0, n);
    worst = std::max({worst, std::abs(q.c_defect - 1), std::abs(q.c_lower - 1)});
  }
  return {c8 >= 10 * c2 && worst <= 1e-9,
          (Detail() << "C_defect " << fmt("%.3g", c2) << " (n=2) -> " << fmt("%.3g", c8) << " (n=8); diagonal |C - 1| "
                    << fmt("%.1e", worst))
              .str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "membership boundary a*", 1, remark_boundary},
      {2, "pressure at zero is log N", 1, pressure_at_zero},
      {3, "affinity dimension oracles", 10, affinity_oracles},
      {4, "monotone dimension bracket", 60, monotone_bracket},
      {5, "Lyapunov exponent oracles", 30, lyapunov_oracles},
      {6, "Lyapunov dimension formula", 1, lyapunov_dimension_formula},
      {7, "singular value function properties", 10, svf_suite},
      {8, "derivative identity", 5, derivative_identity},
      {9, "transversality constant", 30, transversality},
      {10, "Furstenberg limits", 30, furstenberg},
      {11, "domination classifier", 30, domination},
      {12, "conjugation equivalence", 5, conjugation},
      {13, "end-to-end verify and ensemble", 600, end_to_end},
      {14, "box-counting oracles", 60, box_counting},
      {15, "quasi-multiplicativity defect", 60, quasi_multiplicativity},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("%s  %2d  %-36s %7.2fs / %4.0fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_seconds,
                v.detail.c_str(), in_time ? "" : "  [over time budget]");
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
