#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "affdim/attractor.hpp"
#include "affdim/cli.hpp"
#include "affdim/furstenberg.hpp"
#include "affdim/lyapunov.hpp"
#include "affdim/parallel.hpp"
#include "affdim/pressure.hpp"
#include "affdim/random.hpp"

namespace affdim::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json vec(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json word_json(const Word& w) {
  std::vector<int> s;
  for (int x : w.symbols()) s.push_back(x + 1);
  return s;
}

json base_inputs(const IFSSpec& spec, std::uint64_t seed, json parameters) {
  return json{{"spec_hash", spec_hash(spec)},
              {"seed", seed},
              {"threads", thread_count()},
              {"parameters", std::move(parameters)},
              {"spec", spec_to_json(spec)}};
}

json spectrum_json(const LyapunovSpectrum& s) {
  return json{{"chi", vec(s.chi)},
              {"std_error", vec(s.std_error)},
              {"sum_std_error", s.sum_std_error},
              {"steps", s.steps},
              {"trials", s.trials}};
}

json condition_json(const ConditionReport& r) {
  json dups = json::array();
  for (const auto& [i, j] : r.duplicates) dups.push_back({i + 1, j + 1});
  return json{{"max_ratio", r.max_ratio},
              {"membership_margin", r.membership_margin},
              {"threshold_used", r.threshold_used},
              {"member", r.member()},
              {"ssc_gap", r.ssc_gap},
              {"ssc_certified", r.ssc_certified()},
              {"contractive", r.contractive},
              {"duplicates", dups}};
}

// Re-raises library errors with the pipeline stage prepended, keeping the
// error type (and therefore the exit code).
template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const IoError& e) {
    throw IoError(name + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(name + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(name + ": " + e.what());
  } catch (const ResourceError& e) {
    throw ResourceError(name + ": " + e.what());
  } catch (const DegenerateFit& e) {
    throw DegenerateFit(name + ": " + e.what());
  } catch (const NumericalFault& e) {
    throw NumericalFault(name + ": " + e.what());
  } catch (const UnsupportedDimension& e) {
    throw UnsupportedDimension(name + ": " + e.what());
  }
}

LyapunovOptions lyapunov_options(std::size_t steps, std::size_t trials, std::uint64_t seed) {
  LyapunovOptions o;
  o.steps = steps;
  o.trials = trials;
  o.seed = seed;
  return o;
}

json bracket_json(const DimensionBracket& b, const DimensionOptions& o) {
  return json{{"n", b.n},
              {"upper", b.upper},
              {"lower", b.lower},
              {"lower_std_error", b.lower_std_error},
              {"midpoint", b.midpoint()},
              {"subsystem_s", b.subsystem_s},
              {"entropy", b.entropy},
              {"tol", o.tol},
              {"spectrum", spectrum_json(b.spectrum)}};
}

json box_json(const BoxCountCurve& c, std::size_t points) {
  return json{{"slope", c.slope},
              {"intercept", c.intercept},
              {"r2", c.r2},
              {"scales", c.scales},
              {"counts", c.counts},
              {"fit_window", {c.fit_begin, c.fit_end}},
              {"nn_spacing", c.nn_spacing},
              {"points", points}};
}

std::size_t default_depth(const AffineIFS& ifs) {
  return projection_depth(ifs, 1e-12 * std::max(1.0, ifs.radius_bound()));
}

BoxCountCurve fit_box(const AffineIFS& ifs, const PointCloud& cloud, int scales) {
  const double r = ifs.radius_bound();
  WindowPolicy policy;
  policy.radius = r;
  return box_dimension(cloud, dyadic_scales(r, 0, scales), policy);
}

}  // namespace

Outcome run_check(const IFSSpec& spec, const CheckOptions& options, std::uint64_t seed) {
  const auto start = Clock::now();
  const auto& ifs = spec.ifs;
  json results{{"norm", ifs.norm()}, {"mininorm", ifs.mininorm()}, {"translation_norm", ifs.translation_norm()}};
  const json params{{"domination_levels", options.domination_levels}, {"pinching_length", options.pinching_length}};
  membership_threshold(ifs.dim());

  int code = kPass;
  if (!ifs.contractive()) {
    results["contractive"] = false;
    results["membership"] = {{"member", false}, {"reason", "system is not contractive"}};
    code = kFail;
  } else {
    const auto cond = membership_margin(ifs);
    results["contractive"] = true;
    results["membership"] = condition_json(cond);
    if (!cond.member() || !cond.ssc_certified()) code = kFail;
  }

  DominationOptions dopt;
  dopt.seed = seed;
  DominationReport dom;
  try {
    dom = domination_test(ifs, options.domination_levels, dopt);
  } catch (const ResourceError&) {
    dopt.exhaustive = false;
    dom = domination_test(ifs, options.domination_levels, dopt);
  }
  json gaps = json::array();
  for (const auto& g : dom.gaps)
    gaps.push_back({{"gap", g.gap},
                    {"classification", to_string(g.classification)},
                    {"decay_rate", g.decay_rate},
                    {"r2", g.r2},
                    {"min_ratio", g.min_ratio},
                    {"max_ratio_by_level", g.max_ratio_by_level}});
  results["domination"] = {{"n_max", dom.n_max},
                           {"sampled", dom.sampled},
                           {"words_examined", dom.words_examined},
                           {"all_dominated", dom.all_dominated()},
                           {"gaps", gaps}};

  if (ifs.dim() == 2) {
    const auto pt = pinching_twisting_search(ifs, options.pinching_length);
    results["pinching_twisting"] = {{"max_len", options.pinching_length},
                                    {"pinching", pt.pinching ? word_json(*pt.pinching) : json(nullptr)},
                                    {"twisting", pt.twisting ? word_json(*pt.twisting) : json(nullptr)},
                                    {"words_examined", pt.words_examined}};
  }
  results["verdict"] = code == kPass ? "PASS" : "FAIL";
  return {make_report("check", base_inputs(spec, seed, params), results, seconds_since(start)), code};
}

Outcome run_dimension(const IFSSpec& spec, const DimensionOptions& options, std::uint64_t seed) {
  const auto start = Clock::now();
  const auto& ifs = spec.ifs;
  if (options.level < 1) throw InvalidInput("--level must be >= 1");
  const json params{{"level", options.level}, {"mc_steps", options.mc_steps}, {"trials", options.trials}, {"tol", options.tol}};
  AffinityOptions aopt;
  aopt.tol = options.tol;
  word_count(ifs.branches(), options.level, aopt.limit);

  json levels = json::array();
  for (int n = 1; n < options.level; n *= 2) levels.push_back({{"n", n}, {"s_n", affinity_upper(ifs, n, aopt)}, {"tol", options.tol}});
  const auto lyap = lyapunov_options(options.mc_steps, options.trials, seed);
  const auto bracket = dimension_bracket(ifs, options.level, lyap, aopt);
  levels.push_back({{"n", options.level}, {"s_n", bracket.upper}, {"tol", options.tol}});

  const auto p = pressure_estimate(ifs, bracket.upper, options.level, aopt.limit);
  json results{{"bracket", bracket_json(bracket, options)},
               {"levels", levels},
               {"pressure_at_upper", {{"s", p.s}, {"n", p.n}, {"upper", p.upper}, {"slope", p.slope}}}};

  const StepMeasure nu = ifs.bernoulli_measure();
  const auto chi = exponents_mc(ifs, nu, lyap);
  const double h = entropy(nu);
  results["bernoulli"] = {{"weights", ifs.weights_or_uniform()},
                          {"weights_given", ifs.weights().has_value()},
                          {"entropy", h},
                          {"spectrum", spectrum_json(chi)},
                          {"lyapunov_dimension", lyapunov_dimension(h, chi, ifs.dim())}};
  return {make_report("dimension", base_inputs(spec, seed, params), results, seconds_since(start)), kPass};
}

Outcome run_attractor(const IFSSpec& spec, const AttractorOptions& options, std::uint64_t seed) {
  const auto start = Clock::now();
  const auto& ifs = spec.ifs;
  PointCloud cloud;
  json params{{"box_dim", options.box_dim}, {"measure_dim", options.measure_dim || options.local_dim}, {"local_dim", options.local_dim}};
  if (options.exhaustive_depth) {
    params["exhaustive_depth"] = *options.exhaustive_depth;
    cloud = generate_exhaustive(ifs, *options.exhaustive_depth);
  } else {
    if (options.points < 1) throw InvalidInput("--points must be positive (empty point cloud)");
    const std::size_t depth = options.depth.value_or(default_depth(ifs));
    params["points"] = options.points;
    params["depth"] = depth;
    cloud = generate_random(ifs, options.points, depth, seed);
  }

  json results{{"points", cloud.size()}, {"radius", cloud.radius()}, {"radius_bound", ifs.radius_bound()}};
  if (options.csv) {
    std::ostringstream os;
    write_csv(os, cloud);
    write_file(*options.csv, os.str());
    results["csv"] = *options.csv;
  }
  if (options.render) {
    write_file(*options.render, render_ppm(cloud, options.width, options.height));
    results["render"] = {{"path", *options.render}, {"width", options.width}, {"height", options.height}};
  }
  if (options.box_dim) results["box_dimension"] = box_json(fit_box(ifs, cloud, options.box_scales), cloud.size());
  if (options.local_dim) {
    const double r = ifs.radius_bound();
    const auto h = local_dimension_histogram(cloud, std::ldexp(r, -7), std::ldexp(r, -3));
    results["measure_dimension"] = {{"method", "local_histogram"}, {"mean", h.mean},       {"median", h.median},
                                    {"r_small", h.r_small},        {"r_large", h.r_large}, {"edges", h.edges},
                                    {"counts", h.counts},          {"queries", h.queries}, {"used_points", h.used_points}};
  } else if (options.measure_dim) {
    const auto c = correlation_dimension(cloud, dyadic_scales(ifs.radius_bound(), 3, 10));
    results["measure_dimension"] = {{"method", "correlation"}, {"slope", c.slope},         {"r2", c.r2},
                                    {"radii", c.radii},        {"fractions", c.fractions}, {"used_points", c.used_points},
                                    {"proxy", c.proxy}};
  }
  return {make_report("attractor", base_inputs(spec, seed, params), results, seconds_since(start)), kPass};
}

Outcome run_furstenberg(const IFSSpec& spec, const FurstenbergOptions& options, std::uint64_t seed) {
  const auto start = Clock::now();
  const auto& ifs = spec.ifs;
  const int d = ifs.dim();
  if (options.k < 1 || options.k > d - 1) throw InvalidInput("--k must lie in 1..d-1");
  const json params{{"k", options.k},          {"steps", options.steps},        {"discard", options.discard},
                    {"s", options.s_values},   {"mc_steps", options.mc_steps}, {"trials", options.trials},
                    {"tolerance", options.tolerance}};
  const StepMeasure nu = ifs.bernoulli_measure();
  const auto chi = exponents_mc(ifs, nu, lyapunov_options(options.mc_steps, options.trials, seed));

  Rng orbit_rng = make_rng(seed, 1001);
  const auto orbit = grassmann_orbit(ifs, nu, options.k, options.discard + options.steps, orbit_rng);
  const auto r = furstenberg_limit_residual(orbit, chi, options.discard);
  json checkpoints = json::array();
  for (std::size_t n = 10; n < r.size(); n *= 10) checkpoints.push_back({{"n", n}, {"r_n", r[n - 1]}});
  checkpoints.push_back({{"n", r.size()}, {"r_n", r.back()}});
  bool ok = std::abs(r.back()) <= options.tolerance;

  // V in G(d, d - k) from the tail of its own orbit.
  Rng v_rng = make_rng(seed, 1002);
  const auto v_orbit = grassmann_orbit(ifs, nu, d - options.k, options.discard, v_rng);
  json lemma = json::array();
  for (double s : options.s_values) {
    if (!(s >= 0.0 && s <= options.k)) throw InvalidInput("--s values must lie in [0, k]");
    Rng w_rng = make_rng(seed, 1003);
    const auto res = projected_svf_limit_residual(ifs, nu, v_orbit.subspaces.back(), s, options.steps, chi, w_rng);
    lemma.push_back({{"s", s}, {"n", res.size()}, {"residual", res.back()}, {"target", svf_exponent(chi, s)}});
    ok = ok && std::abs(res.back()) <= options.tolerance;
  }
  json results{{"spectrum", spectrum_json(chi)},
               {"furstenberg_limit", {{"k", options.k}, {"target", chi.chi[d - options.k]}, {"checkpoints", checkpoints}}},
               {"projected_svf_limit", lemma},
               {"verdict", ok ? "PASS" : "FAIL"}};
  return {make_report("furstenberg", base_inputs(spec, seed, params), results, seconds_since(start)), ok ? kPass : kFail};
}

Outcome run_transversality(const IFSSpec& spec, const TransversalityOptions& options, std::uint64_t seed) {
  const auto start = Clock::now();
  const auto& ifs = spec.ifs;
  if (ifs.dim() != 2) throw UnsupportedDimension("transversality: d must be 2");
  const json params{{"samples", options.samples}, {"depth", options.depth},  {"tail_samples", options.tail_samples},
                    {"t_grid", options.t_grid},   {"h", options.h},          {"derivative_checks", options.derivative_checks}};

  affdim::TransversalityOptions topt;
  topt.samples = options.samples;
  topt.depth = options.depth;
  topt.seed = seed;
  const auto delta = transversality_delta(ifs, topt);

  Rng rng = make_rng(seed, 2001);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> symbol(0, ifs.branches() - 1);
  double worst = 0.0, sum_h = 0.0, sum_half = 0.0;
  for (std::size_t k = 0; k < options.derivative_checks; ++k) {
    std::vector<int> s(20);
    for (auto& x : s) x = symbol(rng);
    const Word w(std::move(s));
    const double a = angle(rng);
    const double r1 = derivative_identity_residual(ifs, a, w, options.h);
    worst = std::max(worst, r1);
    sum_h += r1;
    sum_half += derivative_identity_residual(ifs, a, w, options.h / 2);
  }

  Rng v_rng = make_rng(seed, 2002);
  const Subspace v = random_subspace(2, 1, v_rng);
  const Word wi = Word::repeat(Word(std::vector<int>{0}), options.depth);
  const Word wj = Word::repeat(Word(std::vector<int>{1}), options.depth);
  const auto tail = transversality_tail(ifs, v, wi, wj, options.t_grid, options.tail_samples, derive_seed(seed, 2003));

  const bool ok = delta.delta_hat > 0.0;
  json results{{"delta",
                {{"delta_hat", delta.delta_hat},
                 {"raw_min", delta.raw_min},
                 {"correction", delta.correction},
                 {"profiled_min", delta.profiled_min},
                 {"samples", delta.samples},
                 {"depth", delta.depth},
                 {"member", delta.member}}},
               {"derivative_identity",
                {{"h", options.h}, {"max_residual", worst}, {"richardson_ratio", sum_half > 0 ? sum_h / sum_half : 0.0},
                 {"checks", options.derivative_checks}}},
               {"tail",
                {{"pair", {word_json(wi.prefix(1)), word_json(wj.prefix(1))}},
                 {"subspace", vec(v.basis().col(0))},
                 {"t", tail.t},
                 {"p", tail.p},
                 {"bound", tail.bound},
                 {"c_hat", tail.c_hat},
                 {"samples", tail.samples}}},
               {"verdict", ok ? "PASS" : "FAIL"}};
  if (!delta.member) results["warning"] = "system is not a member of the condition set; delta may vanish";
  return {make_report("transversality", base_inputs(spec, seed, params), results, seconds_since(start)),
          ok ? kPass : kFail};
}

Outcome run_verify(const IFSSpec& spec, const VerifyOptions& options, std::uint64_t seed) {
  const auto start = Clock::now();
  const auto& ifs = spec.ifs;
  const json params{{"level", options.dimension.level},
                    {"mc_steps", options.dimension.mc_steps},
                    {"trials", options.dimension.trials},
                    {"tol", options.dimension.tol},
                    {"points", options.points},
                    {"box_scales", options.box_scales},
                    {"tolerance", options.tolerance},
                    {"furstenberg_steps", options.furstenberg.steps},
                    {"transversality_samples", options.transversality.samples},
                    {"transversality_depth", options.transversality.depth}};
  json stages;
  json timing;
  auto t0 = Clock::now();

  const auto cond = stage("check", [&] {
    require_contractive(ifs, "check");
    return membership_margin(ifs);
  });
  stages["check"] = condition_json(cond);
  timing["check"] = seconds_since(t0);
  if (!cond.member()) {
    json results{{"stages", stages}, {"verdict", "REFUSED"}, {"reason", "system is not a member of the condition set"}};
    auto report = make_report("verify", base_inputs(spec, seed, params), results, seconds_since(start));
    report["timing"]["stages"] = timing;
    return {report, kFail};
  }

  t0 = Clock::now();
  const auto bracket = stage("dimension", [&] {
    AffinityOptions aopt;
    aopt.tol = options.dimension.tol;
    return dimension_bracket(ifs, options.dimension.level,
                             lyapunov_options(options.dimension.mc_steps, options.dimension.trials, seed), aopt);
  });
  stages["dimension"] = bracket_json(bracket, options.dimension);
  timing["dimension"] = seconds_since(t0);

  t0 = Clock::now();
  const auto box = stage("attractor", [&] {
    const auto cloud = generate_random(ifs, options.points, default_depth(ifs), derive_seed(seed, 3001));
    return fit_box(ifs, cloud, options.box_scales);
  });
  stages["attractor"] = box_json(box, options.points);
  timing["attractor"] = seconds_since(t0);

  t0 = Clock::now();
  stages["furstenberg"] = stage("furstenberg", [&] {
    const StepMeasure nu = ifs.bernoulli_measure();
    const int d = ifs.dim();
    Rng orbit_rng = make_rng(seed, 3002);
    const auto orbit = grassmann_orbit(ifs, nu, 1, options.furstenberg.discard + options.furstenberg.steps, orbit_rng);
    const auto chi = exponents_mc(ifs, nu, lyapunov_options(options.dimension.mc_steps, options.dimension.trials, seed));
    const auto r = furstenberg_limit_residual(orbit, chi, options.furstenberg.discard);
    Rng v_rng = make_rng(seed, 3003);
    const auto v_orbit = grassmann_orbit(ifs, nu, d - 1, options.furstenberg.discard, v_rng);
    Rng w_rng = make_rng(seed, 3004);
    const auto res = projected_svf_limit_residual(ifs, nu, v_orbit.subspaces.back(), 1.0, options.furstenberg.steps, chi, w_rng);
    return json{{"k", 1}, {"n", r.size()}, {"furstenberg_residual", r.back()}, {"svf_residual_s1", res.back()}};
  });
  timing["furstenberg"] = seconds_since(t0);

  if (ifs.dim() == 2) {
    t0 = Clock::now();
    stages["transversality"] = stage("transversality", [&] {
      affdim::TransversalityOptions topt;
      topt.samples = options.transversality.samples;
      topt.depth = options.transversality.depth;
      topt.seed = derive_seed(seed, 3005);
      const auto delta = transversality_delta(ifs, topt);
      return json{{"delta_hat", delta.delta_hat}, {"samples", delta.samples}, {"depth", delta.depth}};
    });
    timing["transversality"] = seconds_since(t0);
  }

  const double diff = box.slope - bracket.midpoint();
  const bool pass = std::abs(diff) <= options.tolerance;
  json results{{"stages", stages},
               {"box_dimension", box.slope},
               {"bracket_midpoint", bracket.midpoint()},
               {"difference", diff},
               {"tolerance", options.tolerance},
               {"verdict", pass ? "PASS" : "FAIL"}};
  auto report = make_report("verify", base_inputs(spec, seed, params), results, seconds_since(start));
  report["timing"]["stages"] = timing;
  return {report, pass ? kPass : kFail};
}

IFSSpec random_member(int branches, int dim, double target_norm, std::uint64_t seed) {
  if (branches < 2 || dim < 2) throw InvalidInput("random ensemble: need N >= 2 and d >= 2");
  if (!(target_norm > 0.0 && target_norm < 1.0)) throw InvalidInput("random ensemble: target norm must lie in (0, 1)");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Matrix> mats;
  std::vector<Vector> trans;
  for (int i = 0; i < branches; ++i) {
    Matrix a(dim, dim);
    do {
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) a(r, c) = normal(rng);
    } while (!(mininorm(a) >= 0.05 * operator_norm(a)));
    mats.push_back(a * (target_norm / operator_norm(a)));
    Vector v = Vector::Zero(dim);
    const double t = std::numbers::pi / 2 + 2.0 * std::numbers::pi * i / branches;
    v[0] = std::cos(t);
    v[1] = std::sin(t);
    trans.push_back(v);
  }
  IFSSpec spec{AffineIFS(std::move(mats), std::move(trans)), {{"source", "random ensemble"}, {"seed", std::to_string(seed)}}};
  if (!membership_margin(spec.ifs).member()) throw PreconditionError("random ensemble: target norm is outside the membership set");
  return spec;
}

Outcome run_ensemble(const EnsembleOptions& ensemble, const VerifyOptions& options, std::uint64_t seed) {
  const auto start = Clock::now();
  if (ensemble.size < 1) throw InvalidInput("--random-ensemble size must be positive");
  const double norm = ensemble.target_norm.value_or(ensemble.dim == 2 ? 0.3 : 0.1);
  VerifyOptions member_options = options;
  member_options.points = ensemble.points;

  json members = json::array();
  int passed = 0;
  for (int k = 0; k < ensemble.size; ++k) {
    const std::uint64_t member_seed = derive_seed(seed, 4000 + static_cast<std::uint64_t>(k));
    const auto spec = random_member(ensemble.branches, ensemble.dim, norm, member_seed);
    const auto out = run_verify(spec, member_options, member_seed);
    const bool ok = out.exit_code == kPass;
    passed += ok;
    members.push_back({{"seed", member_seed},
                       {"spec_hash", spec_hash(spec)},
                       {"box_dimension", out.report["results"].value("box_dimension", json(nullptr))},
                       {"bracket_midpoint", out.report["results"].value("bracket_midpoint", json(nullptr))},
                       {"verdict", out.report["results"]["verdict"]}});
  }
  const double rate = static_cast<double>(passed) / ensemble.size;
  const bool ok = rate >= ensemble.min_pass_rate;
  const json params{{"size", ensemble.size},   {"branches", ensemble.branches},       {"dim", ensemble.dim},
                    {"target_norm", norm},     {"min_pass_rate", ensemble.min_pass_rate}, {"points", ensemble.points},
                    {"level", options.dimension.level}, {"tolerance", options.tolerance}};
  json inputs{{"seed", seed}, {"threads", thread_count()}, {"parameters", params}, {"random_ensemble", true}};
  json results{{"members", members}, {"passed", passed}, {"pass_rate", rate}, {"verdict", ok ? "PASS" : "FAIL"}};
  return {make_report("verify", inputs, results, seconds_since(start)), ok ? kPass : kFail};
}

}  // namespace affdim::cli
