#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "affdim/cli.hpp"
#include "affdim/parallel.hpp"

using namespace affdim::cli;

namespace {

struct Common {
  std::string spec;
  std::uint64_t seed = 42;
  unsigned threads = affdim::thread_count();
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool spec_required = true) {
  auto* opt = cmd->add_option("spec", c.spec, "IFS spec JSON file");
  if (spec_required) opt->required();
  cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker thread cap (default: AFFDIM_THREADS or 1)")->capture_default_str();
  cmd->add_option("--out", c.out, "write the report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension theory of self-affine sets: conditions, pressure, exponents, attractors"};
  app.require_subcommand(1);
  Common common;

  CheckOptions check;
  auto* c_check = app.add_subcommand("check", "membership, separation, domination and pinching/twisting");
  add_common(c_check, common);
  c_check->add_option("--domination-levels", check.domination_levels)->capture_default_str();
  c_check->add_option("--pinching-length", check.pinching_length)->capture_default_str();

  DimensionOptions dim;
  auto* c_dim = app.add_subcommand("dimension", "affinity dimension bracket and Lyapunov spectra");
  add_common(c_dim, common);
  c_dim->add_option("--level", dim.level)->capture_default_str();
  c_dim->add_option("--mc-steps", dim.mc_steps)->capture_default_str();
  c_dim->add_option("--trials", dim.trials)->capture_default_str();
  c_dim->add_option("--tol", dim.tol)->capture_default_str();

  AttractorOptions attr;
  std::size_t depth = 0;
  int exhaustive = -1;
  std::string render, csv;
  auto* c_attr = app.add_subcommand("attractor", "point clouds, renders and box dimension");
  add_common(c_attr, common);
  c_attr->add_option("--points", attr.points)->capture_default_str();
  c_attr->add_option("--depth", depth, "truncation depth of random points (default: from tolerance)");
  c_attr->add_option("--exhaustive", exhaustive, "one point per cylinder of this depth");
  c_attr->add_option("--render", render, "binary PPM output");
  c_attr->add_option("--width", attr.width)->capture_default_str();
  c_attr->add_option("--height", attr.height)->capture_default_str();
  c_attr->add_option("--csv", csv, "CSV point output");
  c_attr->add_flag("--box-dim", attr.box_dim, "fit the box-counting dimension");
  c_attr->add_option("--box-scales", attr.box_scales)->capture_default_str();
  c_attr->add_flag("--measure-dim", attr.measure_dim, "correlation dimension of the sampled measure");
  c_attr->add_flag("--local-dim", attr.local_dim, "local-dimension histogram instead of the correlation slope");

  VerifyOptions verify;
  EnsembleOptions ensemble;
  int ensemble_size = 0;
  double ensemble_norm = 0.0;
  auto* c_verify = app.add_subcommand("verify", "end-to-end pipeline; or a random ensemble of members");
  add_common(c_verify, common, false);
  c_verify->add_option("--level", verify.dimension.level)->capture_default_str();
  c_verify->add_option("--mc-steps", verify.dimension.mc_steps)->capture_default_str();
  c_verify->add_option("--trials", verify.dimension.trials)->capture_default_str();
  c_verify->add_option("--points", verify.points)->capture_default_str();
  c_verify->add_option("--tolerance", verify.tolerance)->capture_default_str();
  c_verify->add_option("--random-ensemble", ensemble_size, "number of random members to verify");
  c_verify->add_option("--ensemble-branches", ensemble.branches)->capture_default_str();
  c_verify->add_option("--ensemble-dim", ensemble.dim)->capture_default_str();
  c_verify->add_option("--ensemble-norm", ensemble_norm, "matrix norm of members (default 0.3 for d = 2, else 0.1)");
  c_verify->add_option("--ensemble-points", ensemble.points)->capture_default_str();
  c_verify->add_option("--min-pass-rate", ensemble.min_pass_rate)->capture_default_str();

  FurstenbergOptions furst;
  auto* c_furst = app.add_subcommand("furstenberg", "Grassmannian orbit limit residuals");
  add_common(c_furst, common);
  c_furst->add_option("--k", furst.k)->capture_default_str();
  c_furst->add_option("--steps", furst.steps)->capture_default_str();
  c_furst->add_option("--discard", furst.discard)->capture_default_str();
  c_furst->add_option("--s", furst.s_values, "exponents s for the projected limit")->capture_default_str();
  c_furst->add_option("--mc-steps", furst.mc_steps)->capture_default_str();
  c_furst->add_option("--trials", furst.trials)->capture_default_str();
  c_furst->add_option("--tolerance", furst.tolerance)->capture_default_str();

  TransversalityOptions trans;
  auto* c_trans = app.add_subcommand("transversality", "transversality constant, derivative identity, tail bound");
  add_common(c_trans, common);
  c_trans->add_option("--samples", trans.samples)->capture_default_str();
  c_trans->add_option("--depth", trans.depth)->capture_default_str();
  c_trans->add_option("--tail-samples", trans.tail_samples)->capture_default_str();
  c_trans->add_option("--t", trans.t_grid)->capture_default_str();
  c_trans->add_option("--fd-step", trans.h, "finite-difference step for the derivative identity")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    affdim::set_thread_count(common.threads);
    Outcome out;
    if (c_check->parsed()) {
      out = run_check(read_spec_file(common.spec), check, common.seed);
    } else if (c_dim->parsed()) {
      out = run_dimension(read_spec_file(common.spec), dim, common.seed);
    } else if (c_attr->parsed()) {
      if (depth > 0) attr.depth = depth;
      if (exhaustive >= 0) attr.exhaustive_depth = exhaustive;
      if (!render.empty()) attr.render = render;
      if (!csv.empty()) attr.csv = csv;
      out = run_attractor(read_spec_file(common.spec), attr, common.seed);
    } else if (c_verify->parsed()) {
      if (ensemble_size > 0) {
        ensemble.size = ensemble_size;
        if (ensemble_norm > 0.0) ensemble.target_norm = ensemble_norm;
        out = run_ensemble(ensemble, verify, common.seed);
      } else {
        if (common.spec.empty()) throw affdim::InvalidInput("verify needs a spec file or --random-ensemble");
        out = run_verify(read_spec_file(common.spec), verify, common.seed);
      }
    } else if (c_furst->parsed()) {
      out = run_furstenberg(read_spec_file(common.spec), furst, common.seed);
    } else if (c_trans->parsed()) {
      out = run_transversality(read_spec_file(common.spec), trans, common.seed);
    }

    const std::string text = out.report.dump(2) + "\n";
    if (common.out.empty())
      std::cout << text;
    else
      write_file(common.out, text);
    return out.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "affdim: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
