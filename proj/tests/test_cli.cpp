#include "doctest.h"

#include "affdim/cli.hpp"
#include "support.hpp"

using namespace affdim;
using namespace affdim::cli;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("property: spec round-trip is the identity on the canonical form") {
  for (const char* name : {"f1.json", "diagonal_bernoulli.json", "cantor.json", "square.json"}) {
    const auto spec = read_spec_file(testing::fixture_path(name));
    const json canon = spec_to_json(spec);
    const auto again = parse_spec(canon.dump());
    CHECK(spec_to_json(again) == canon);
    CHECK(spec_hash(again) == spec_hash(spec));
  }
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const IFSSpec spec{testing::random_contractive(2 + trial % 3, 2 + trial % 4, rng), {}};
    const json canon = spec_to_json(spec);
    CHECK(spec_to_json(parse_spec(canon.dump())) == canon);
  }
}

TEST_CASE("spec diagnostics name the problem") {
  CHECK(error_of("{\"dimension\": 2,\n \"maps\": [}").find("line 2") != std::string::npos);
  CHECK(error_of(read_file(testing::fixture_path("bad_row.json"))).find("maps[0].matrix[0] has 3 entries") !=
        std::string::npos);
  CHECK(error_of(R"({"dimension": 2, "maps": [], "extra": 1})").find("unknown field 'extra'") != std::string::npos);
  CHECK(error_of(R"({"dimension": 2, "maps": [{"matrix": [[0.5,0],[0,0.5]], "translation": [0,0]}]})")
            .find("at least two") != std::string::npos);
  const std::string weights =
      R"({"dimension": 1, "maps": [{"matrix": [[0.5]], "translation": [0], "weight": 0.5},
                                   {"matrix": [[0.5]], "translation": [1], "weight": 0.4}]})";
  CHECK(error_of(weights).find("weights sum") != std::string::npos);
  const std::string partial =
      R"({"dimension": 1, "maps": [{"matrix": [[0.5]], "translation": [0], "weight": 0.5},
                                   {"matrix": [[0.5]], "translation": [1]}]})";
  CHECK(error_of(partial).find("all maps or none") != std::string::npos);
}

TEST_CASE("weights within 1e-9 of a probability vector are renormalized") {
  const std::string text =
      R"({"dimension": 1, "maps": [{"matrix": [[0.5]], "translation": [0], "weight": 0.5000000001},
                                   {"matrix": [[0.5]], "translation": [1], "weight": 0.5}]})";
  const auto spec = parse_spec(text);
  const auto& w = *spec.ifs.weights();
  CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(IoError("x")) == kIoError);
  CHECK(exit_code_for(ResourceError("x")) == kBudget);
  CHECK(exit_code_for(InvalidInput("x")) == kInputError);
  CHECK(exit_code_for(UnsupportedDimension("x")) == kInputError);
  CHECK(exit_code_for(NumericalFault("x")) == kFail);
  CHECK_THROWS_AS(read_file("/nonexistent/spec.json"), IoError);
}

TEST_CASE("reports carry the fixed schema") {
  const auto out = run_check(read_spec_file(testing::fixture_path("f1.json")), {}, 42);
  const json& r = out.report;
  CHECK(out.exit_code == kPass);
  CHECK(r.at("version") == "affdim/1");
  CHECK(r.at("command") == "check");
  for (const char* key : {"inputs", "results", "timing"}) CHECK(r.contains(key));
  CHECK(r.size() == 5);
}

TEST_CASE("check verdicts") {
  CHECK(run_check(read_spec_file(testing::fixture_path("remark_a05.json")), {}, 1).exit_code == kFail);
  CHECK(run_check(read_spec_file(testing::fixture_path("remark_a01.json")), {}, 1).exit_code == kPass);
  CHECK_THROWS_AS(run_check(read_spec_file(testing::fixture_path("cantor.json")), {}, 1), UnsupportedDimension);
}

TEST_CASE("dimension results are bit-reproducible for a fixed seed") {
  DimensionOptions o;
  o.level = 4;
  o.mc_steps = 5000;
  o.trials = 2;
  const auto spec = read_spec_file(testing::fixture_path("f1.json"));
  const auto a = run_dimension(spec, o, 9).report.at("results");
  const auto b = run_dimension(spec, o, 9).report.at("results");
  CHECK(a == b);
  const auto c = run_dimension(spec, o, 10).report.at("results");
  CHECK(a != c);
}

TEST_CASE("random ensemble members satisfy the membership condition") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_member(3, 2, 0.3, seed);
    CHECK(membership_margin(m.ifs).member());
    CHECK(m.ifs.norm() == doctest::Approx(0.3));
  }
}
