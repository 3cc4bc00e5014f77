#include "doctest.h"

#include <cmath>
#include <map>

#include "affdim/symbolic.hpp"
#include "support.hpp"

using namespace affdim;

TEST_CASE("words print 1-based and concatenate") {
  const Word a = Word::from_one_based({1, 2});
  const Word b = Word::from_one_based({2});
  CHECK(a.to_string() == "(1,2)");
  CHECK((a + b).to_string() == "(1,2,2)");
  CHECK(Word().to_string() == "()");
  CHECK(Word::repeat(b, 3).size() == 3);
  CHECK(common_prefix(a + b, a + a).to_string() == "(1,2)");
  CHECK((a + b).prefix(1).to_string() == "(1)");
  CHECK_THROWS_AS(Word::from_one_based({0}), InvalidInput);
}

TEST_CASE("enumeration is lexicographic and agrees with word_at") {
  std::uint64_t i = 0;
  Word last;
  for (const Word& w : enumerate_words(3, 4)) {
    CHECK(w == word_at(3, 4, i));
    if (i > 0) CHECK(last < w);
    last = w;
    ++i;
  }
  CHECK(i == 81);
}

TEST_CASE("word_count enforces its limit") {
  CHECK(word_count(2, 10) == 1024);
  CHECK_THROWS_AS(word_count(2, 10, 1000), ResourceError);
  CHECK_THROWS_AS(word_count(10, 40), ResourceError);
}

TEST_CASE("all_word_products matches word_product") {
  Rng rng(7);
  std::vector<Matrix> mats;
  for (int i = 0; i < 3; ++i) mats.push_back(testing::gaussian_matrix(2, 2, rng));
  const auto all = all_word_products(mats, 3);
  REQUIRE(all.size() == 27);
  std::size_t k = 0;
  for (const Word& w : enumerate_words(3, 3)) CHECK((all[k++] - word_product(mats, w)).norm() <= 1e-13);
  CHECK((word_product(mats, Word()) - Matrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("step measure validates its input") {
  CHECK_THROWS_AS(StepMeasure(2, {Word({0}), Word({1, 0})}, {0.5, 0.5}), InvalidInput);
  CHECK_THROWS_AS(StepMeasure(2, {Word({0}), Word({1})}, {0.5, 0.4}), InvalidInput);
  CHECK_THROWS_AS(StepMeasure(2, {Word({0}), Word({0})}, {0.5, 0.5}), InvalidInput);
  const auto m = StepMeasure::normalized(2, {Word({1}), Word({0})}, {3.0, 0.0});
  CHECK(m.support_size() == 1);
  CHECK(m.cylinder_mass(Word({1, 1})) == 1.0);
  CHECK(m.cylinder_mass(Word({0})) == 0.0);
}

TEST_CASE("Bernoulli entropy") {
  CHECK(entropy(StepMeasure::uniform(3, 1)) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(entropy(StepMeasure::uniform(2, 3)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(entropy(StepMeasure::bernoulli({0.25, 0.75})) ==
        doctest::Approx(-(0.25 * std::log(0.25) + 0.75 * std::log(0.75))));
}

TEST_CASE("property: entropy is maximal at uniform weights") {
  Rng rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2;
    std::vector<Word> support;
    for (const Word& w : enumerate_words(3, n)) support.push_back(w);
    const double flat = std::log(static_cast<double>(support.size())) / n;
    std::vector<double> w(support.size());
    const double eps = 0.2 * (trial + 1) / 200.0;
    for (auto& x : w) x = 1.0 + eps * u(rng);
    const auto m = StepMeasure::normalized(3, support, w);
    REQUIRE(entropy(m) < flat);
    REQUIRE(entropy(StepMeasure::uniform(3, n)) == doctest::Approx(flat).epsilon(1e-15));
  }
}

TEST_CASE("property: Bernoulli cylinder masses multiply") {
  Rng rng(22);
  const auto m = StepMeasure::bernoulli({0.2, 0.5, 0.3});
  for (int trial = 0; trial < 500; ++trial) {
    const Word a = testing::random_word(3, 1 + trial % 7, rng);
    const Word b = testing::random_word(3, 1 + trial % 5, rng);
    REQUIRE(std::abs(m.cylinder_mass(a + b) - m.cylinder_mass(a) * m.cylinder_mass(b)) <= 1e-14);
  }
}

TEST_CASE("block sampling follows the weights and is reproducible") {
  const auto m = StepMeasure::bernoulli({0.1, 0.6, 0.3});
  Rng a(5), b(5);
  const auto x = m.sample_blocks(100000, a);
  CHECK(x == m.sample_blocks(100000, b));
  std::map<std::size_t, double> freq;
  for (auto i : x) freq[i] += 1.0 / x.size();
  CHECK(freq[0] == doctest::Approx(0.1).epsilon(0.05));
  CHECK(freq[1] == doctest::Approx(0.6).epsilon(0.02));
  Rng c(6);
  CHECK(sample_word(StepMeasure::uniform(2, 3), 4, c).size() == 12);
}

TEST_CASE("word spectra stay exact for products far below working precision") {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << 0.5, 0.05, 0.01;
  Matrix b = a;
  b.diagonal() << 0.4, 0.1, 0.02;
  const std::vector<Matrix> mats{a, b};
  const Word w = Word::from_one_based({1, 2, 2, 1, 2, 1, 1, 2, 1, 2, 2, 2});
  const Vector got = word_log_singular_values(mats, w);
  // five symbols 1, seven symbols 2
  const double e[3] = {5 * std::log(0.5) + 7 * std::log(0.4), 5 * std::log(0.05) + 7 * std::log(0.1),
                       5 * std::log(0.01) + 7 * std::log(0.02)};
  for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(e[i]).epsilon(1e-13));

  Rng rng(8);
  std::vector<Matrix> g;
  for (int i = 0; i < 2; ++i) g.push_back(testing::well_conditioned(3, rng, 0.3) * 0.5);
  const Word v = testing::random_word(2, 4, rng);
  const auto sv = singular_values(word_product(g, v));
  CHECK((word_log_singular_values(g, v) - sv.values.array().log().matrix()).norm() <= 1e-12);
}
