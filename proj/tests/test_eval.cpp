#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support/oracles.hpp"
#include "winnowtc/eval.hpp"
#include "winnowtc/random.hpp"

using namespace winnowtc;

namespace {

std::vector<ScoredLabel> random_scores(Rng& rng, std::size_t n, bool ensure_positive = true) {
  std::vector<ScoredLabel> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({static_cast<double>(rng.between(0, 9)) / 4.0, rng.bernoulli(0.4)});
  if (ensure_positive && !out.empty()) out[rng.index(n)].label = true;
  return out;
}

std::vector<std::pair<double, bool>> pairs(const std::vector<ScoredLabel>& s) {
  std::vector<std::pair<double, bool>> out;
  for (const auto& x : s) out.emplace_back(x.score, x.label);
  return out;
}

PRPoint point(double r, double p) { return {0.0, r, p, {}}; }

}  // namespace

TEST_CASE("contingency counts") {
  const std::vector<ScoredLabel> s{{1.2, true}, {0.8, true}, {1.1, false}, {0.1, false}};
  CHECK(contingency(s, 1.0) == Contingency{1, 1, 1, 1});
  const std::vector<ScoredLabel> neg{{0.5, false}, {0.7, false}};
  CHECK(contingency(neg, 0.0) == Contingency{0, 0, 0, 2});
  CHECK(contingency({}, 1.0) == Contingency{});
}

TEST_CASE("recall and precision conventions") {
  CHECK(Contingency{}.recall() == 0.0);
  CHECK(Contingency{}.precision() == 1.0);
  CHECK(Contingency{3, 1, 5, 1}.recall() == 0.75);
  CHECK(Contingency{3, 1, 5, 1}.precision() == 0.75);
}

TEST_CASE("two-item curve") {
  const std::vector<ScoredLabel> s{{2.0, true}, {1.0, false}};
  const auto curve = pr_curve(s);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].recall == 0.0);
  CHECK(curve[0].precision == 1.0);
  CHECK(curve[1].recall == 1.0);
  CHECK(curve[1].precision == 1.0);
  CHECK(curve[1].threshold == 1.5);
  CHECK(curve[2].recall == 1.0);
  CHECK(curve[2].precision == 0.5);
  CHECK(std::isinf(curve[0].threshold));
  CHECK(std::isinf(curve[2].threshold));
}

TEST_CASE("pr_curve errors") {
  const std::vector<ScoredLabel> none{{1.0, false}};
  CHECK_THROWS_WITH_AS(pr_curve(none), "undefined recall", std::invalid_argument);
  const std::vector<ScoredLabel> nan{{std::nan(""), true}};
  CHECK_THROWS_AS(pr_curve(nan), std::invalid_argument);
  CHECK_THROWS_AS(break_even_point({}), std::invalid_argument);
}

TEST_CASE("ties form a single cut") {
  const std::vector<ScoredLabel> s{{1.0, true}, {1.0, false}, {0.0, true}};
  const auto curve = pr_curve(s);
  REQUIRE(curve.size() == 3);
  CHECK(curve[1].counts == Contingency{1, 1, 0, 1});
}

TEST_CASE("perfect ranking reaches recall 1 at precision 1 and BEP 1") {
  const std::vector<ScoredLabel> s{{3, true}, {2, true}, {1, false}, {0, false}};
  const auto curve = pr_curve(s);
  bool perfect = false;
  for (const auto& p : curve) perfect |= p.recall == 1.0 && p.precision == 1.0;
  CHECK(perfect);
  CHECK(break_even(curve) == 1.0);
}

TEST_CASE("symmetric crossing") {
  const std::vector<PRPoint> curve{point(0.4, 0.8), point(0.8, 0.4)};
  const auto bep = break_even_point(curve);
  CHECK_FALSE(bep.approximate);
  // Within one ulp: the double nearest 0.4 + 0.2 is one ulp above 0.6.
  CHECK(std::abs(bep.value - 0.6) <= 1e-15);
  const std::vector<PRPoint> dyadic{point(0.25, 0.75), point(0.75, 0.25)};
  CHECK(break_even(dyadic) == 0.5);
}

TEST_CASE("no crossing falls back to the closest approach") {
  const std::vector<PRPoint> curve{point(0.0, 1.0), point(0.3, 0.9), point(0.5, 0.8)};
  const auto bep = break_even_point(curve);
  CHECK(bep.approximate);
  CHECK(bep.value == doctest::Approx(0.65));
}

TEST_CASE("curves and break-even points match the brute-force sweep") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = random_scores(rng, 1 + rng.index(30));
    const auto curve = pr_curve(s);
    const auto expected = oracle::sweep(pairs(s));
    REQUIRE(curve.size() == expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) {
      CHECK(curve[k].recall == doctest::Approx(expected[k].recall).epsilon(1e-12));
      CHECK(curve[k].precision == doctest::Approx(expected[k].precision).epsilon(1e-12));
    }
    CHECK(curve.back().counts.p2 + curve.back().counts.n1 == 0);
    const auto bep = break_even_point(curve);
    const auto want = oracle::break_even(expected);
    CHECK(std::abs(bep.value - want.value) <= 1e-9);
    CHECK(bep.approximate == want.approximate);
    CHECK(bep.value >= 0.0);
    CHECK(bep.value <= 1.0);
    for (const auto& p : curve) {
      CHECK(std::abs(p.recall * double(p.counts.p1 + p.counts.p2) - double(p.counts.p1)) <= 1e-12);
      if (p.counts.p1 + p.counts.n2)
        CHECK(std::abs(p.precision * double(p.counts.p1 + p.counts.n2) - double(p.counts.p1)) <= 1e-12);
      CHECK(contingency(s, p.threshold) == p.counts);
    }
  }
}

TEST_CASE("BEP depends only on the ranking") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_scores(rng, 2 + rng.index(20));
    const double before = break_even(pr_curve(s));
    for (auto& x : s) x.score = std::exp(3.0 * x.score) - 5.0;
    CHECK(break_even(pr_curve(s)) == before);
  }
}

TEST_CASE("macro and micro aggregation") {
  std::map<std::string, CategoryScores> one{{"a", {{{2, true}, {1, false}, {0, true}}, 1.5}}};
  const auto r1 = evaluate_scores(one);
  CHECK(r1.macro_bep == r1.micro_bep);
  CHECK(r1.macro_bep == r1.per_category.at("a").bep);

  std::map<std::string, CategoryScores> two{
      {"x", {{{3, true}, {2, false}, {1, true}, {0, false}}, 0.5}},
      {"y", {{{3, true}, {2, true}, {1, false}, {0, false}}, 0.5}},
      {"z", {{{3, false}}, 0.5}},
  };
  const auto r2 = evaluate_scores(two);
  CHECK(r2.per_category.size() == 2);
  CHECK(r2.skipped.count("z") == 1);
  CHECK(r2.macro_bep == doctest::Approx((r2.per_category.at("x").bep + r2.per_category.at("y").bep) / 2));
  CHECK(r2.contingency_at_theta.total() == 9);

  std::map<std::string, CategoryScores> none{{"z", {{{3, false}}, 0.5}}};
  CHECK_THROWS_AS(evaluate_scores(none), std::invalid_argument);
}

TEST_CASE("contingency at theta agrees with predict") {
  Classifier c(Algorithm::Perceptron, HyperParams::defaults(Algorithm::Perceptron), 2.0, 6, {}, "k");
  Rng rng(1);
  std::vector<SparseVector> vectors;
  std::vector<LabelSet> labels;
  for (int i = 0; i < 40; ++i) {
    std::vector<SparseVector::Entry> e;
    for (FeatureId j = 0; j < 6; ++j)
      if (rng.bernoulli(0.5)) e.push_back({j, 1.0});
    vectors.emplace_back(std::move(e));
    labels.push_back(rng.bernoulli(0.5) ? LabelSet{"k"} : LabelSet{});
    if (i % 3 == 0) c.promote(vectors.back());
  }
  labels[0] = {"k"};
  std::map<std::string, Classifier> cs{{"k", c}};
  const auto report = evaluate(cs, vectors, labels);
  Contingency want;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const bool acc = c.predict(vectors[i]);
    const bool pos = labels[i].count("k") != 0;
    ++(pos ? (acc ? want.p1 : want.p2) : (acc ? want.n2 : want.n1));
  }
  CHECK(report.per_category.at("k").at_theta == want);
}

TEST_CASE("report format") {
  std::map<std::string, CategoryScores> cats{{"earn", {{{2, true}, {1, false}}, 1.5}}};
  std::ostringstream out;
  write_report(out, evaluate_scores(cats));
  CHECK(out.str() == "earn\t1\t1 0 1 0\nmacro\t1\nmicro\t1\n");
}
