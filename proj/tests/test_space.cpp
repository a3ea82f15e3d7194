#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "permet/catalog.hpp"
#include "permet/space.hpp"

using namespace permet;

namespace {

PerturbedSpace example_space() {
  return PerturbedSpace::from_expressions({-10.0, 10.0}, "abs(x-y)+x^2*y^2", "x^2*y^2");
}

}  // namespace

TEST_CASE("build_space validates expressions and domain") {
  CHECK_NOTHROW(example_space());
  CHECK_NOTHROW(PerturbedSpace::from_expressions({0.0, 1.0}, "abs(x-y)", "0"));
  CHECK_THROWS_MATCHES(PerturbedSpace::from_expressions({-10.0, 10.0}, "abs(x-z)", "0"),
                       ConfigError, Catch::Matchers::MessageMatches(
                                        Catch::Matchers::ContainsSubstring("z")));
  CHECK_THROWS_AS(PerturbedSpace::from_expressions({1.0, 1.0}, "abs(x-y)", "0"), ConfigError);
  CHECK_THROWS_AS(PerturbedSpace::from_expressions({2.0, 1.0}, "abs(x-y)", "0"), ConfigError);
  CHECK_THROWS_AS(SelfMap::from_expression("x+y"), ConfigError);
}

TEST_CASE("exact_distance is D minus P") {
  const PerturbedSpace space = example_space();
  CHECK(space.exact_distance(2.0, 3.0) == 1.0);         // 1 + 36 - 36
  CHECK(space.perturbed_distance(1.0, 1.0) == 1.0);     // D on the diagonal is nonzero
  CHECK(space.exact_distance(1.0, 1.0) == 0.0);         // but d vanishes exactly
  for (double x : {-7.3, -1.0, 0.0, 0.25, 6.875}) {
    CHECK(space.exact_distance(x, x) == 0.0);
  }
  const PerturbedSpace plain = PerturbedSpace::from_expressions({0.0, 1.0}, "abs(x-y)", "0");
  CHECK(plain.exact_distance(0.0, 1.0) == 1.0);
}

TEST_CASE("sampling is deterministic in the seed") {
  const PerturbedSpace space = example_space();
  const SampleSet a = sample_points(space, {16, 64, 64}, 7);
  const SampleSet b = sample_points(space, {16, 64, 64}, 7);
  CHECK(a.points == b.points);
  CHECK(a.pairs == b.pairs);
  CHECK(a.triples == b.triples);
  const SampleSet c = sample_points(space, {16, 64, 64}, 8);
  CHECK(a.pairs != c.pairs);
}

TEST_CASE("the grid includes both endpoints") {
  const PerturbedSpace space = PerturbedSpace::from_expressions({0.0, 1.0}, "abs(x-y)", "0");
  const SampleSet s = sample_points(space, {3, 3, 3}, 1);
  for (double expected : {0.0, 0.5, 1.0}) {
    CHECK(std::find(s.points.begin(), s.points.end(), expected) != s.points.end());
  }
}

TEST_CASE("branch boundaries are sampled adversarially") {
  const PerturbedSpace space = example_space();
  const SelfMap map = SelfMap::from_expression("if(x>=1, x/3, 0)");
  const SampleSet s = sample_points(space, {16, 64, 64}, 3, &map);
  const double delta = boundary_offset(space.domain());
  for (double expected : {1.0 - delta, 1.0, 1.0 + delta}) {
    CHECK(std::find(s.points.begin(), s.points.end(), expected) != s.points.end());
  }
}

TEST_CASE("required pairs occupy the leading slots") {
  const PerturbedSpace space = example_space();
  const std::vector<std::pair<double, double>> required = {{0.0, 3.0}, {3.0, 6.0}};
  const SampleSet s = sample_points(space, {8, 32, 8}, 11, nullptr, required);
  REQUIRE(s.pairs.size() == 32);
  CHECK(s.pairs[0] == std::pair{0.0, 3.0});
  CHECK(s.pairs[1] == std::pair{3.0, 6.0});
  CHECK_THROWS_AS(
      sample_points(space, {8, 32, 8}, 11, nullptr,
                    std::vector<std::pair<double, double>>{{0.0, 99.0}}),
      ConfigError);
}

TEST_CASE("all sample coordinates lie in the domain") {
  const PerturbedSpace space = example_space();
  const SelfMap map = SelfMap::from_expression("if(x>=2, 1, 0)");
  const SampleSet s = sample_points(space, {32, 256, 256}, 5, &map);
  const Interval& dom = space.domain();
  for (double p : s.points) CHECK(dom.contains(p));
  for (const auto& [a, b] : s.pairs) {
    CHECK(dom.contains(a));
    CHECK(dom.contains(b));
  }
  for (const auto& t : s.triples) {
    for (double v : t) CHECK(dom.contains(v));
  }
}

TEST_CASE("exact distance is symmetric on sampled pairs") {
  const PerturbedSpace space = example_space();
  const SampleSet s = sample_points(space, {32, 512, 8}, 9);
  for (const auto& [x, y] : s.pairs) {
    CHECK(std::fabs(space.exact_distance(x, y) - space.exact_distance(y, x)) <= 1e-9);
  }
}

TEST_CASE("catalog maps stay inside the domain on every sample point") {
  for (const CatalogEntry& entry : catalog_entries()) {
    const PerturbedSpace space = entry.space();
    const SelfMap map = entry.map();
    const SampleSet s = sample_points(space, {64, 16, 16}, 42, &map, entry.required_pairs);
    for (double p : s.points) {
      INFO(entry.id << " at x=" << p);
      CHECK(space.domain().contains(map(p)));
    }
  }
}
