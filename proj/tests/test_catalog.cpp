#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "permet/catalog.hpp"
#include "permet/config.hpp"
#include "permet/report.hpp"

using namespace permet;

TEST_CASE("builtin resolves every id and rejects unknown ones") {
  for (const char* id : {"jleli-phi", "kannan-step", "banach-quarter", "identity-noncontractive"}) {
    CHECK(builtin(id).id == id);
  }
  CHECK_THROWS_MATCHES(builtin("nope"), UnknownIdError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("kannan-step")));
}

namespace {

ClassificationSummary classify_entry(const CatalogEntry& entry, const SampleSet& samples) {
  const PerturbedSpace space = entry.space();
  const SelfMap map = entry.map();
  std::optional<ComparisonCandidate> phi;
  if (entry.phi_src) phi = ComparisonCandidate::from_expression(*entry.phi_src);
  return classify(space, map, phi ? &*phi : nullptr,
                  entry.lambda ? &*entry.lambda : nullptr, samples);
}

}  // namespace

TEST_CASE("the full pipeline reproduces every expected catalog finding") {
  for (const CatalogEntry& entry : catalog_entries()) {
    DYNAMIC_SECTION("entry " << entry.id) {
      const PerturbedSpace space = entry.space();
      const SelfMap map = entry.map();
      const SampleSet samples =
          sample_points(space, {64, 4096, 4096}, 42, &map, entry.required_pairs);

      // axioms always pass: all entries share a genuine exact metric
      CHECK(audit_metric_axioms(space, samples).all_pass());

      // conditions
      const ClassificationSummary summary = classify_entry(entry, samples);
      for (const ExpectedCondition& expected : entry.expected_conditions) {
        const ConditionVerdict* v = summary.find(expected.kind);
        INFO("condition " << to_string(expected.kind));
        REQUIRE(v != nullptr);
        CHECK(v->holds == expected.holds);
        if (!expected.holds) {
          REQUIRE(expected.witness.has_value());
          REQUIRE(v->first.has_value());
          // the recorded expected witness re-evaluates to a genuine violation
          const double x = expected.witness->x;
          const double y = expected.witness->y;
          double lhs = 0.0, rhs = 0.0;
          switch (expected.kind) {
            case ConditionKind::PhiPerturbed: {
              const auto phi = ComparisonCandidate::from_expression(*entry.phi_src);
              lhs = space.perturbed_distance(map(x), map(y));
              rhs = phi(space.perturbed_distance(x, y));
              break;
            }
            case ConditionKind::KannanPerturbed:
              lhs = space.perturbed_distance(map(x), map(y));
              rhs = *entry.lambda * (space.perturbed_distance(x, map(x)) +
                                     space.perturbed_distance(y, map(y)));
              break;
            case ConditionKind::KannanExact:
              lhs = space.exact_distance(map(x), map(y));
              rhs = *entry.lambda *
                    (space.exact_distance(x, map(x)) + space.exact_distance(y, map(y)));
              break;
            case ConditionKind::BanachPerturbed:
              lhs = space.perturbed_distance(map(x), map(y));
              rhs = *entry.lambda * space.perturbed_distance(x, y);
              break;
            case ConditionKind::BanachExact:
              lhs = space.exact_distance(map(x), map(y));
              rhs = *entry.lambda * space.exact_distance(x, y);
              break;
          }
          CHECK(std::fabs(lhs - expected.witness->lhs) <= 1e-12);
          CHECK(std::fabs(rhs - expected.witness->rhs) <= 1e-12);
          CHECK(lhs > rhs + 1e-9);
        }
      }

      // continuity findings
      if (entry.expected_jumps.empty()) {
        for (const ContinuityProbe& p : summary.probes) {
          CHECK_FALSE(p.discontinuous);
        }
      } else {
        for (const ExpectedJump& expected : entry.expected_jumps) {
          bool found = false;
          for (const ContinuityProbe& p : summary.probes) {
            if (p.point == expected.point) {
              found = true;
              CHECK(std::fabs(p.jump - expected.jump) <= 1e-6);
              CHECK(p.discontinuous);
            }
          }
          CHECK(found);
        }
      }

      // solve + uniqueness
      SolverParams params;
      params.mode = entry.solve_mode;
      params.epsilon = entry.solve_epsilon;
      if (entry.lambda) params.lambda = *entry.lambda;
      std::optional<ComparisonCandidate> phi;
      if (entry.phi_src) phi = ComparisonCandidate::from_expression(*entry.phi_src);
      if (params.mode == SolveMode::Phi) params.phi = &*phi;

      const UniquenessReport uniq =
          uniqueness_probe(space, map, entry.solve_starts, params);
      CHECK(uniq.consistent == entry.expect_unique);
      if (entry.expected_fixed_point) {
        for (const StartOutcome& s : uniq.starts) {
          INFO("start " << s.x0);
          CHECK(s.accepted);
          CHECK(std::fabs(s.fixed_point - *entry.expected_fixed_point) <= 1e-7);
          CHECK(s.residual_d <= params.epsilon);
          CHECK(s.residual_D <= 1e-9);  // the stronger conclusion holds on the catalog
          // step maps land on the fixed point exactly
          if (s.reason == StopReason::ResidualZero) {
            CHECK(s.fixed_point == *entry.expected_fixed_point);
            CHECK(s.residual_d == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("catalog round-trips through its config serialization") {
  for (const CatalogEntry& entry : catalog_entries()) {
    DYNAMIC_SECTION("entry " << entry.id) {
      const RunConfig cfg = RunConfig::from_catalog(entry);
      CHECK(cfg.D_src == entry.D_src);
      CHECK(cfg.P_src == entry.P_src);
      CHECK(cfg.T_src == entry.T_src);
      CHECK(cfg.sampling.include_pairs == entry.required_pairs);
      CHECK(cfg.solve.x0 == entry.solve_starts);

      // identical results: the imported config reproduces the classification
      const PerturbedSpace space_a = entry.space();
      const PerturbedSpace space_b =
          PerturbedSpace::from_expressions(cfg.domain, cfg.D_src, cfg.P_src);
      const SelfMap map_a = entry.map();
      const SelfMap map_b = SelfMap::from_expression(*cfg.T_src);
      const SampleSet samples_a =
          sample_points(space_a, {64, 1024, 16}, cfg.sampling.seed, &map_a, entry.required_pairs);
      const SampleSet samples_b = sample_points(space_b, {64, 1024, 16}, cfg.sampling.seed,
                                                &map_b, cfg.sampling.include_pairs);
      REQUIRE(samples_a.pairs == samples_b.pairs);

      std::optional<ComparisonCandidate> phi_a, phi_b;
      if (entry.phi_src) phi_a = ComparisonCandidate::from_expression(*entry.phi_src);
      if (cfg.phi_src) phi_b = ComparisonCandidate::from_expression(*cfg.phi_src);
      const ClassificationSummary a = classify(space_a, map_a, phi_a ? &*phi_a : nullptr,
                                               entry.lambda ? &*entry.lambda : nullptr, samples_a);
      const ClassificationSummary b = classify(space_b, map_b, phi_b ? &*phi_b : nullptr,
                                               cfg.lambda ? &*cfg.lambda : nullptr, samples_b);
      const std::string rendered_a = render_json(json_conditions(a.conditions));
      const std::string rendered_b = render_json(json_conditions(b.conditions));
      CHECK(rendered_a == rendered_b);
    }
  }
}

TEST_CASE("catalog metadata is coherent") {
  for (const CatalogEntry& entry : catalog_entries()) {
    CHECK_FALSE(entry.summary.empty());
    CHECK(entry.solve_starts.size() >= 2);
    if (entry.lambda_admissible) {
      REQUIRE(entry.lambda.has_value());
      CHECK(entry.lambda_admissible->first < *entry.lambda);
      CHECK(*entry.lambda < entry.lambda_admissible->second);
    }
  }
}
