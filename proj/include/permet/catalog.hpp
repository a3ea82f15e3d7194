#pragma once

// Ready-made problem instances: two classical discontinuous step maps over
// the same perturbed space, a smooth contraction control, and the identity
// map as a non-example. Every expected finding recorded here is asserted by
// the test suite against the live modules.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "permet/contraction.hpp"
#include "permet/errors.hpp"
#include "permet/picard.hpp"
#include "permet/space.hpp"

namespace permet {

struct ExpectedCondition {
  ConditionKind kind;
  bool holds;                       // expected sampled verdict
  std::optional<Witness> witness;   // a concrete violating pair when !holds
};

struct ExpectedJump {
  double point;
  double jump;
};

struct CatalogEntry {
  std::string id;
  std::string summary;  // one line for `catalog list`
  Interval domain{-10.0, 10.0};
  std::string D_src = "abs(x-y)+x^2*y^2";
  std::string P_src = "x^2*y^2";
  std::string T_src;
  std::optional<std::string> phi_src;
  std::optional<double> lambda;
  std::optional<std::pair<double, double>> lambda_admissible;
  ConditionKind primary = ConditionKind::PhiPerturbed;  // checked by `verify` by default
  SolveMode solve_mode = SolveMode::ResidualOnly;
  double solve_epsilon = 1e-8;
  std::vector<std::pair<double, double>> required_pairs;  // always-checked pairs
  std::vector<double> solve_starts;
  std::optional<double> expected_fixed_point;
  bool expect_unique = true;
  std::vector<ExpectedJump> expected_jumps;  // empty means continuous
  std::vector<ExpectedCondition> expected_conditions;
  std::vector<std::string> notes;

  PerturbedSpace space() const {
    return PerturbedSpace::from_expressions(domain, D_src, P_src, id);
  }
  SelfMap map() const { return SelfMap::from_expression(T_src, id); }
};

inline const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;

    {
      CatalogEntry e;
      e.id = "jleli-phi";
      e.summary = "branch map T(x) = x/3 for x >= 1, else 0, with phi(t) = t/3; "
                  "discontinuous at 1, fixed point 0";
      e.T_src = "if(x>=1, x/3, 0)";
      e.phi_src = "t/3";
      e.primary = ConditionKind::PhiPerturbed;
      e.solve_mode = SolveMode::Phi;
      e.required_pairs = {{0.0, 3.0}, {3.0, 6.0}, {0.5, 1.0}};
      e.solve_starts = {-5.0, 0.5, 2.0, 9.0};
      e.expected_fixed_point = 0.0;
      e.expected_jumps = {{1.0, 1.0 / 3.0}};
      // The audit refutes the phi condition on this space: on the strip
      // 0 < x < 1 <= y with x*y^2 < 1 the left side D(Tx, Ty) = y/3 exceeds
      // phi(D(x, y)) = (y - x + x^2*y^2)/3. The pairs (0, y), y >= 1 attain
      // equality, so the condition is tight but not satisfied nearby.
      e.expected_conditions = {{ConditionKind::PhiPerturbed, false,
                                Witness{0.5, 1.0, 1.0 / 3.0, 0.25}}};
      e.notes = {"phi condition with phi(t)=t/3 fails on the strip 0<x<1<=y with x*y^2<1 "
                 "(worst margin 1/12 at (0.5, 1)); pairs (0, y) with y>=1 attain equality",
                 "restricted to pairs with x<=0 or x>=1 the condition holds"};
      v.push_back(std::move(e));
    }

    {
      CatalogEntry e;
      e.id = "kannan-step";
      e.summary = "step map T(x) = 1 for x >= 2, else 0, with lambda = 0.45; "
                  "perturbed-Kannan but not Kannan for the exact metric";
      e.T_src = "if(x>=2, 1, 0)";
      e.lambda = 0.45;
      e.lambda_admissible = {{0.4, 0.5}};
      e.primary = ConditionKind::KannanPerturbed;
      e.solve_mode = SolveMode::Kannan;
      e.required_pairs = {{1.0, 2.0}, {2.0, 3.0}, {0.0, 2.0}};
      e.solve_starts = {-3.0, 1.9, 2.0, 5.0};
      e.expected_fixed_point = 0.0;
      e.expected_jumps = {{2.0, 1.0}};
      e.expected_conditions = {
          {ConditionKind::KannanPerturbed, true, std::nullopt},
          {ConditionKind::KannanExact, false, Witness{1.0, 2.0, 1.0, 0.9}},
          {ConditionKind::BanachPerturbed, false, Witness{0.0, 2.0, 1.0, 0.9}},
          {ConditionKind::BanachExact, false, Witness{0.0, 2.0, 1.0, 0.9}},
      };
      e.notes = {"under the defined D the pair (1, 2) gives D(T1, T2) = D(0, 1) = 1 "
                 "(a commonly quoted value for this pair is 2); the verdict is unaffected",
                 "exact-metric Kannan fails at (1, 2) for every admissible lambda: "
                 "d(T1, T2) = 1 while d(1, T1) + d(2, T2) = 2"};
      v.push_back(std::move(e));
    }

    {
      CatalogEntry e;
      e.id = "banach-quarter";
      e.summary = "smooth contraction T(x) = x/4 with lambda = 1/4; continuous control case";
      e.T_src = "x/4";
      e.lambda = 0.25;
      e.primary = ConditionKind::BanachPerturbed;
      e.solve_mode = SolveMode::Banach;
      // tight enough that the accepted point's D-residual sits below 1e-9
      e.solve_epsilon = 1e-9;
      e.required_pairs = {{0.0, 1.0}};
      e.solve_starts = {-5.0, 0.5, 2.0, 9.0};
      e.expected_fixed_point = 0.0;
      e.expected_jumps = {};  // continuous everywhere
      e.expected_conditions = {
          {ConditionKind::BanachPerturbed, true, std::nullopt},
          {ConditionKind::BanachExact, true, std::nullopt},
          {ConditionKind::KannanPerturbed, false, Witness{0.0, 1.0, 0.25, 0.203125}},
          {ConditionKind::KannanExact, false, Witness{0.0, 1.0, 0.25, 0.1875}},
      };
      e.notes = {"D(x/4, y/4) = |x-y|/4 + x^2*y^2/256 <= D(x, y)/4 holds for every pair"};
      v.push_back(std::move(e));
    }

    {
      CatalogEntry e;
      e.id = "identity-noncontractive";
      e.summary = "identity map; every contraction condition fails, every point is fixed";
      e.T_src = "x";
      e.phi_src = "t/3";
      e.lambda = 0.45;
      e.primary = ConditionKind::BanachPerturbed;
      e.solve_mode = SolveMode::ResidualOnly;
      e.required_pairs = {{0.0, 1.0}, {0.0, 3.0}};
      e.solve_starts = {-5.0, 0.5, 2.0, 9.0};
      e.expected_fixed_point = std::nullopt;
      e.expect_unique = false;
      e.expected_jumps = {};
      e.expected_conditions = {
          {ConditionKind::PhiPerturbed, false, Witness{0.0, 3.0, 3.0, 1.0}},
          {ConditionKind::KannanPerturbed, false, Witness{0.0, 1.0, 1.0, 0.45}},
          {ConditionKind::KannanExact, false, Witness{0.0, 1.0, 1.0, 0.0}},
          {ConditionKind::BanachPerturbed, false, Witness{0.0, 3.0, 3.0, 1.35}},
          {ConditionKind::BanachExact, false, Witness{0.0, 3.0, 3.0, 1.35}},
      };
      v.push_back(std::move(e));
    }

    return v;
  }();
  return entries;
}

inline const CatalogEntry& builtin(std::string_view id) {
  for (const CatalogEntry& e : catalog_entries()) {
    if (e.id == id) return e;
  }
  std::string available;
  for (const CatalogEntry& e : catalog_entries()) {
    if (!available.empty()) available += ", ";
    available += e.id;
  }
  throw UnknownIdError("unknown catalog id '" + std::string(id) +
                       "'; available: " + available);
}

}  // namespace permet
