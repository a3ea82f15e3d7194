#pragma once

// Sampled audit of the four metric axioms for the exact metric d = D - P:
//   (i)   d(x, y) >= 0
//   (ii)  d(x, y) = 0 iff x = y
//   (iii) d(x, y) = d(y, x)
//   (iv)  d(x, y) <= d(x, z) + d(z, y)
// plus the codomain requirement that D and P themselves are nonnegative.
// A pass certifies only "no counterexample found among the checked samples";
// reports always carry the sample counts.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "permet/errors.hpp"
#include "permet/space.hpp"

namespace permet {

struct AxiomViolation {
  std::vector<double> witness;  // 1, 2 or 3 coordinates depending on the check
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AxiomCheck {
  bool pass = true;
  std::size_t violations = 0;
  std::vector<AxiomViolation> examples;  // sorted by witness, capped
};

struct AxiomReport {
  double tolerance = 1e-9;
  AxiomCheck nonnegativity;  // (i)
  AxiomCheck identity;       // (ii), both directions
  AxiomCheck symmetry;       // (iii)
  AxiomCheck triangle;       // (iv)
  AxiomCheck codomain_D;
  AxiomCheck codomain_P;
  std::size_t points_checked = 0;
  std::size_t pairs_checked = 0;
  std::size_t triples_checked = 0;
  std::size_t indeterminate = 0;  // samples whose evaluation raised an error
  std::vector<std::string> indeterminate_notes;  // capped

  bool all_pass() const {
    return nonnegativity.pass && identity.pass && symmetry.pass && triangle.pass &&
           codomain_D.pass && codomain_P.pass;
  }
};

namespace detail {

inline constexpr std::size_t kMaxStoredViolations = 16;
inline constexpr std::size_t kMaxStoredNotes = 8;

inline void finalize_check(AxiomCheck& check) {
  check.violations = check.examples.size();
  check.pass = check.violations == 0;
  std::sort(check.examples.begin(), check.examples.end(),
            [](const AxiomViolation& a, const AxiomViolation& b) { return a.witness < b.witness; });
  if (check.examples.size() > kMaxStoredViolations) check.examples.resize(kMaxStoredViolations);
}

}  // namespace detail

/// Audits the metric axioms of `space` over `samples`. Evaluation errors are
/// counted as indeterminate samples and reported, never silently skipped.
inline AxiomReport audit_metric_axioms(const PerturbedSpace& space, const SampleSet& samples,
                                       double tolerance = 1e-9) {
  if (!(tolerance > 0.0)) throw ParameterError("axiom tolerance must be positive");
  AxiomReport report;
  report.tolerance = tolerance;
  report.points_checked = samples.points.size();
  report.pairs_checked = samples.pairs.size();
  report.triples_checked = samples.triples.size();

  auto note = [&](const std::string& text) {
    ++report.indeterminate;
    if (report.indeterminate_notes.size() < detail::kMaxStoredNotes) {
      report.indeterminate_notes.push_back(text);
    }
  };

  // Exact zero on the diagonal is tested point-wise; the reverse direction of
  // (ii) only flags pairs whose points are separated by far more than the
  // tolerance can explain.
  const double separation = 1e3 * tolerance * std::fmax(1.0, space.domain().width());

  for (double x : samples.points) {
    try {
      const double dxx = space.exact_distance(x, x);
      if (std::fabs(dxx) > tolerance) {
        report.identity.examples.push_back({{x}, dxx, 0.0});
      }
    } catch (const EvalError& e) {
      note("point (" + format_double(x) + "): " + e.what());
    }
  }

  for (const auto& [x, y] : samples.pairs) {
    try {
      const double dxy = space.exact_distance(x, y);
      const double dyx = space.exact_distance(y, x);
      const double Dxy = space.perturbed_distance(x, y);
      const double Pxy = space.perturbation(x, y);
      if (dxy < -tolerance) report.nonnegativity.examples.push_back({{x, y}, dxy, 0.0});
      if (dxy <= tolerance && std::fabs(x - y) > separation) {
        report.identity.examples.push_back({{x, y}, dxy, std::fabs(x - y)});
      }
      if (std::fabs(dxy - dyx) > tolerance) report.symmetry.examples.push_back({{x, y}, dxy, dyx});
      if (Dxy < -tolerance) report.codomain_D.examples.push_back({{x, y}, Dxy, 0.0});
      if (Pxy < -tolerance) report.codomain_P.examples.push_back({{x, y}, Pxy, 0.0});
    } catch (const EvalError& e) {
      note("pair (" + format_double(x) + ", " + format_double(y) + "): " + e.what());
    }
  }

  for (const auto& t : samples.triples) {
    const double x = t[0], z = t[1], y = t[2];
    try {
      const double dxy = space.exact_distance(x, y);
      const double dxz = space.exact_distance(x, z);
      const double dzy = space.exact_distance(z, y);
      if (dxy > dxz + dzy + tolerance) {
        report.triangle.examples.push_back({{x, z, y}, dxy, dxz + dzy});
      }
    } catch (const EvalError& e) {
      note("triple (" + format_double(x) + ", " + format_double(z) + ", " + format_double(y) +
           "): " + e.what());
    }
  }

  detail::finalize_check(report.nonnegativity);
  detail::finalize_check(report.identity);
  detail::finalize_check(report.symmetry);
  detail::finalize_check(report.triangle);
  detail::finalize_check(report.codomain_D);
  detail::finalize_check(report.codomain_P);
  return report;
}

}  // namespace permet
