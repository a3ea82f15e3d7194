#pragma once

// Certification / refutation of contraction conditions over sampled pairs.
// Five conditions are supported, each comparing lhs <= rhs pair-wise:
//
//   phi-perturbed     D(Tx, Ty) <= phi(D(x, y))
//   banach-perturbed  D(Tx, Ty) <= lambda * D(x, y),        lambda in (0, 1)
//   kannan-perturbed  D(Tx, Ty) <= lambda * [D(x,Tx) + D(y,Ty)], lambda in [0, 1/2)
//   banach-exact      the banach inequality against d = D - P
//   kannan-exact      the kannan inequality against d = D - P
//
// banach-perturbed is implemented by delegating to the phi check with
// phi(t) = lambda * t. A "holds-on-samples" verdict certifies only the
// absence of counterexamples among the checked pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "permet/comparison.hpp"
#include "permet/errors.hpp"
#include "permet/expr.hpp"
#include "permet/space.hpp"

namespace permet {

enum class ConditionKind { PhiPerturbed, KannanPerturbed, BanachPerturbed, KannanExact, BanachExact };

inline const char* to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::PhiPerturbed: return "phi-perturbed";
    case ConditionKind::KannanPerturbed: return "kannan-perturbed";
    case ConditionKind::BanachPerturbed: return "banach-perturbed";
    case ConditionKind::KannanExact: return "kannan-exact";
    case ConditionKind::BanachExact: return "banach-exact";
  }
  return "?";
}

inline ConditionKind condition_kind_from_string(std::string_view s) {
  if (s == "phi-perturbed" || s == "phi") return ConditionKind::PhiPerturbed;
  if (s == "kannan-perturbed" || s == "kannan") return ConditionKind::KannanPerturbed;
  if (s == "banach-perturbed" || s == "banach") return ConditionKind::BanachPerturbed;
  if (s == "kannan-exact") return ConditionKind::KannanExact;
  if (s == "banach-exact") return ConditionKind::BanachExact;
  throw ParameterError("unknown condition '" + std::string(s) + "'");
}

/// Comparison slack: absolute 1e-9 plus 1e-12 relative on the right-hand
/// side, so pairs that achieve exact equality never count as violations.
struct ConditionTolerance {
  double absolute = 1e-9;
  double relative = 1e-12;
  bool violates(double lhs, double rhs) const {
    return lhs > rhs + absolute + relative * std::fabs(rhs);
  }
};

struct Witness {
  double x = 0.0, y = 0.0;
  double lhs = 0.0, rhs = 0.0;
  double margin() const { return lhs - rhs; }
};

struct ConditionVerdict {
  ConditionKind kind = ConditionKind::PhiPerturbed;
  std::string parameter;  // "phi=t/3" or "lambda=0.45"
  bool holds = true;      // holds-on-samples
  std::optional<Witness> first;  // first violation in pair order
  std::optional<Witness> worst;  // largest margin, ties broken by (x, y)
  std::size_t violations = 0;
  std::size_t pairs_checked = 0;
  std::size_t indeterminate = 0;
};

namespace detail {

using PairList = std::span<const std::pair<double, double>>;

template <typename SideFn>
ConditionVerdict scan_condition(ConditionKind kind, std::string parameter, PairList pairs,
                                const ConditionTolerance& tol, SideFn&& sides) {
  ConditionVerdict verdict;
  verdict.kind = kind;
  verdict.parameter = std::move(parameter);
  verdict.pairs_checked = pairs.size();
  for (const auto& [x, y] : pairs) {
    double lhs = 0.0, rhs = 0.0;
    try {
      sides(x, y, lhs, rhs);
    } catch (const EvalError&) {
      ++verdict.indeterminate;
      continue;
    }
    if (tol.violates(lhs, rhs)) {
      ++verdict.violations;
      Witness w{x, y, lhs, rhs};
      if (!verdict.first) verdict.first = w;
      if (!verdict.worst || w.margin() > verdict.worst->margin() ||
          (w.margin() == verdict.worst->margin() &&
           std::pair(x, y) < std::pair(verdict.worst->x, verdict.worst->y))) {
        verdict.worst = w;
      }
    }
  }
  verdict.holds = verdict.violations == 0;
  return verdict;
}

}  // namespace detail

inline ConditionVerdict verify_phi_contraction(const PerturbedSpace& space, const SelfMap& map,
                                               const ComparisonCandidate& phi,
                                               detail::PairList pairs,
                                               ConditionTolerance tol = {}) {
  return detail::scan_condition(
      ConditionKind::PhiPerturbed, "phi=" + phi.label(), pairs, tol,
      [&](double x, double y, double& lhs, double& rhs) {
        lhs = space.perturbed_distance(map(x), map(y));
        rhs = phi(space.perturbed_distance(x, y));
      });
}

inline ConditionVerdict verify_kannan_perturbed(const PerturbedSpace& space, const SelfMap& map,
                                                double lambda, detail::PairList pairs,
                                                ConditionTolerance tol = {}) {
  if (!(lambda >= 0.0 && lambda < 0.5)) {
    throw ParameterError("lambda must lie in [0, 0.5) for the kannan conditions (got " +
                         format_double(lambda) + ")");
  }
  return detail::scan_condition(
      ConditionKind::KannanPerturbed, "lambda=" + format_double(lambda), pairs, tol,
      [&](double x, double y, double& lhs, double& rhs) {
        const double tx = map(x), ty = map(y);
        lhs = space.perturbed_distance(tx, ty);
        rhs = lambda * (space.perturbed_distance(x, tx) + space.perturbed_distance(y, ty));
      });
}

/// Delegates to the phi check with phi(t) = lambda * t, mirroring how the
/// constant-factor condition arises as a special comparison function.
inline ConditionVerdict verify_banach_perturbed(const PerturbedSpace& space, const SelfMap& map,
                                                double lambda, detail::PairList pairs,
                                                ConditionTolerance tol = {}) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ParameterError("lambda must lie in (0, 1) for the banach conditions (got " +
                         format_double(lambda) + ")");
  }
  ExprPtr scaled = make_expr(Binary{BinaryOp::Mul, make_constant(lambda), make_variable("t")});
  ComparisonCandidate phi(std::move(scaled), format_double(lambda) + "*t");
  ConditionVerdict verdict = verify_phi_contraction(space, map, phi, pairs, tol);
  verdict.kind = ConditionKind::BanachPerturbed;
  verdict.parameter = "lambda=" + format_double(lambda);
  return verdict;
}

inline ConditionVerdict verify_kannan_exact(const PerturbedSpace& space, const SelfMap& map,
                                            double lambda, detail::PairList pairs,
                                            ConditionTolerance tol = {}) {
  if (!(lambda >= 0.0 && lambda < 0.5)) {
    throw ParameterError("lambda must lie in [0, 0.5) for the kannan conditions (got " +
                         format_double(lambda) + ")");
  }
  return detail::scan_condition(
      ConditionKind::KannanExact, "lambda=" + format_double(lambda), pairs, tol,
      [&](double x, double y, double& lhs, double& rhs) {
        const double tx = map(x), ty = map(y);
        lhs = space.exact_distance(tx, ty);
        rhs = lambda * (space.exact_distance(x, tx) + space.exact_distance(y, ty));
      });
}

inline ConditionVerdict verify_banach_exact(const PerturbedSpace& space, const SelfMap& map,
                                            double lambda, detail::PairList pairs,
                                            ConditionTolerance tol = {}) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ParameterError("lambda must lie in (0, 1) for the banach conditions (got " +
                         format_double(lambda) + ")");
  }
  return detail::scan_condition(
      ConditionKind::BanachExact, "lambda=" + format_double(lambda), pairs, tol,
      [&](double x, double y, double& lhs, double& rhs) {
        lhs = space.exact_distance(map(x), map(y));
        rhs = lambda * space.exact_distance(x, y);
      });
}

// ---------------------------------------------------------------------------
// Minimal-constant estimation

struct LambdaEstimate {
  ConditionKind kind = ConditionKind::KannanPerturbed;
  double lambda_hat = 0.0;  // sup over non-degenerate pairs of lhs / rhs
  Witness attained;
  std::size_t pairs_scanned = 0;
  std::size_t degenerate_skipped = 0;  // lhs and rhs both below tolerance
  std::size_t hard_violations = 0;     // rhs ~ 0 but lhs > 0: no finite lambda
  std::optional<Witness> hard_witness;
  std::size_t indeterminate = 0;
  bool unbounded() const { return hard_violations > 0; }
};

/// Exhaustive supremum-of-ratios scan over the given pairs; deterministic and
/// reproducible, no local optimization. The result is a sampled lower bound
/// on the true supremum.
inline LambdaEstimate estimate_min_lambda(const PerturbedSpace& space, const SelfMap& map,
                                          detail::PairList pairs, ConditionKind kind,
                                          double degenerate_tolerance = 1e-9) {
  if (kind != ConditionKind::KannanPerturbed && kind != ConditionKind::KannanExact &&
      kind != ConditionKind::BanachPerturbed) {
    throw ParameterError("lambda estimation supports kannan-perturbed, kannan-exact and "
                         "banach-perturbed kinds");
  }
  if (pairs.empty()) throw EstimateError("no pairs supplied");

  LambdaEstimate estimate;
  estimate.kind = kind;
  estimate.pairs_scanned = pairs.size();
  bool found = false;
  for (const auto& [x, y] : pairs) {
    double lhs = 0.0, rhs = 0.0;
    try {
      const double tx = map(x), ty = map(y);
      switch (kind) {
        case ConditionKind::KannanPerturbed:
          lhs = space.perturbed_distance(tx, ty);
          rhs = space.perturbed_distance(x, tx) + space.perturbed_distance(y, ty);
          break;
        case ConditionKind::KannanExact:
          lhs = space.exact_distance(tx, ty);
          rhs = space.exact_distance(x, tx) + space.exact_distance(y, ty);
          break;
        default:
          lhs = space.perturbed_distance(tx, ty);
          rhs = space.perturbed_distance(x, y);
          break;
      }
    } catch (const EvalError&) {
      ++estimate.indeterminate;
      continue;
    }
    if (rhs <= degenerate_tolerance) {
      if (lhs > degenerate_tolerance) {
        ++estimate.hard_violations;
        if (!estimate.hard_witness) estimate.hard_witness = Witness{x, y, lhs, rhs};
      } else {
        ++estimate.degenerate_skipped;
      }
      continue;
    }
    const double ratio = lhs / rhs;
    if (!found || ratio > estimate.lambda_hat) {
      estimate.lambda_hat = ratio;
      estimate.attained = Witness{x, y, lhs, rhs};
      found = true;
    }
  }
  if (!found && !estimate.unbounded()) {
    throw EstimateError("all scanned pairs were degenerate or indeterminate");
  }
  return estimate;
}

// ---------------------------------------------------------------------------
// Continuity probe

enum class ProbeMetric { Exact, PerturbedD };

inline const char* to_string(ProbeMetric m) {
  return m == ProbeMetric::Exact ? "exact" : "perturbed-D";
}

struct ContinuityProbe {
  double point = 0.0;
  double jump = 0.0;  // last stable value of dist(T(p - delta), T(p + delta))
  std::vector<double> deltas;
  std::vector<double> values;
  ProbeMetric metric = ProbeMetric::Exact;
  bool discontinuous = false;
};

inline std::vector<double> default_probe_deltas() {
  return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
}

/// Evaluates dist(T(p - delta), T(p + delta)) along a decreasing delta
/// sequence; the jump estimate is the final value and the map is classified
/// discontinuous at p when it exceeds 1e3 * tolerance.
inline ContinuityProbe probe_continuity(const PerturbedSpace& space, const SelfMap& map,
                                        double point,
                                        std::vector<double> deltas = default_probe_deltas(),
                                        ProbeMetric metric = ProbeMetric::Exact,
                                        double tolerance = 1e-9) {
  const Interval& dom = space.domain();
  if (!(dom.lo < point && point < dom.hi)) {
    throw ParameterError("probe point must be interior to the domain");
  }
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || (i > 0 && !(deltas[i] < deltas[i - 1]))) {
      throw ParameterError("probe deltas must be strictly decreasing and positive");
    }
  }

  ContinuityProbe probe;
  probe.point = point;
  probe.metric = metric;
  for (double delta : deltas) {
    const double left = point - delta;
    const double right = point + delta;
    if (!dom.contains(left) || !dom.contains(right)) continue;
    const double a = map(left);
    const double b = map(right);
    const double v = metric == ProbeMetric::Exact ? space.exact_distance(a, b)
                                                  : space.perturbed_distance(a, b);
    probe.deltas.push_back(delta);
    probe.values.push_back(v);
  }
  if (probe.values.empty()) {
    throw ProbeError("no probe delta keeps both offsets inside the domain");
  }
  probe.jump = probe.values.back();
  probe.discontinuous = probe.jump > 1e3 * tolerance;
  return probe;
}

// ---------------------------------------------------------------------------
// Classification

struct ClassificationSummary {
  std::vector<ConditionVerdict> conditions;
  std::vector<ContinuityProbe> probes;

  const ConditionVerdict* find(ConditionKind kind) const {
    for (const auto& v : conditions)
      if (v.kind == kind) return &v;
    return nullptr;
  }
  bool any_holds() const {
    return std::any_of(conditions.begin(), conditions.end(),
                       [](const ConditionVerdict& v) { return v.holds; });
  }
};

/// Runs every applicable condition for the supplied parameters plus the
/// exact-metric comparisons, and probes continuity at the branch points of T
/// (or the domain midpoint when T has none). This is what surfaces findings
/// of the form "perturbed-Kannan but not Kannan for the exact metric".
inline ClassificationSummary classify(const PerturbedSpace& space, const SelfMap& map,
                                      const ComparisonCandidate* phi, const double* lambda,
                                      const SampleSet& samples, ConditionTolerance tol = {}) {
  if (phi == nullptr && lambda == nullptr) {
    throw ParameterError("classification needs a phi candidate and/or a lambda value");
  }
  ClassificationSummary summary;
  if (phi != nullptr) {
    summary.conditions.push_back(verify_phi_contraction(space, map, *phi, samples.pairs, tol));
  }
  if (lambda != nullptr) {
    if (*lambda >= 0.0 && *lambda < 0.5) {
      summary.conditions.push_back(verify_kannan_perturbed(space, map, *lambda, samples.pairs, tol));
      summary.conditions.push_back(verify_kannan_exact(space, map, *lambda, samples.pairs, tol));
    }
    if (*lambda > 0.0 && *lambda < 1.0) {
      summary.conditions.push_back(verify_banach_perturbed(space, map, *lambda, samples.pairs, tol));
      summary.conditions.push_back(verify_banach_exact(space, map, *lambda, samples.pairs, tol));
    }
  }

  std::vector<double> probe_points;
  for (double t : branch_thresholds(*map.expr())) {
    if (space.domain().lo < t && t < space.domain().hi) probe_points.push_back(t);
  }
  if (probe_points.empty()) probe_points.push_back(space.domain().midpoint());
  for (double p : probe_points) {
    summary.probes.push_back(probe_continuity(space, map, p));
  }
  return summary;
}

}  // namespace permet
