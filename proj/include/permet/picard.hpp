#pragma once

// Picard iteration x_{n+1} = T x_n with per-step a-priori error envelopes.
//
// Kannan mode: with gamma = lambda / (1 - lambda) in [0, 1), the step
// distances obey D(x_n, x_{n+1}) <= gamma^n * D0 and the distance to the
// fixed point obeys d(x_n, x*) <= gamma^n / (1 - gamma) * D0. The second
// bound is the p -> infinity limit of the finite-window bound
// d(x_n, x_{n+p}) <= gamma^n * (1 - gamma^p) / (1 - gamma) * D0.
//
// phi mode: D(x_n, x_{n+1}) <= phi^n(D0) and d(x_n, x*) <= sum_{k>=n}
// phi^k(D0). The infinite tail is truncated at a finite horizon and topped
// with a geometric remainder estimate; if the observed term ratio is not
// below 1 the bound is flagged as truncated (not certified).
//
// banach mode delegates to phi mode with phi(t) = lambda * t.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "permet/comparison.hpp"
#include "permet/errors.hpp"
#include "permet/space.hpp"

namespace permet {

enum class SolveMode { Phi, Kannan, Banach, ResidualOnly };

inline const char* to_string(SolveMode m) {
  switch (m) {
    case SolveMode::Phi: return "phi";
    case SolveMode::Kannan: return "kannan";
    case SolveMode::Banach: return "banach";
    case SolveMode::ResidualOnly: return "residual-only";
  }
  return "?";
}

inline SolveMode solve_mode_from_string(std::string_view s) {
  if (s == "phi") return SolveMode::Phi;
  if (s == "kannan") return SolveMode::Kannan;
  if (s == "banach") return SolveMode::Banach;
  if (s == "residual-only") return SolveMode::ResidualOnly;
  throw ParameterError("unknown solve mode '" + std::string(s) + "'");
}

enum class StopReason { BoundMet, ResidualZero, MaxIterations };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::BoundMet: return "bound-met";
    case StopReason::ResidualZero: return "residual-zero";
    case StopReason::MaxIterations: return "max-iterations";
  }
  return "?";
}

struct SolverParams {
  double x0 = 0.0;
  std::size_t max_iterations = 10000;
  double epsilon = 1e-8;  // target accuracy in the exact metric
  SolveMode mode = SolveMode::ResidualOnly;
  double lambda = 0.0;               // kannan / banach modes
  const ComparisonCandidate* phi = nullptr;  // phi mode
  std::size_t horizon = 200;         // tail-sum horizon K for phi mode
};

struct TraceStep {
  std::size_t n = 0;
  double x = 0.0;       // x_n
  double D_step = 0.0;  // D(x_n, x_{n+1})
  double d_step = 0.0;  // d(x_n, x_{n+1})
  std::optional<double> bound;  // mode's a-priori bound on d(x_n, x*)
};

struct SolveResult {
  std::vector<TraceStep> trace;
  StopReason reason = StopReason::MaxIterations;
  double fixed_point = 0.0;
  double residual_D = 0.0;  // D(x*, Tx*)
  double residual_d = 0.0;  // d(x*, Tx*)
  double D0 = 0.0;          // D(x0, x1)
  bool bound_truncated = false;
  bool accepted(double epsilon) const {
    return reason != StopReason::MaxIterations && residual_d <= epsilon;
  }
};

/// gamma^n / (1 - gamma) * D0 with gamma = lambda / (1 - lambda); bounds
/// d(x_n, x*) for every n under the kannan-perturbed condition.
inline double apriori_bound_kannan(double lambda, double D0, std::size_t n) {
  if (!(lambda >= 0.0 && lambda < 0.5)) {
    throw ParameterError("lambda must lie in [0, 0.5) for the kannan bound (got " +
                         format_double(lambda) + ")");
  }
  if (D0 < 0.0) throw ParameterError("D0 must be nonnegative");
  const double gamma = lambda / (1.0 - lambda);
  return std::pow(gamma, static_cast<double>(n)) / (1.0 - gamma) * D0;
}

struct PhiBound {
  double bound = 0.0;
  bool truncated = false;  // remainder not certified (observed ratio >= 1)
};

namespace detail {

/// Lazily extended iterate sequence phi^k(D0) with tail sums; used both by
/// the standalone bound and by the solver loop.
class PhiIterates {
 public:
  PhiIterates(const ComparisonCandidate& phi, double D0) : phi_(phi) { values_.push_back(D0); }

  double at(std::size_t k) {
    while (values_.size() <= k) values_.push_back(phi_(values_.back()));
    return values_[k];
  }

  /// sum_{k=n}^{n+K-1} phi^k(D0) plus a geometric remainder estimated from
  /// the first term beyond the window: with ratio = phi^{n+K}(D0) /
  /// phi^{n+K-1}(D0) < 1 the remainder is at most next / (1 - ratio).
  PhiBound tail_bound(std::size_t n, std::size_t horizon) {
    PhiBound result;
    double sum = 0.0;
    for (std::size_t k = n; k < n + horizon; ++k) sum += at(k);
    const double last = at(n + horizon - 1);
    const double next = at(n + horizon);
    if (last == 0.0 && next == 0.0) {
      result.bound = sum;
      return result;
    }
    if (next < last) {
      const double ratio = next / last;
      result.bound = sum + next / (1.0 - ratio);
      return result;
    }
    result.bound = sum;
    result.truncated = true;
    return result;
  }

 private:
  const ComparisonCandidate& phi_;
  std::vector<double> values_;
};

}  // namespace detail

/// Truncated tail sum sum_{k=n}^{n+K-1} phi^k(D0) with a geometric remainder
/// estimate; `truncated` is set when the observed term ratio is not below 1,
/// in which case the returned value is not a certified bound.
inline PhiBound apriori_bound_phi(const ComparisonCandidate& phi, double D0, std::size_t n,
                                  std::size_t horizon) {
  if (horizon < 1) throw ParameterError("phi bound horizon must be >= 1");
  if (D0 < 0.0) throw ParameterError("D0 must be nonnegative");
  detail::PhiIterates iterates(phi, D0);
  return iterates.tail_bound(n, horizon);
}

inline SolverParams validate_params(const PerturbedSpace& space, SolverParams params) {
  if (!(params.epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (params.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (!space.domain().contains(params.x0)) {
    throw ParameterError("x0 = " + format_double(params.x0) + " lies outside the domain");
  }
  switch (params.mode) {
    case SolveMode::Kannan:
      if (!(params.lambda >= 0.0 && params.lambda < 0.5)) {
        throw ParameterError("lambda must lie in [0, 0.5) for kannan mode (got " +
                             format_double(params.lambda) + ")");
      }
      break;
    case SolveMode::Banach:
      if (!(params.lambda > 0.0 && params.lambda < 1.0)) {
        throw ParameterError("lambda must lie in (0, 1) for banach mode (got " +
                             format_double(params.lambda) + ")");
      }
      break;
    case SolveMode::Phi:
      if (params.phi == nullptr) throw ParameterError("phi mode needs a phi candidate");
      if (params.horizon < 1) throw ParameterError("phi bound horizon must be >= 1");
      break;
    case SolveMode::ResidualOnly:
      break;
  }
  return params;
}

/// Runs the Picard iteration. Stops on the a-priori bound dropping below
/// epsilon (bound-met), on d(x_n, x_{n+1}) = 0 exactly for 3 consecutive
/// steps (residual-zero; this takes precedence while the step distance is
/// exactly zero), or at the iteration cap. Every step checks that T keeps
/// the iterate inside the domain.
inline SolveResult iterate(const PerturbedSpace& space, const SelfMap& map, SolverParams params) {
  params = validate_params(space, params);

  // banach mode = phi mode with phi(t) = lambda * t
  std::optional<ComparisonCandidate> scaled;
  const ComparisonCandidate* phi = params.phi;
  if (params.mode == SolveMode::Banach) {
    scaled.emplace(make_expr(Binary{BinaryOp::Mul, make_constant(params.lambda),
                                    make_variable("t")}),
                   format_double(params.lambda) + "*t");
    phi = &*scaled;
  }
  const bool phi_like = params.mode == SolveMode::Phi || params.mode == SolveMode::Banach;

  SolveResult result;
  double x = params.x0;
  double x_next = map(x);
  if (!space.domain().contains(x_next)) {
    throw DomainEscapeError("iterate T(x0) = " + format_double(x_next) +
                                " escaped the domain at step 0",
                            0, x_next);
  }
  result.D0 = space.perturbed_distance(x, x_next);

  std::optional<detail::PhiIterates> phi_iterates;
  if (phi_like) phi_iterates.emplace(*phi, result.D0);

  std::size_t zero_run = 0;
  for (std::size_t n = 0;; ++n) {
    TraceStep step;
    step.n = n;
    step.x = x;
    step.D_step = space.perturbed_distance(x, x_next);
    step.d_step = space.exact_distance(x, x_next);
    if (params.mode == SolveMode::Kannan) {
      step.bound = apriori_bound_kannan(params.lambda, result.D0, n);
    } else if (phi_like) {
      const PhiBound b = phi_iterates->tail_bound(n, params.horizon);
      step.bound = b.bound;
      result.bound_truncated = result.bound_truncated || b.truncated;
    }
    result.trace.push_back(step);

    zero_run = step.d_step == 0.0 ? zero_run + 1 : 0;
    if (zero_run >= 3) {
      result.reason = StopReason::ResidualZero;
      x = x_next;
      break;
    }
    // an exactly-zero step is stronger evidence than the envelope; let the
    // residual-zero rule claim those steps
    if (step.bound && step.d_step != 0.0 && *step.bound < params.epsilon) {
      result.reason = StopReason::BoundMet;
      x = x_next;
      break;
    }

    x = x_next;
    if (n + 1 >= params.max_iterations) {
      result.reason = StopReason::MaxIterations;
      break;
    }
    x_next = map(x);
    if (!space.domain().contains(x_next)) {
      throw DomainEscapeError("iterate T(x_" + std::to_string(n + 1) +
                                  ") = " + format_double(x_next) + " escaped the domain",
                              n + 1, x_next);
    }
  }

  result.fixed_point = x;
  const double tx = map(x);
  result.residual_D = space.perturbed_distance(x, tx);
  result.residual_d = space.exact_distance(x, tx);
  return result;
}

/// Fixed-point residuals at a single point: (D(x, Tx), d(x, Tx)). Acceptance
/// uses the exact metric; the report also states whether the stronger
/// requirement D(x, Tx) = 0 holds within tolerance.
struct Residual {
  double D = 0.0;
  double d = 0.0;
};

inline Residual residual(const PerturbedSpace& space, const SelfMap& map, double x) {
  const double tx = map(x);
  return {space.perturbed_distance(x, tx), space.exact_distance(x, tx)};
}

// ---------------------------------------------------------------------------
// Multi-start uniqueness probe

struct StartOutcome {
  double x0 = 0.0;
  double fixed_point = 0.0;
  StopReason reason = StopReason::MaxIterations;
  double residual_d = 0.0;
  double residual_D = 0.0;
  bool accepted = false;
};

struct UniquenessReport {
  bool consistent = false;
  double agreement_tolerance = 0.0;  // 10 * epsilon, in the exact metric
  std::vector<StartOutcome> starts;
  std::vector<double> distinct_limits;  // representatives of accepted limits
};

/// Runs the solver from every start; consistent iff every run is accepted and
/// all accepted fixed points agree within 10 * epsilon in the exact metric.
inline UniquenessReport uniqueness_probe(const PerturbedSpace& space, const SelfMap& map,
                                         std::span<const double> starts, SolverParams params) {
  if (starts.size() < 2) throw ParameterError("uniqueness probe needs at least 2 starts");
  UniquenessReport report;
  report.agreement_tolerance = 10.0 * params.epsilon;

  std::vector<double> accepted_limits;
  for (double s : starts) {
    SolverParams p = params;
    p.x0 = s;
    try {
      const SolveResult r = iterate(space, map, p);
      StartOutcome outcome;
      outcome.x0 = s;
      outcome.fixed_point = r.fixed_point;
      outcome.reason = r.reason;
      outcome.residual_d = r.residual_d;
      outcome.residual_D = r.residual_D;
      outcome.accepted = r.accepted(params.epsilon);
      if (outcome.accepted) accepted_limits.push_back(r.fixed_point);
      report.starts.push_back(outcome);
    } catch (const Error& e) {
      throw ProbeError("solve from x0 = " + format_double(s) + " failed: " + e.what());
    }
  }

  std::sort(accepted_limits.begin(), accepted_limits.end());
  for (double v : accepted_limits) {
    bool matched = false;
    for (double rep : report.distinct_limits) {
      try {
        if (space.exact_distance(rep, v) <= report.agreement_tolerance) {
          matched = true;
          break;
        }
      } catch (const EvalError&) {
      }
    }
    if (!matched) report.distinct_limits.push_back(v);
  }
  report.consistent = report.starts.size() == accepted_limits.size() &&
                      report.distinct_limits.size() == 1;
  return report;
}

}  // namespace permet
