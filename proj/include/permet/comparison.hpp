#pragma once

// Numerical audit of a candidate comparison function phi: [0,inf) -> [0,inf).
// Two defining conditions are checked on finite grids:
//   (phi1) phi is nondecreasing;
//   (phi2) the iterate series sum_{n>=1} phi^n(t) converges for every t.
// Plus three derived properties: (a) phi^n(t) -> 0, (b) phi(t) < t for t > 0,
// (c) continuity at 0. Summability is undecidable by finite sampling, so the
// phi2 verdict is three-valued and explicitly labeled heuristic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "permet/errors.hpp"
#include "permet/expr.hpp"
#include "permet/space.hpp"

namespace permet {

class ComparisonCandidate {
 public:
  ComparisonCandidate(ExprPtr expr, std::string label)
      : expr_(std::move(expr)), label_(std::move(label)) {}

  static ComparisonCandidate from_expression(std::string_view source, std::string label = {}) {
    ExprPtr expr = parse(source);
    detail::require_variables(*expr, {"t"}, "phi");
    if (label.empty()) label = source;
    return ComparisonCandidate(std::move(expr), std::move(label));
  }

  double operator()(double t) const {
    const Binding b[] = {{"t", t}};
    return evaluate(*expr_, std::span<const Binding>(b, 1));
  }

  const ExprPtr& expr() const { return expr_; }
  const std::string& label() const { return label_; }

 private:
  ExprPtr expr_;
  std::string label_;
};

// Default grids; they cover the scales that matter for the built-in catalog.
inline std::vector<double> default_t_grid() { return {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}; }
inline std::vector<double> default_eps_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 8; ++k) g.push_back(std::pow(10.0, -k));
  return g;
}
inline constexpr std::size_t kDefaultPhi2Terms = 200;
inline constexpr double kDefaultPhi2TailTolerance = 1e-10;
inline constexpr std::size_t kDefaultRusIterationCap = 1000;

struct MonotoneWitness {
  double t1, t2;      // violating grid pair, t1 < t2
  double phi1, phi2;  // phi(t1) > phi(t2)
};

struct Phi1Verdict {
  bool pass = true;
  std::optional<MonotoneWitness> witness;
};

enum class Phi2Status { Converged, Diverging, Inconclusive };

inline const char* to_string(Phi2Status s) {
  switch (s) {
    case Phi2Status::Converged: return "converged";
    case Phi2Status::Diverging: return "diverging";
    case Phi2Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Phi2Verdict {
  double t = 0.0;
  Phi2Status status = Phi2Status::Inconclusive;
  double partial_sum = 0.0;
  std::size_t terms = 0;
  std::string evidence;
};

struct RusDecayResult {  // property (a) at one grid point
  double t = 0.0;
  bool pass = false;
  std::size_t iterations = 0;  // first n with phi^n(t) < 1e-8 when pass
  double final_value = 0.0;
};

struct RusReport {
  bool decay_pass = true;  // (a) phi^n(t) -> 0 within the iteration cap
  std::vector<RusDecayResult> decay;
  bool strict_below_pass = true;  // (b) phi(t) < t for every grid t > 0
  std::optional<std::pair<double, double>> strict_below_witness;  // (t, phi(t))
  bool continuity_at_zero_pass = true;  // (c) phi(eps) -> 0 along eps_grid
  std::vector<std::pair<double, double>> continuity_trail;        // (eps, phi(eps))
};

struct ComparisonReport {
  std::string label;
  bool codomain_pass = true;
  std::optional<std::pair<double, double>> codomain_witness;  // (t, phi(t) < 0)
  Phi1Verdict phi1;
  std::vector<Phi2Verdict> phi2;
  std::size_t phi2_max_terms = kDefaultPhi2Terms;
  double phi2_tail_tolerance = kDefaultPhi2TailTolerance;
  RusReport rus;
  std::vector<double> t_grid;
  std::vector<double> eps_grid;
  // Finite grids cannot certify claims quantified over all t >= 0.
  bool heuristic = true;
};

/// (phi1): pass iff phi(t_i) <= phi(t_{i+1}) + 1e-12 for consecutive grid
/// points. The grid must be sorted ascending with nonnegative entries.
inline Phi1Verdict check_phi1(const ComparisonCandidate& phi, const std::vector<double>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || (i > 0 && grid[i] < grid[i - 1])) {
      throw ParameterError("phi1 grid must be sorted ascending with nonnegative entries");
    }
  }
  Phi1Verdict verdict;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = phi(grid[i]);
    const double b = phi(grid[i + 1]);
    if (a > b + 1e-12) {
      verdict.pass = false;
      verdict.witness = MonotoneWitness{grid[i], grid[i + 1], a, b};
      return verdict;
    }
  }
  return verdict;
}

/// (phi2) at a single t: iterate s_n = phi(s_{n-1}) from s_0 = t, accumulate
/// the partial sum of s_1..s_N, and classify. Converged requires the last
/// ceil(N/10) terms to sit below tail_tolerance * max(1, partial sum) AND to
/// decrease at an observed geometric-or-faster ratio < 1. Diverging means the
/// sum blew past the overflow guard or the terms failed to decrease across
/// the window. Everything else is inconclusive.
inline Phi2Verdict check_phi2_at(const ComparisonCandidate& phi, double t, std::size_t max_terms,
                                 double tail_tolerance) {
  constexpr double kOverflowGuard = 1e300;
  Phi2Verdict verdict;
  verdict.t = t;

  std::vector<double> terms;
  terms.reserve(max_terms);
  double s = t;
  double sum = 0.0;
  for (std::size_t n = 1; n <= max_terms; ++n) {
    s = phi(s);
    if (s < 0.0) {
      verdict.status = Phi2Status::Inconclusive;
      verdict.partial_sum = sum;
      verdict.terms = terms.size();
      verdict.evidence = "iterate left the codomain (phi value below 0)";
      return verdict;
    }
    terms.push_back(s);
    sum += s;
    if (sum > kOverflowGuard) {
      verdict.status = Phi2Status::Diverging;
      verdict.partial_sum = sum;
      verdict.terms = terms.size();
      verdict.evidence = "partial sum exceeded the overflow guard";
      return verdict;
    }
  }
  verdict.partial_sum = sum;
  verdict.terms = terms.size();

  const std::size_t window = (max_terms + 9) / 10;
  const double small = tail_tolerance * std::fmax(1.0, sum);
  bool tail_small = true;
  bool tail_geometric = true;
  for (std::size_t k = terms.size() - window; k < terms.size(); ++k) {
    if (terms[k] >= small) tail_small = false;
    if (k > 0) {
      const double prev = terms[k - 1];
      const double ratio = prev > 0.0 ? terms[k] / prev : (terms[k] > 0.0 ? 2.0 : 0.0);
      if (!(ratio < 1.0)) tail_geometric = false;
    }
  }
  if (tail_small && tail_geometric) {
    verdict.status = Phi2Status::Converged;
    verdict.evidence = "tail terms below tolerance and decreasing geometrically";
    return verdict;
  }

  const double mid = terms[terms.size() / 2 - 1];
  const double last = terms.back();
  if (last >= mid * (1.0 - 1e-12)) {
    verdict.status = Phi2Status::Diverging;
    verdict.evidence = "terms failed to decrease across the iteration window";
    return verdict;
  }
  verdict.status = Phi2Status::Inconclusive;
  verdict.evidence = "terms decrease too slowly to certify summability";
  return verdict;
}

inline std::vector<Phi2Verdict> check_phi2(const ComparisonCandidate& phi,
                                           const std::vector<double>& t_grid,
                                           std::size_t max_terms = kDefaultPhi2Terms,
                                           double tail_tolerance = kDefaultPhi2TailTolerance) {
  if (max_terms < 10) throw ParameterError("phi2 needs at least 10 terms");
  std::vector<Phi2Verdict> verdicts;
  verdicts.reserve(t_grid.size());
  for (double t : t_grid) verdicts.push_back(check_phi2_at(phi, t, max_terms, tail_tolerance));
  return verdicts;
}

/// Derived properties (a), (b), (c).
inline RusReport check_rus_properties(const ComparisonCandidate& phi,
                                      const std::vector<double>& t_grid,
                                      std::size_t iteration_cap = kDefaultRusIterationCap,
                                      std::vector<double> eps_grid = default_eps_grid()) {
  if (iteration_cap < 50) throw ParameterError("rus property (a) needs an iteration cap >= 50");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw ParameterError("rus property grid entries must be positive");
  }

  RusReport report;
  for (double t : t_grid) {
    RusDecayResult r;
    r.t = t;
    double s = t;
    for (std::size_t n = 1; n <= iteration_cap; ++n) {
      s = phi(s);
      if (s < 1e-8) {
        r.pass = true;
        r.iterations = n;
        break;
      }
    }
    r.final_value = s;
    if (!r.pass) report.decay_pass = false;
    report.decay.push_back(r);
  }

  for (double t : t_grid) {
    const double v = phi(t);
    if (!(v < t)) {
      report.strict_below_pass = false;
      report.strict_below_witness = {t, v};
      break;
    }
  }

  std::sort(eps_grid.begin(), eps_grid.end(), std::greater<>());
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : eps_grid) {
    const double v = phi(eps);
    report.continuity_trail.emplace_back(eps, v);
    if (v > prev + 1e-12) report.continuity_at_zero_pass = false;
    prev = v;
  }
  if (report.continuity_trail.empty() || !(report.continuity_trail.back().second < 1e-6)) {
    report.continuity_at_zero_pass = false;
  }
  return report;
}

/// Full audit with the default grids: codomain spot-check, phi1, phi2, and
/// the derived properties, assembled into one report.
inline ComparisonReport run_comparison(const ComparisonCandidate& phi,
                                       std::vector<double> t_grid = default_t_grid(),
                                       std::size_t max_terms = kDefaultPhi2Terms,
                                       double tail_tolerance = kDefaultPhi2TailTolerance,
                                       std::size_t iteration_cap = kDefaultRusIterationCap,
                                       std::vector<double> eps_grid = default_eps_grid()) {
  ComparisonReport report;
  report.label = phi.label();
  report.t_grid = t_grid;
  report.eps_grid = eps_grid;
  report.phi2_max_terms = max_terms;
  report.phi2_tail_tolerance = tail_tolerance;

  std::vector<double> codomain_probe = t_grid;
  codomain_probe.push_back(0.0);
  for (double e : eps_grid) codomain_probe.push_back(e);
  for (double t : codomain_probe) {
    const double v = phi(t);
    if (v < 0.0) {
      report.codomain_pass = false;
      report.codomain_witness = {t, v};
      break;
    }
  }

  report.phi1 = check_phi1(phi, t_grid);
  report.phi2 = check_phi2(phi, t_grid, max_terms, tail_tolerance);
  report.rus = check_rus_properties(phi, t_grid, iteration_cap, eps_grid);
  return report;
}

inline bool comparison_all_pass(const ComparisonReport& r, bool strict) {
  if (!r.codomain_pass || !r.phi1.pass) return false;
  if (!r.rus.decay_pass || !r.rus.strict_below_pass || !r.rus.continuity_at_zero_pass) return false;
  for (const auto& v : r.phi2) {
    if (v.status == Phi2Status::Diverging) return false;
    if (strict && v.status != Phi2Status::Converged) return false;
  }
  return true;
}

}  // namespace permet
