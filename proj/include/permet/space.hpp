#pragma once

// A perturbed metric space over a bounded real interval: a domain [lo, hi]
// together with two nonnegative bivariate maps D and P whose difference
// d = D - P is expected to be a genuine metric (the "exact" metric). The
// expectation is audited, not assumed; see axioms.hpp.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "permet/errors.hpp"
#include "permet/expr.hpp"

namespace permet {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
  double width() const { return hi - lo; }
  double midpoint() const { return lo + 0.5 * (hi - lo); }
};

namespace detail {

inline void require_variables(const Expr& e, const std::set<std::string>& allowed,
                              std::string_view role) {
  std::string stray;
  for (const std::string& v : free_variables(e)) {
    if (!allowed.contains(v)) {
      if (!stray.empty()) stray += ", ";
      stray += v;
    }
  }
  if (!stray.empty()) {
    throw ConfigError("unknown variable(s) in " + std::string(role) + ": " + stray);
  }
}

}  // namespace detail

class PerturbedSpace {
 public:
  PerturbedSpace(Interval domain, ExprPtr distance, ExprPtr perturbation, std::string label)
      : domain_(domain),
        distance_(std::move(distance)),
        perturbation_(std::move(perturbation)),
        label_(std::move(label)) {}

  /// Parses and validates the D and P expressions (free variables must be
  /// within {x, y}) and the domain bounds.
  static PerturbedSpace from_expressions(Interval domain, std::string_view distance_src,
                                         std::string_view perturbation_src,
                                         std::string label = {}) {
    if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi)) {
      throw ConfigError("domain bounds must be finite");
    }
    if (!(domain.lo < domain.hi)) {
      throw ConfigError("domain lower bound must be strictly below the upper bound");
    }
    ExprPtr distance = parse(distance_src);
    ExprPtr perturbation = parse(perturbation_src);
    detail::require_variables(*distance, {"x", "y"}, "D");
    detail::require_variables(*perturbation, {"x", "y"}, "P");
    return PerturbedSpace(domain, std::move(distance), std::move(perturbation), std::move(label));
  }

  double perturbed_distance(double x, double y) const {
    const Binding b[] = {{"x", x}, {"y", y}};
    return evaluate(*distance_, std::span<const Binding>(b, 2));
  }
  double perturbation(double x, double y) const {
    const Binding b[] = {{"x", x}, {"y", y}};
    return evaluate(*perturbation_, std::span<const Binding>(b, 2));
  }
  /// The exact metric d = D - P.
  double exact_distance(double x, double y) const {
    return perturbed_distance(x, y) - perturbation(x, y);
  }

  const Interval& domain() const { return domain_; }
  const std::string& label() const { return label_; }
  const ExprPtr& distance_expr() const { return distance_; }
  const ExprPtr& perturbation_expr() const { return perturbation_; }

 private:
  Interval domain_;
  ExprPtr distance_;
  ExprPtr perturbation_;
  std::string label_;
};

class SelfMap {
 public:
  SelfMap(ExprPtr expr, std::string label) : expr_(std::move(expr)), label_(std::move(label)) {}

  static SelfMap from_expression(std::string_view source, std::string label = {}) {
    ExprPtr expr = parse(source);
    detail::require_variables(*expr, {"x"}, "T");
    return SelfMap(std::move(expr), std::move(label));
  }

  double operator()(double x) const {
    const Binding b[] = {{"x", x}};
    return evaluate(*expr_, std::span<const Binding>(b, 1));
  }

  const ExprPtr& expr() const { return expr_; }
  const std::string& label() const { return label_; }

 private:
  ExprPtr expr_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// Sampling

struct SampleCounts {
  std::size_t points = 64;
  std::size_t pairs = 4096;
  std::size_t triples = 4096;
};

struct SampleSet {
  std::vector<double> points;
  std::vector<std::pair<double, double>> pairs;
  std::vector<std::array<double, 3>> triples;
  std::uint64_t seed = 0;
  std::string strategy;
};

namespace detail {

// Deterministic uniform doubles in [0, 1): fixed mapping from the raw 64-bit
// stream, independent of any library distribution implementation.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

inline bool try_constant_fold(const Expr& e, double& out) {
  if (!free_variables(e).empty()) return false;
  try {
    out = evaluate(e, std::span<const Binding>{});
  } catch (const EvalError&) {
    return false;
  }
  return true;
}

inline void collect_branch_thresholds(const Expr& e, std::vector<double>& out) {
  struct Visitor {
    std::vector<double>& out;
    void operator()(const Constant&) const {}
    void operator()(const Variable&) const {}
    void operator()(const Negate& u) const { collect_branch_thresholds(*u.operand, out); }
    void operator()(const Binary& b) const {
      collect_branch_thresholds(*b.lhs, out);
      collect_branch_thresholds(*b.rhs, out);
    }
    void operator()(const Call& c) const {
      for (const auto& a : c.args) collect_branch_thresholds(*a, out);
    }
    void operator()(const Conditional& c) const {
      double v = 0.0;
      if (try_constant_fold(*c.cmp_rhs, v)) out.push_back(v);
      if (try_constant_fold(*c.cmp_lhs, v)) out.push_back(v);
      collect_branch_thresholds(*c.cmp_lhs, out);
      collect_branch_thresholds(*c.cmp_rhs, out);
      collect_branch_thresholds(*c.if_true, out);
      collect_branch_thresholds(*c.if_false, out);
    }
  };
  std::visit(Visitor{out}, e.node());
}

}  // namespace detail

/// Comparison thresholds of every conditional in `e` whose constant side can
/// be folded; used as adversarial sample points and continuity-probe points.
inline std::vector<double> branch_thresholds(const Expr& e) {
  std::vector<double> out;
  detail::collect_branch_thresholds(e, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Offset used to straddle branch boundaries when sampling.
inline double boundary_offset(const Interval& domain) { return 1.0e-6 * domain.width(); }

/// Deterministic sample generation: a uniform grid including both endpoints,
/// seeded uniform-random points, and adversarial points at the branch
/// boundaries of D, P (and T when supplied) straddled by +-boundary_offset.
/// Pairs and triples are drawn from products of that pool; `required_pairs`
/// occupy the leading pair slots so that specific pairs are always checked.
inline SampleSet sample_points(const PerturbedSpace& space, SampleCounts counts,
                               std::uint64_t seed, const SelfMap* map = nullptr,
                               std::span<const std::pair<double, double>> required_pairs = {}) {
  const Interval& dom = space.domain();
  detail::SampleRng rng(seed);

  std::vector<double> pool;
  if (counts.points == 1) {
    pool.push_back(dom.midpoint());
  } else {
    for (std::size_t i = 0; i < counts.points; ++i) {
      pool.push_back(dom.lo + (dom.width() * static_cast<double>(i)) /
                                  static_cast<double>(counts.points - 1));
    }
  }
  for (std::size_t i = 0; i < counts.points; ++i) pool.push_back(rng.uniform(dom.lo, dom.hi));

  std::vector<double> thresholds = branch_thresholds(*space.distance_expr());
  for (double t : branch_thresholds(*space.perturbation_expr())) thresholds.push_back(t);
  if (map != nullptr) {
    for (double t : branch_thresholds(*map->expr())) thresholds.push_back(t);
  }
  const double delta = boundary_offset(dom);
  for (double t : thresholds) {
    if (!dom.contains(t)) continue;
    pool.push_back(t);
    if (dom.contains(t - delta)) pool.push_back(t - delta);
    if (dom.contains(t + delta)) pool.push_back(t + delta);
  }
  for (const auto& [a, b] : required_pairs) {
    if (!dom.contains(a) || !dom.contains(b)) {
      throw ConfigError("required pair (" + format_double(a) + ", " + format_double(b) +
                        ") lies outside the domain");
    }
    pool.push_back(a);
    pool.push_back(b);
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  SampleSet samples;
  samples.seed = seed;
  samples.strategy = "grid+random+branch-adversarial(points=" + std::to_string(counts.points) +
                     ",pairs=" + std::to_string(counts.pairs) +
                     ",triples=" + std::to_string(counts.triples) +
                     ",required_pairs=" + std::to_string(required_pairs.size()) + ")";
  samples.points = pool;

  for (const auto& p : required_pairs) {
    if (samples.pairs.size() >= counts.pairs) break;
    samples.pairs.push_back(p);
  }
  while (samples.pairs.size() < counts.pairs) {
    const double a = pool[rng.index(pool.size())];
    const double b = pool[rng.index(pool.size())];
    samples.pairs.emplace_back(a, b);
  }
  while (samples.triples.size() < counts.triples) {
    const double a = pool[rng.index(pool.size())];
    const double b = pool[rng.index(pool.size())];
    const double c = pool[rng.index(pool.size())];
    samples.triples.push_back({a, b, c});
  }
  return samples;
}

}  // namespace permet
