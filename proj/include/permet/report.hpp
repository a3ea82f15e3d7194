#pragma once

// Report assembly and rendering. Sections appear in the fixed order
//   meta, axioms, comparison, conditions, lambda_estimate, continuity,
//   solve, uniqueness
// and floating values are rendered with 17 significant digits, so identical
// runs produce byte-identical documents.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "permet/axioms.hpp"
#include "permet/comparison.hpp"
#include "permet/contraction.hpp"
#include "permet/errors.hpp"
#include "permet/picard.hpp"

namespace permet {

namespace detail {

inline void append_json_string(const std::string& s, std::string& out) {
  out += '"';
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

inline void render_json_value(const nlohmann::ordered_json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        append_json_string(key, out);
        out += ": ";
        render_json_value(value, indent + 1, out);
      }
      out += '\n';
      out += pad;
      out += '}';
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        render_json_value(item, indent + 1, out);
      }
      out += '\n';
      out += pad;
      out += ']';
      return;
    }
    case nlohmann::ordered_json::value_t::string:
      append_json_string(v.get_ref<const std::string&>(), out);
      return;
    case nlohmann::ordered_json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      return;
    case nlohmann::ordered_json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      return;
    case nlohmann::ordered_json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      return;
    case nlohmann::ordered_json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      out += format_double(d);
      return;
    }
    default:
      out += "null";
      return;
  }
}

}  // namespace detail

/// Deterministic renderer: preserved key order, 2-space indent, floats with
/// 17 significant digits, trailing newline.
inline std::string render_json(const nlohmann::ordered_json& doc) {
  std::string out;
  detail::render_json_value(doc, 0, out);
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Section builders

inline nlohmann::ordered_json json_witness(const Witness& w) {
  return {{"x", w.x}, {"y", w.y}, {"lhs", w.lhs}, {"rhs", w.rhs}};
}

inline nlohmann::ordered_json json_axiom_check(const AxiomCheck& check) {
  nlohmann::ordered_json j;
  j["verdict"] = check.pass ? "pass" : "fail";
  j["violations"] = check.violations;
  if (!check.examples.empty()) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& v : check.examples) {
      list.push_back({{"witness", v.witness}, {"lhs", v.lhs}, {"rhs", v.rhs}});
    }
    j["counterexamples"] = list;
  }
  return j;
}

inline nlohmann::ordered_json json_axioms(const AxiomReport& report) {
  nlohmann::ordered_json j;
  j["tolerance"] = report.tolerance;
  j["samples"] = {{"points", report.points_checked},
                  {"pairs", report.pairs_checked},
                  {"triples", report.triples_checked}};
  j["indeterminate"] = report.indeterminate;
  if (!report.indeterminate_notes.empty()) j["indeterminate_notes"] = report.indeterminate_notes;
  j["checks"] = {{"nonnegativity", json_axiom_check(report.nonnegativity)},
                 {"identity", json_axiom_check(report.identity)},
                 {"symmetry", json_axiom_check(report.symmetry)},
                 {"triangle", json_axiom_check(report.triangle)},
                 {"codomain_D", json_axiom_check(report.codomain_D)},
                 {"codomain_P", json_axiom_check(report.codomain_P)}};
  j["completeness"] = "assumed, not audited";
  j["note"] = "sampled audit: a pass certifies only the absence of counterexamples "
              "among the checked samples";
  return j;
}

inline nlohmann::ordered_json json_comparison(const ComparisonReport& report) {
  nlohmann::ordered_json j;
  j["label"] = report.label;
  j["t_grid"] = report.t_grid;
  j["eps_grid"] = report.eps_grid;
  j["codomain"] = nlohmann::ordered_json::object();
  j["codomain"]["verdict"] = report.codomain_pass ? "pass" : "fail";
  if (report.codomain_witness) {
    j["codomain"]["witness"] = {{"t", report.codomain_witness->first},
                                {"phi_t", report.codomain_witness->second}};
  }
  j["phi1"] = nlohmann::ordered_json::object();
  j["phi1"]["verdict"] = report.phi1.pass ? "pass" : "counterexample";
  if (report.phi1.witness) {
    j["phi1"]["witness"] = {{"t1", report.phi1.witness->t1},
                            {"t2", report.phi1.witness->t2},
                            {"phi_t1", report.phi1.witness->phi1},
                            {"phi_t2", report.phi1.witness->phi2}};
  }
  nlohmann::ordered_json phi2 = nlohmann::ordered_json::array();
  for (const auto& v : report.phi2) {
    phi2.push_back({{"t", v.t},
                    {"status", std::string(to_string(v.status))},
                    {"partial_sum", v.partial_sum},
                    {"terms", v.terms},
                    {"evidence", v.evidence}});
  }
  j["phi2"] = {{"max_terms", report.phi2_max_terms},
               {"tail_tolerance", report.phi2_tail_tolerance},
               {"verdicts", phi2}};
  nlohmann::ordered_json decay = nlohmann::ordered_json::array();
  for (const auto& r : report.rus.decay) {
    nlohmann::ordered_json item = {{"t", r.t}, {"verdict", r.pass ? "pass" : "fail"}};
    if (r.pass)
      item["iterations"] = r.iterations;
    else
      item["final_value"] = r.final_value;
    decay.push_back(item);
  }
  nlohmann::ordered_json rus;
  rus["a_decay"] = {{"verdict", report.rus.decay_pass ? "pass" : "fail"}, {"per_t", decay}};
  rus["b_strict_below"] = nlohmann::ordered_json::object();
  rus["b_strict_below"]["verdict"] = report.rus.strict_below_pass ? "pass" : "fail";
  if (report.rus.strict_below_witness) {
    rus["b_strict_below"]["witness"] = {{"t", report.rus.strict_below_witness->first},
                                        {"phi_t", report.rus.strict_below_witness->second}};
  }
  nlohmann::ordered_json trail = nlohmann::ordered_json::array();
  for (const auto& [eps, v] : report.rus.continuity_trail) {
    trail.push_back({{"eps", eps}, {"phi_eps", v}});
  }
  rus["c_continuity_at_zero"] = {
      {"verdict", report.rus.continuity_at_zero_pass ? "pass" : "fail"}, {"trail", trail}};
  j["rus"] = rus;
  j["heuristic"] = report.heuristic;
  j["note"] = "phi2 and rus verdicts are heuristic: finite grids and iteration budgets "
              "cannot certify statements quantified over all t";
  return j;
}

inline nlohmann::ordered_json json_condition(const ConditionVerdict& v) {
  nlohmann::ordered_json j;
  j["condition"] = std::string(to_string(v.kind));
  j["parameter"] = v.parameter;
  j["status"] = v.holds ? "holds-on-samples" : "counterexample";
  j["pairs_checked"] = v.pairs_checked;
  j["violations"] = v.violations;
  j["indeterminate"] = v.indeterminate;
  if (v.first) j["first"] = json_witness(*v.first);
  if (v.worst) j["worst"] = json_witness(*v.worst);
  return j;
}

inline nlohmann::ordered_json json_conditions(const std::vector<ConditionVerdict>& verdicts) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) arr.push_back(json_condition(v));
  return arr;
}

inline nlohmann::ordered_json json_lambda_estimate(const LambdaEstimate& e) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(e.kind));
  j["unbounded"] = e.unbounded();
  if (e.unbounded()) {
    j["hard_violations"] = e.hard_violations;
    if (e.hard_witness) j["hard_witness"] = json_witness(*e.hard_witness);
  }
  j["lambda_hat"] = e.lambda_hat;
  j["attained_at"] = {e.attained.x, e.attained.y};
  j["lhs"] = e.attained.lhs;
  j["rhs"] = e.attained.rhs;
  j["pairs_scanned"] = e.pairs_scanned;
  j["degenerate_skipped"] = e.degenerate_skipped;
  j["indeterminate"] = e.indeterminate;
  j["note"] = "sampled lower bound on the true supremum";
  return j;
}

inline nlohmann::ordered_json json_continuity(const std::vector<ContinuityProbe>& probes) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : probes) {
    arr.push_back({{"point", p.point},
                   {"metric", std::string(to_string(p.metric))},
                   {"jump", p.jump},
                   {"discontinuous", p.discontinuous},
                   {"deltas", p.deltas},
                   {"values", p.values}});
  }
  return arr;
}

inline nlohmann::ordered_json json_solve_run(const SolveResult& r, double x0, SolveMode mode,
                                             const std::string& parameter,
                                             const std::string& trace_file) {
  nlohmann::ordered_json j;
  j["x0"] = x0;
  j["mode"] = std::string(to_string(mode));
  if (!parameter.empty()) j["parameter"] = parameter;
  j["stop_reason"] = std::string(to_string(r.reason));
  j["iterations"] = r.trace.size();
  j["fixed_point"] = r.fixed_point;
  j["residual_D"] = r.residual_D;
  j["residual_d"] = r.residual_d;
  j["D0"] = r.D0;
  j["bound_truncated"] = r.bound_truncated;
  if (!trace_file.empty()) j["trace_file"] = trace_file;
  return j;
}

inline nlohmann::ordered_json json_uniqueness(const UniquenessReport& report) {
  nlohmann::ordered_json j;
  j["consistent"] = report.consistent;
  j["agreement_tolerance"] = report.agreement_tolerance;
  nlohmann::ordered_json starts = nlohmann::ordered_json::array();
  for (const auto& s : report.starts) {
    starts.push_back({{"x0", s.x0},
                      {"fixed_point", s.fixed_point},
                      {"stop_reason", std::string(to_string(s.reason))},
                      {"residual_d", s.residual_d},
                      {"accepted", s.accepted}});
  }
  j["starts"] = starts;
  j["distinct_limits"] = report.distinct_limits;
  return j;
}

// ---------------------------------------------------------------------------
// Trace CSV

inline std::string render_trace_csv(const SolveResult& result) {
  std::string out = "n,x_n,D_step,d_step,bound\n";
  for (const TraceStep& s : result.trace) {
    out += std::to_string(s.n);
    out += ',';
    out += format_double(s.x);
    out += ',';
    out += format_double(s.D_step);
    out += ',';
    out += format_double(s.d_step);
    out += ',';
    if (s.bound) out += format_double(*s.bound);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed to write '" + path + "'");
}

}  // namespace permet
