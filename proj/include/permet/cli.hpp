#pragma once

// Command-line entry point. Subcommands:
//   audit            metric axioms + phi-family checks
//   verify           contraction conditions over sampled pairs
//   solve            Picard iteration with bounds + multi-start uniqueness
//   classify         everything
//   estimate-lambda  supremum-of-ratios scan for the minimal constant
//   catalog          list / export the built-in instances
//
// Exit codes: 0 all requested checks pass / converge, 1 a counterexample or
// non-convergence was found (report still written), 2 configuration or usage
// error (single-line diagnostic on standard error).

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "permet/catalog.hpp"
#include "permet/config.hpp"
#include "permet/report.hpp"
#include "permet/version.hpp"

namespace permet::cli {

namespace detail {

struct CommonOptions {
  std::string config_path;
  std::string builtin_id;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> report_path;
  std::optional<std::string> trace_path;
  std::optional<double> lambda;
  std::optional<std::string> phi;
  bool strict = false;
};

inline void add_common(CLI::App* cmd, CommonOptions& opts, bool wants_trace) {
  auto* config = cmd->add_option("--config", opts.config_path, "path to a JSON run configuration");
  auto* builtin = cmd->add_option("--builtin", opts.builtin_id, "id of a built-in catalog instance");
  config->excludes(builtin);
  builtin->excludes(config);
  cmd->add_option("--seed", opts.seed, "sampling seed (overrides config and " +
                                           std::string(kSeedEnvVar) + ")");
  cmd->add_option("--report", opts.report_path, "write the JSON report to this path");
  if (wants_trace) {
    cmd->add_option("--trace", opts.trace_path,
                    "write solve traces as CSV (suffixed per start when several)");
  }
  cmd->add_option("--lambda", opts.lambda, "contraction constant override");
  cmd->add_option("--phi", opts.phi, "comparison function override, an expression in t");
  cmd->add_flag("--strict", opts.strict, "treat inconclusive phi2 verdicts as failures");
}

struct Instance {
  RunConfig cfg;
  std::optional<std::string> builtin_id;
  const CatalogEntry* entry = nullptr;
};

inline Instance load_instance(const CommonOptions& opts, bool needs_source) {
  Instance inst;
  if (!opts.builtin_id.empty()) {
    inst.entry = &builtin(opts.builtin_id);
    inst.builtin_id = opts.builtin_id;
    inst.cfg = RunConfig::from_catalog(*inst.entry);
  } else if (!opts.config_path.empty()) {
    inst.cfg = RunConfig::from_file(opts.config_path);
  } else if (needs_source) {
    throw ConfigError("either --config or --builtin is required");
  }
  if (opts.seed) inst.cfg.sampling.seed = *opts.seed;
  if (opts.lambda) inst.cfg.lambda = *opts.lambda;
  if (opts.phi) inst.cfg.phi_src = *opts.phi;
  if (opts.report_path) inst.cfg.output.report = *opts.report_path;
  if (opts.trace_path) inst.cfg.output.trace = *opts.trace_path;
  return inst;
}

struct Pipeline {
  Instance inst;
  std::optional<PerturbedSpace> space;
  std::optional<SelfMap> map;
  std::optional<ComparisonCandidate> phi;
  std::optional<SampleSet> samples;

  const RunConfig& cfg() const { return inst.cfg; }

  void build(bool needs_map) {
    const RunConfig& c = inst.cfg;
    space.emplace(PerturbedSpace::from_expressions(c.domain, c.D_src, c.P_src, c.space_label));
    if (c.T_src) {
      map.emplace(SelfMap::from_expression(*c.T_src, c.map_label));
    } else if (needs_map) {
      throw ConfigError("this subcommand needs a 'map' block (the self-map T)");
    }
    if (c.phi_src) phi.emplace(ComparisonCandidate::from_expression(*c.phi_src));
    SampleCounts counts{c.sampling.points, c.sampling.pairs, c.sampling.triples};
    samples = sample_points(*space, counts, c.sampling.seed, map ? &*map : nullptr,
                            c.sampling.include_pairs);
  }

  nlohmann::ordered_json meta(const char* subcommand, bool strict) const {
    nlohmann::ordered_json m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    if (inst.builtin_id) m["builtin"] = *inst.builtin_id;
    m["strict"] = strict;
    m["seed"] = cfg().sampling.seed;
    m["counts"] = {{"points", cfg().sampling.points},
                   {"pairs", cfg().sampling.pairs},
                   {"triples", cfg().sampling.triples}};
    m["config"] = cfg().echo();
    return m;
  }

  std::vector<ConditionVerdict> run_conditions(const std::vector<ConditionKind>& kinds,
                                               std::span<const std::pair<double, double>> pairs) {
    std::vector<ConditionVerdict> verdicts;
    for (ConditionKind kind : kinds) {
      switch (kind) {
        case ConditionKind::PhiPerturbed:
          if (!phi) throw ConfigError("the phi-perturbed condition needs a 'phi' expression");
          verdicts.push_back(verify_phi_contraction(*space, *map, *phi, pairs));
          break;
        case ConditionKind::KannanPerturbed:
          verdicts.push_back(verify_kannan_perturbed(*space, *map, require_lambda(), pairs));
          break;
        case ConditionKind::KannanExact:
          verdicts.push_back(verify_kannan_exact(*space, *map, require_lambda(), pairs));
          break;
        case ConditionKind::BanachPerturbed:
          verdicts.push_back(verify_banach_perturbed(*space, *map, require_lambda(), pairs));
          break;
        case ConditionKind::BanachExact:
          verdicts.push_back(verify_banach_exact(*space, *map, require_lambda(), pairs));
          break;
      }
    }
    return verdicts;
  }

  double require_lambda() const {
    if (!cfg().lambda) throw ConfigError("this condition needs a 'lambda' value");
    return *cfg().lambda;
  }

  std::vector<ConditionKind> applicable_conditions() const {
    std::vector<ConditionKind> kinds;
    if (phi) kinds.push_back(ConditionKind::PhiPerturbed);
    if (cfg().lambda) {
      const double l = *cfg().lambda;
      if (l >= 0.0 && l < 0.5) {
        kinds.push_back(ConditionKind::KannanPerturbed);
        kinds.push_back(ConditionKind::KannanExact);
      }
      if (l > 0.0 && l < 1.0) {
        kinds.push_back(ConditionKind::BanachPerturbed);
        kinds.push_back(ConditionKind::BanachExact);
      }
    }
    if (kinds.empty()) {
      throw ConfigError("no applicable condition: supply 'phi' and/or an admissible 'lambda'");
    }
    return kinds;
  }

  SolverParams solver_params() const {
    SolverParams p;
    p.epsilon = cfg().solve.epsilon;
    p.max_iterations = cfg().solve.max_iterations;
    p.horizon = cfg().solve.horizon;
    p.mode = cfg().effective_mode();
    if (p.mode == SolveMode::Kannan || p.mode == SolveMode::Banach) p.lambda = require_lambda();
    if (p.mode == SolveMode::Phi) {
      if (!phi) throw ConfigError("phi solve mode needs a 'phi' expression");
      p.phi = &*phi;
    }
    return p;
  }

  std::string solve_parameter_label(SolveMode mode) const {
    if (mode == SolveMode::Kannan || mode == SolveMode::Banach) {
      return "lambda=" + format_double(*cfg().lambda);
    }
    if (mode == SolveMode::Phi) return "phi=" + phi->label();
    return {};
  }
};

inline std::string trace_path_for(const std::string& base, std::size_t index, std::size_t total) {
  if (total <= 1) return base;
  const std::size_t slash = base.find_last_of("/\\");
  std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && slash != std::string::npos && dot < slash) {
    dot = std::string::npos;  // a dot in a directory name is not an extension
  }
  const std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : base.substr(dot);
  return stem + "." + std::to_string(index) + ext;
}

/// Runs the solver from every configured start, writes traces, and appends
/// the solve / uniqueness sections. Returns false when any start failed to
/// converge or the accepted limits disagree.
inline bool run_solve_stage(Pipeline& pipe, nlohmann::ordered_json& report) {
  const std::vector<double> starts = pipe.cfg().effective_starts();
  const SolverParams params = pipe.solver_params();
  const std::string parameter = pipe.solve_parameter_label(params.mode);

  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  bool ok = true;
  std::vector<SolveResult> results;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    SolverParams p = params;
    p.x0 = starts[i];
    const SolveResult r = iterate(*pipe.space, *pipe.map, p);
    std::string trace_file;
    if (pipe.cfg().output.trace) {
      trace_file = trace_path_for(*pipe.cfg().output.trace, i, starts.size());
      write_text_file(trace_file, render_trace_csv(r));
    }
    ok = ok && r.accepted(params.epsilon);
    runs.push_back(json_solve_run(r, starts[i], params.mode, parameter, trace_file));
    results.push_back(r);
  }
  report["solve"] = runs;

  if (starts.size() >= 2) {
    const UniquenessReport uniq = uniqueness_probe(*pipe.space, *pipe.map, starts, params);
    report["uniqueness"] = json_uniqueness(uniq);
    ok = ok && uniq.consistent;
  }
  return ok;
}

inline void emit_report(const Pipeline& pipe, const nlohmann::ordered_json& report,
                        std::ostream& out) {
  const std::string text = render_json(report);
  if (pipe.cfg().output.report) {
    write_text_file(*pipe.cfg().output.report, text);
  } else {
    out << text;
  }
}

inline void warn_inconclusive(const ComparisonReport& report, bool strict, std::ostream& err) {
  if (strict) return;
  for (const auto& v : report.phi2) {
    if (v.status == Phi2Status::Inconclusive) {
      err << "warning: phi2 verdict inconclusive at t=" << format_double(v.t)
          << "; heuristic check, use --strict to treat as failure\n";
      return;
    }
  }
}

}  // namespace detail

/// Parses `args` (without the program name) and executes one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fixed points and condition certificates in perturbed metric spaces"};
  app.require_subcommand(1);

  detail::CommonOptions audit_opts, verify_opts, solve_opts, classify_opts, estimate_opts;

  CLI::App* audit = app.add_subcommand("audit", "audit the metric axioms of d = D - P "
                                                "(plus phi-family checks when phi is given)");
  detail::add_common(audit, audit_opts, false);

  CLI::App* verify = app.add_subcommand("verify", "certify or refute contraction conditions "
                                                  "over sampled pairs");
  detail::add_common(verify, verify_opts, false);
  std::string condition_name;
  verify->add_option("--condition", condition_name,
                     "condition to check: phi | kannan | banach | kannan-exact | banach-exact "
                     "| all (default: the builtin's primary condition, or all)");
  std::vector<double> pair_override;
  verify->add_option("--pair", pair_override,
                     "restrict the check to a single pair x y")
      ->expected(2);

  CLI::App* solve = app.add_subcommand("solve", "run Picard iteration with a-priori bounds "
                                                "and a multi-start uniqueness probe");
  detail::add_common(solve, solve_opts, true);
  std::vector<double> x0_override;
  solve->add_option("--x0", x0_override, "starting points (overrides config)");
  std::optional<double> epsilon_override;
  solve->add_option("--epsilon", epsilon_override, "target accuracy in the exact metric");
  std::optional<std::size_t> max_iter_override;
  solve->add_option("--max-iterations", max_iter_override, "iteration cap");
  std::string mode_override;
  solve->add_option("--mode", mode_override, "phi | kannan | banach | residual-only");

  CLI::App* classify = app.add_subcommand("classify", "run every applicable audit, condition, "
                                                      "probe and solve");
  detail::add_common(classify, classify_opts, true);

  CLI::App* estimate = app.add_subcommand("estimate-lambda", "estimate the minimal constant by "
                                                             "a supremum-of-ratios scan");
  detail::add_common(estimate, estimate_opts, false);
  std::string kind_name = "kannan-perturbed";
  estimate->add_option("--kind", kind_name, "kannan-perturbed | kannan-exact | banach-perturbed");

  CLI::App* catalog = app.add_subcommand("catalog", "built-in instances");
  catalog->require_subcommand(1);
  CLI::App* catalog_list = catalog->add_subcommand("list", "list ids with one-line descriptions");
  CLI::App* catalog_export = catalog->add_subcommand("export", "print an instance as a config");
  std::string export_id;
  catalog_export->add_option("id", export_id, "catalog id")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (catalog_list->parsed()) {
      for (const CatalogEntry& e : catalog_entries()) {
        out << e.id << " - " << e.summary << "\n";
      }
      return 0;
    }
    if (catalog_export->parsed()) {
      out << render_json(catalog_config_json(builtin(export_id)));
      return 0;
    }

    if (audit->parsed()) {
      detail::Pipeline pipe{detail::load_instance(audit_opts, true), {}, {}, {}, {}};
      pipe.build(false);
      nlohmann::ordered_json report;
      report["meta"] = pipe.meta("audit", audit_opts.strict);
      const AxiomReport axioms = audit_metric_axioms(*pipe.space, *pipe.samples);
      report["axioms"] = json_axioms(axioms);
      bool ok = axioms.all_pass();
      if (pipe.phi) {
        const ComparisonReport comparison = run_comparison(*pipe.phi);
        report["comparison"] = json_comparison(comparison);
        detail::warn_inconclusive(comparison, audit_opts.strict, err);
        ok = ok && comparison_all_pass(comparison, audit_opts.strict);
      }
      detail::emit_report(pipe, report, out);
      return ok ? 0 : 1;
    }

    if (verify->parsed()) {
      detail::Pipeline pipe{detail::load_instance(verify_opts, true), {}, {}, {}, {}};
      pipe.build(true);
      std::vector<ConditionKind> kinds;
      if (!condition_name.empty() && condition_name != "all") {
        kinds.push_back(condition_kind_from_string(condition_name));
      } else if (condition_name.empty() && pipe.inst.entry != nullptr) {
        kinds.push_back(pipe.inst.entry->primary);
      } else {
        kinds = pipe.applicable_conditions();
      }
      std::vector<std::pair<double, double>> pairs;
      if (!pair_override.empty()) {
        pairs.emplace_back(pair_override[0], pair_override[1]);
      } else {
        pairs = pipe.samples->pairs;
      }
      nlohmann::ordered_json report;
      report["meta"] = pipe.meta("verify", verify_opts.strict);
      const std::vector<ConditionVerdict> verdicts = pipe.run_conditions(kinds, pairs);
      report["conditions"] = json_conditions(verdicts);
      detail::emit_report(pipe, report, out);
      const bool ok = std::all_of(verdicts.begin(), verdicts.end(),
                                  [](const ConditionVerdict& v) { return v.holds; });
      return ok ? 0 : 1;
    }

    if (solve->parsed()) {
      detail::Pipeline pipe{detail::load_instance(solve_opts, true), {}, {}, {}, {}};
      if (!x0_override.empty()) pipe.inst.cfg.solve.x0 = x0_override;
      if (epsilon_override) pipe.inst.cfg.solve.epsilon = *epsilon_override;
      if (max_iter_override) pipe.inst.cfg.solve.max_iterations = *max_iter_override;
      if (!mode_override.empty()) pipe.inst.cfg.solve.mode = mode_override;
      pipe.build(true);
      nlohmann::ordered_json report;
      report["meta"] = pipe.meta("solve", solve_opts.strict);
      const bool ok = detail::run_solve_stage(pipe, report);
      detail::emit_report(pipe, report, out);
      return ok ? 0 : 1;
    }

    if (classify->parsed()) {
      detail::Pipeline pipe{detail::load_instance(classify_opts, true), {}, {}, {}, {}};
      pipe.build(true);
      nlohmann::ordered_json report;
      report["meta"] = pipe.meta("classify", classify_opts.strict);

      const AxiomReport axioms = audit_metric_axioms(*pipe.space, *pipe.samples);
      report["axioms"] = json_axioms(axioms);

      bool phi_family_ok = true;
      if (pipe.phi) {
        const ComparisonReport comparison = run_comparison(*pipe.phi);
        report["comparison"] = json_comparison(comparison);
        detail::warn_inconclusive(comparison, classify_opts.strict, err);
        phi_family_ok = comparison_all_pass(comparison, classify_opts.strict);
      }

      const ClassificationSummary summary =
          permet::classify(*pipe.space, *pipe.map, pipe.phi ? &*pipe.phi : nullptr,
                           pipe.cfg().lambda ? &*pipe.cfg().lambda : nullptr, *pipe.samples);
      report["conditions"] = json_conditions(summary.conditions);

      nlohmann::ordered_json estimates = nlohmann::ordered_json::array();
      for (ConditionKind kind : {ConditionKind::KannanPerturbed, ConditionKind::KannanExact,
                                 ConditionKind::BanachPerturbed}) {
        try {
          estimates.push_back(
              json_lambda_estimate(estimate_min_lambda(*pipe.space, *pipe.map,
                                                       pipe.samples->pairs, kind)));
        } catch (const EstimateError& e) {
          estimates.push_back({{"kind", std::string(to_string(kind))}, {"error", e.what()}});
        }
      }
      report["lambda_estimate"] = estimates;
      report["continuity"] = json_continuity(summary.probes);

      const bool solve_ok = detail::run_solve_stage(pipe, report);
      detail::emit_report(pipe, report, out);

      // Certified when at least one condition holds on samples; a holding
      // phi condition only counts if the phi-family audit itself passed.
      bool certified = false;
      for (const ConditionVerdict& v : summary.conditions) {
        if (!v.holds) continue;
        if (v.kind == ConditionKind::PhiPerturbed && !phi_family_ok) continue;
        certified = true;
      }
      const bool ok = axioms.all_pass() && certified && solve_ok;
      return ok ? 0 : 1;
    }

    if (estimate->parsed()) {
      detail::Pipeline pipe{detail::load_instance(estimate_opts, true), {}, {}, {}, {}};
      pipe.build(true);
      const ConditionKind kind = condition_kind_from_string(kind_name);
      nlohmann::ordered_json report;
      report["meta"] = pipe.meta("estimate-lambda", estimate_opts.strict);
      const LambdaEstimate result =
          estimate_min_lambda(*pipe.space, *pipe.map, pipe.samples->pairs, kind);
      report["lambda_estimate"] = nlohmann::ordered_json::array({json_lambda_estimate(result)});
      detail::emit_report(pipe, report, out);
      return result.unbounded() ? 1 : 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no subcommand executed\n";
  return 2;
}

}  // namespace permet::cli
