#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "permet/cli.hpp"

using namespace permet;
namespace fs = std::filesystem;

namespace {

struct RunOutcome {
  int exit_code = 0;
  std::string out;
  std::string err;
};

RunOutcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "permet-cli-tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out);
  out << content;
}

}  // namespace

TEST_CASE("classify on the step map certifies and exits 0") {
  const fs::path report = temp_dir() / "kannan-classify.json";
  const RunOutcome r = run_cli({"classify", "--builtin", "kannan-step", "--seed", "42",
                                "--report", report.string()});
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  bool saw_perturbed = false, saw_exact = false;
  for (const auto& c : doc.at("conditions")) {
    if (c.at("condition") == "kannan-perturbed") {
      saw_perturbed = true;
      CHECK(c.at("status") == "holds-on-samples");
    }
    if (c.at("condition") == "kannan-exact") {
      saw_exact = true;
      CHECK(c.at("status") == "counterexample");
      CHECK(c.at("first").at("x") == 1.0);
      CHECK(c.at("first").at("y") == 2.0);
    }
  }
  CHECK(saw_perturbed);
  CHECK(saw_exact);
  CHECK(doc.at("solve").size() == 4);
  CHECK(doc.at("uniqueness").at("consistent") == true);
}

TEST_CASE("report sections appear in the fixed order") {
  const fs::path report = temp_dir() / "order.json";
  REQUIRE(run_cli({"classify", "--builtin", "kannan-step", "--report", report.string()})
              .exit_code == 0);
  const std::string text = slurp(report);
  std::size_t previous = 0;
  // top-level section keys sit at two-space indentation
  for (const char* key : {"meta", "axioms", "conditions", "lambda_estimate",
                          "continuity", "solve", "uniqueness"}) {
    const std::size_t at = text.find("\n  \"" + std::string(key) + "\":");
    REQUIRE(at != std::string::npos);
    CHECK(at > previous);
    previous = at;
  }
}

TEST_CASE("identical runs produce byte-identical reports and traces") {
  const fs::path d = temp_dir();
  const fs::path r1 = d / "det1.json", r2 = d / "det2.json";
  const fs::path t1 = d / "det1.csv", t2 = d / "det2.csv";
  REQUIRE(run_cli({"classify", "--builtin", "kannan-step", "--seed", "42",
                   "--report", r1.string(), "--trace", t1.string()}).exit_code == 0);
  REQUIRE(run_cli({"classify", "--builtin", "kannan-step", "--seed", "42",
                   "--report", r2.string(), "--trace", t2.string()}).exit_code == 0);
  std::string a = slurp(r1), b = slurp(r2);
  // the echoed output paths are the only legitimate difference
  const auto scrub = [](std::string s, const std::string& from, const std::string& to) {
    std::size_t at;
    while ((at = s.find(from)) != std::string::npos) s.replace(at, from.size(), to);
    return s;
  };
  a = scrub(a, "det1", "det");
  b = scrub(b, "det2", "det");
  CHECK(a == b);
  for (int k = 0; k < 4; ++k) {
    const std::string stem1 = (d / ("det1." + std::to_string(k) + ".csv")).string();
    const std::string stem2 = (d / ("det2." + std::to_string(k) + ".csv")).string();
    CHECK(slurp(stem1) == slurp(stem2));
  }
}

TEST_CASE("audit flags the squared-distance space with exit 1") {
  const fs::path d = temp_dir();
  const fs::path cfg = d / "bad.json";
  write_file(cfg, R"json({
    "space": {"domain": [0, 3], "D": "(x-y)^2", "P": "0"},
    "sampling": {"points": 16, "pairs": 256, "triples": 512}
  })json");
  const fs::path report = d / "bad-report.json";
  const RunOutcome r = run_cli({"audit", "--config", cfg.string(), "--report", report.string()});
  CHECK(r.exit_code == 1);
  const auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc.at("axioms").at("checks").at("triangle").at("verdict") == "fail");
  const auto& examples = doc.at("axioms").at("checks").at("triangle").at("counterexamples");
  REQUIRE_FALSE(examples.empty());
  // the reported triple genuinely violates the triangle inequality
  const auto& w = examples.at(0).at("witness");
  const double x = w.at(0), z = w.at(1), y = w.at(2);
  const auto dd = [](double a, double b) { return (a - b) * (a - b); };
  CHECK(dd(x, y) > dd(x, z) + dd(z, y) + 1e-9);
}

TEST_CASE("classify on the identity map fails every condition and exits 1") {
  const fs::path report = temp_dir() / "identity.json";
  const RunOutcome r = run_cli({"classify", "--builtin", "identity-noncontractive",
                                "--report", report.string()});
  CHECK(r.exit_code == 1);
  const auto doc = nlohmann::json::parse(slurp(report));
  REQUIRE(doc.at("conditions").size() == 5);
  for (const auto& c : doc.at("conditions")) {
    CHECK(c.at("status") == "counterexample");
  }
  CHECK(doc.at("uniqueness").at("consistent") == false);
}

TEST_CASE("verify restricted to the tight pair reports a zero margin and exits 0") {
  const fs::path report = temp_dir() / "tight.json";
  const RunOutcome r = run_cli({"verify", "--builtin", "jleli-phi", "--condition", "phi",
                                "--pair", "0", "3", "--report", report.string()});
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  REQUIRE(doc.at("conditions").size() == 1);
  const auto& c = doc.at("conditions").at(0);
  CHECK(c.at("status") == "holds-on-samples");
  CHECK(c.at("pairs_checked") == 1);
}

TEST_CASE("every reported counterexample re-verifies via --pair") {
  const fs::path d = temp_dir();
  const fs::path report = d / "roundtrip-src.json";
  REQUIRE(run_cli({"classify", "--builtin", "kannan-step", "--report", report.string()})
              .exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  for (const auto& c : doc.at("conditions")) {
    if (c.at("status") != "counterexample") continue;
    const double x = c.at("first").at("x");
    const double y = c.at("first").at("y");
    std::string name = c.at("condition");
    const fs::path sub = d / "roundtrip-pair.json";
    const RunOutcome rerun =
        run_cli({"verify", "--builtin", "kannan-step", "--condition", name, "--pair",
                 format_double(x), format_double(y), "--report", sub.string()});
    CHECK(rerun.exit_code == 1);
    const auto subdoc = nlohmann::json::parse(slurp(sub));
    CHECK(subdoc.at("conditions").at(0).at("first").at("lhs") == c.at("first").at("lhs"));
    CHECK(subdoc.at("conditions").at(0).at("first").at("rhs") == c.at("first").at("rhs"));
  }
}

TEST_CASE("solve writes a trace CSV with the pinned columns") {
  const fs::path d = temp_dir();
  const fs::path trace = d / "solve.csv";
  const fs::path report = d / "solve.json";
  const RunOutcome r = run_cli({"solve", "--builtin", "kannan-step", "--x0", "5",
                                "--report", report.string(), "--trace", trace.string()});
  CHECK(r.exit_code == 0);
  const std::string text = slurp(trace);
  CHECK(text.rfind("n,x_n,D_step,d_step,bound\n", 0) == 0);
  CHECK(text.find("0,5,29,4,") != std::string::npos);  // D(5,1)=29, d(5,1)=4
}

TEST_CASE("estimate-lambda reports the step map constant") {
  const fs::path report = temp_dir() / "estimate.json";
  const RunOutcome r = run_cli({"estimate-lambda", "--builtin", "kannan-step",
                                "--kind", "kannan-perturbed", "--report", report.string()});
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  const auto& e = doc.at("lambda_estimate").at(0);
  CHECK(e.at("kind") == "kannan-perturbed");
  CHECK(std::fabs(e.at("lambda_hat").get<double>() - 0.2) <= 1e-12);  // pair (0,2) is pinned
}

TEST_CASE("usage and config errors exit 2 with a single-line diagnostic") {
  CHECK(run_cli({}).exit_code == 2);
  CHECK(run_cli({"frobnicate"}).exit_code == 2);
  CHECK(run_cli({"classify"}).exit_code == 2);  // neither --config nor --builtin
  CHECK(run_cli({"classify", "--builtin", "no-such-id"}).exit_code == 2);

  const fs::path d = temp_dir();
  const fs::path cfg = d / "unknown-key.json";
  write_file(cfg, R"json({"space": {"domain": [0, 1], "D": "abs(x-y)", "P": "0", "oops": 1}})json");
  const RunOutcome r = run_cli({"audit", "--config", cfg.string()});
  CHECK(r.exit_code == 2);
  CHECK(r.err.rfind("error: ", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK(r.err.find("oops") != std::string::npos);
}

TEST_CASE("help exits 0") {
  const RunOutcome r = run_cli({"--help"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("classify") != std::string::npos);
}

TEST_CASE("catalog export round-trips through a config file") {
  const fs::path d = temp_dir();
  const RunOutcome exported = run_cli({"catalog", "export", "kannan-step"});
  REQUIRE(exported.exit_code == 0);
  const fs::path cfg = d / "exported.json";
  write_file(cfg, exported.out);

  const fs::path r1 = d / "export-run1.json";
  const fs::path r2 = d / "export-run2.json";
  REQUIRE(run_cli({"verify", "--config", cfg.string(), "--condition", "kannan",
                   "--report", r1.string()}).exit_code == 0);
  REQUIRE(run_cli({"verify", "--builtin", "kannan-step", "--condition", "kannan",
                   "--report", r2.string()}).exit_code == 0);
  const auto doc1 = nlohmann::json::parse(slurp(r1));
  const auto doc2 = nlohmann::json::parse(slurp(r2));
  CHECK(doc1.at("conditions") == doc2.at("conditions"));
}

TEST_CASE("audit of a builtin with phi passes all phi-family checks") {
  const fs::path report = temp_dir() / "audit-phi.json";
  const RunOutcome r = run_cli({"audit", "--builtin", "jleli-phi", "--report", report.string()});
  CHECK(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc.at("comparison").at("phi1").at("verdict") == "pass");
  for (const auto& v : doc.at("comparison").at("phi2").at("verdicts")) {
    CHECK(v.at("status") == "converged");
  }
  CHECK(doc.at("comparison").at("heuristic") == true);
}

TEST_CASE("--strict turns inconclusive summability verdicts into failures") {
  // phi = 0.9t passes every check except that its series converges too
  // slowly at large t for the finite window: inconclusive there
  const fs::path d = temp_dir();
  const fs::path cfg = d / "slow-phi.json";
  write_file(cfg, R"json({
    "space": {"domain": [0, 1], "D": "abs(x-y)", "P": "0"},
    "phi": "0.9*t",
    "sampling": {"points": 8, "pairs": 64, "triples": 64}
  })json");
  const RunOutcome relaxed = run_cli({"audit", "--config", cfg.string(),
                                      "--report", (d / "strict-r1.json").string()});
  CHECK(relaxed.exit_code == 0);
  CHECK(relaxed.err.find("warning: ") != std::string::npos);
  CHECK(relaxed.err.find("inconclusive") != std::string::npos);
  const RunOutcome strict = run_cli({"audit", "--config", cfg.string(), "--strict",
                                     "--report", (d / "strict-r2.json").string()});
  CHECK(strict.exit_code == 1);
  CHECK(strict.err.empty());  // strict mode fails instead of warning
}

TEST_CASE("the seed precedence is --seed over config over environment over 42") {
  const fs::path d = temp_dir();
  const fs::path cfg = d / "no-seed.json";
  write_file(cfg, R"json({"space": {"domain": [0, 1], "D": "abs(x-y)", "P": "0"}})json");
  const fs::path cfg_seeded = d / "seeded.json";
  write_file(cfg_seeded, R"json({"space": {"domain": [0, 1], "D": "abs(x-y)", "P": "0"},
                                 "sampling": {"seed": 7}})json");
  const fs::path report = d / "seed-report.json";

  const auto seed_of = [&](const std::vector<std::string>& args) {
    REQUIRE(run_cli(args).exit_code == 0);
    return nlohmann::json::parse(slurp(report)).at("meta").at("seed").get<std::uint64_t>();
  };

  setenv("PERMET_SEED", "99", 1);
  CHECK(seed_of({"audit", "--config", cfg.string(), "--report", report.string()}) == 99);
  CHECK(seed_of({"audit", "--config", cfg_seeded.string(), "--report", report.string()}) == 7);
  CHECK(seed_of({"audit", "--config", cfg.string(), "--seed", "3",
                 "--report", report.string()}) == 3);
  unsetenv("PERMET_SEED");
  CHECK(seed_of({"audit", "--config", cfg.string(), "--report", report.string()}) == 42);
}

TEST_CASE("defaults are echoed into the report") {
  const fs::path d = temp_dir();
  const fs::path cfg = d / "minimal.json";
  write_file(cfg, R"json({"space": {"domain": [0, 1], "D": "abs(x-y)", "P": "0"}})json");
  const fs::path report = d / "minimal-report.json";
  REQUIRE(run_cli({"audit", "--config", cfg.string(), "--report", report.string()})
              .exit_code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  const auto& echo = doc.at("meta").at("config");
  CHECK(echo.at("sampling").at("seed") == 42);
  CHECK(echo.at("sampling").at("points") == 64);
  CHECK(echo.at("sampling").at("pairs") == 4096);
  CHECK(echo.at("sampling").at("triples") == 4096);
  CHECK(echo.at("solve").at("epsilon") == 1e-8);
  CHECK(echo.at("solve").at("max_iterations") == 10000);
}
