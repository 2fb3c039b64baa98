#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "test_support.hpp"

using namespace bkr;

namespace {

const std::string kScenarios = BKRLAB_SCENARIO_DIR;
const std::string kData = BKRLAB_TEST_DATA_DIR;
const std::string kCli = BKRLAB_CLI_PATH;

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "bkrlab_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const auto out = scratch("cli_out_" + std::to_string(counter));
  const auto err = scratch("cli_err_" + std::to_string(counter++));
  const std::string cmd = env + " " + kCli + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

const InequalityReport& find(const ReportList& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return r;
  throw std::runtime_error("no report named " + name);
}

ReportList run_doc(const std::string& text) {
  const auto doc = parse_config_text(text, "inline");
  return run_entries(load_scenario(doc, "inline"));
}

std::string config_error(const std::string& text) {
  try {
    run_doc(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

// ---------------------------------------------------------------------------
// Bundled scenarios.

TEST(Bundled, OrderStatsChainValues) {
  const auto rs = run_scenario_file(kScenarios + "/order_stats.cfg");
  EXPECT_NEAR(find(rs, "chain_association").lhs, 0.1875, 1e-12);
  EXPECT_NEAR(find(rs, "chain_association").rhs, 0.25, 1e-12);
  EXPECT_NEAR(find(rs, "chain_bkr").lhs, 0.25, 1e-12);
  EXPECT_NEAR(find(rs, "chain_bkr").rhs, 0.5625, 1e-12);
  EXPECT_NEAR(find(rs, "chain_jensen").lhs, 0.5625, 1e-12);
  EXPECT_NEAR(find(rs, "chain_jensen").rhs, 0.75, 1e-12);
  EXPECT_TRUE(find(rs, "chain_association").observation);
  for (double t : {0.5, 1.0, 2.0}) {
    // E e^{t(X1+X2)} over uniform {0,1}^2 for the disjoint pair, against (E e^{t max})^2.
    const double et = std::exp(t);
    const auto& r = find(rs, "mgf_t" + fmt_t(t));
    EXPECT_NEAR(r.lhs, 0.25 * (1 + 2 * et + et * et), 1e-12);
    EXPECT_NEAR(r.rhs, std::pow(0.25 + 0.75 * et, 2), 1e-12);
    EXPECT_TRUE(r.holds);
  }
  EXPECT_TRUE(all_hold(rs));
}

TEST(Bundled, GapScenario) {
  const auto rs = run_scenario_file(kScenarios + "/was5_gap.cfg");
  const auto& g = find(rs, "box_vs_majorant");
  EXPECT_EQ(g.lhs, 0.0);
  EXPECT_EQ(g.rhs, 1.0);
  const auto& b = find(rs, "majorant_bkr");
  EXPECT_EQ(b.lhs, 1.0);
  EXPECT_EQ(b.rhs, 1.0);
  EXPECT_LT(g.lhs, g.rhs);
  EXPECT_LE(b.lhs, b.rhs);
}

TEST(Bundled, DualXyMatchesEnumeration) {
  const auto rs = run_scenario_file(kScenarios + "/dual_xy.cfg");
  EXPECT_NEAR(find(rs, "dual_xy").lhs, 15.0 / 36.0, 1e-12);
  EXPECT_NEAR(find(rs, "dual_xy").rhs, 17.0 / 36.0, 1e-12);
}

TEST(Bundled, TwoBitsValues) {
  const auto rs = run_scenario_file(kScenarios + "/two_bits.cfg");
  EXPECT_NEAR(find(rs, "bkr").lhs, 0.25, 1e-12);
  EXPECT_NEAR(find(rs, "bkr").rhs, 0.5625, 1e-12);
  EXPECT_NEAR(find(rs, "kss").lhs, 7.0 / 16.0, 1e-12);
  EXPECT_NEAR(find(rs, "kss").rhs, 0.75, 1e-12);
  const auto& mc = find(rs, "a_mc");
  ASSERT_TRUE(mc.mc.has_value());
  EXPECT_EQ(mc.mc->samples, 20000u);
  EXPECT_NEAR(mc.lhs, 0.25, mc.mc->lhs_half_width + 1e-12);
}

TEST(Bundled, GoldenCsv) {
  for (const std::string name :
       {"order_stats", "was5_gap", "dual_xy", "graph_paths", "allocation", "two_bits", "stochastic_order"}) {
    const auto out = scratch(name + ".csv");
    const auto r = cli("run " + kScenarios + "/" + name + ".cfg --csv " + out.string());
    EXPECT_EQ(r.code, 0) << name;
    EXPECT_EQ(slurp(out), slurp(kData + "/golden/" + name + ".csv")) << name;
  }
}

// ---------------------------------------------------------------------------
// CLI contract.

TEST(Cli, DemosExitZero) {
  for (const std::string name : {"order-stats", "dual-xy", "graph-paths", "allocation", "was5-gap"}) {
    const auto r = cli("demo " + name + " --scenario-dir " + kScenarios);
    EXPECT_EQ(r.code, 0) << name << r.err;
    EXPECT_NE(r.out.find(" violated; "), std::string::npos);
  }
}

TEST(Cli, ViolationExitsOne) {
  const auto r = cli("run " + kData + "/dropped_hypothesis.cfg");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("2 violated"), std::string::npos);
}

TEST(Cli, MalformedConfigReportsLine) {
  const auto r = cli("run " + kData + "/malformed.cfg");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST(Cli, BadFieldReportsPath) {
  auto r = cli("run " + kData + "/bad_field.cfg");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("evaluators[0].A.indices"), std::string::npos) << r.err;
  r = cli("run " + kData + "/bad_space.cfg");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("space"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("demo unknown").code, 2);
  EXPECT_EQ(cli("run /nonexistent.cfg").code, 2);
}

TEST(Cli, DeterministicAcrossRunsAndThreads) {
  const auto a = scratch("det_a.csv"), b = scratch("det_b.csv"), c = scratch("det_c.csv");
  const std::string cfg = kScenarios + "/two_bits.cfg";
  ASSERT_EQ(cli("run " + cfg + " --csv " + a.string(), "BKRLAB_THREADS=1").code, 0);
  ASSERT_EQ(cli("run " + cfg + " --csv " + b.string(), "BKRLAB_THREADS=1").code, 0);
  ASSERT_EQ(cli("run " + cfg + " --csv " + c.string(), "BKRLAB_THREADS=4").code, 0);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a), slurp(c));
}

TEST(Cli, ReportRendersCsv) {
  const auto csv = scratch("render.csv");
  const auto run = cli("run " + kScenarios + "/order_stats.cfg --csv " + csv.string());
  ASSERT_EQ(run.code, 0);
  const auto r = cli("report " + csv.string() + " --format md");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, run.out);
}

TEST(Cli, FuzzSummaryIsDeterministic) {
  const auto a = cli("fuzz " + kScenarios + "/fuzz.cfg --instances 60", "BKRLAB_THREADS=1");
  const auto b = cli("fuzz " + kScenarios + "/fuzz.cfg --instances 60", "BKRLAB_THREADS=3");
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("60 instances (seed 2024), 0 violations."), std::string::npos) << a.out;
}

// ---------------------------------------------------------------------------
// Loader.

TEST(Loader, SeedsDifferPerEntry) {
  const auto rs = run_doc(R"({"seed": 9, "space": {"iid": 2, "labels": [0, 1]}, "evaluators": [
    {"type": "a", "mode": "mc", "samples": 2000, "F": {"builtin": "coordinate-singletons"}, "G": {"builtin": "coordinate-singletons"}},
    {"type": "a", "mode": "mc", "samples": 2000, "F": {"builtin": "coordinate-singletons"}, "G": {"builtin": "coordinate-singletons"}}]})");
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_NE(rs[0].lhs, rs[1].lhs);
  const auto again = run_doc(R"({"seed": 9, "space": {"iid": 2, "labels": [0, 1]}, "evaluators": [
    {"type": "a", "mode": "mc", "samples": 2000, "F": {"builtin": "coordinate-singletons"}, "G": {"builtin": "coordinate-singletons"}}]})");
  EXPECT_EQ(again[0].lhs, rs[0].lhs);
}

TEST(Loader, LabelsRename) {
  const auto rs = run_doc(R"({"space": {"iid": 1, "labels": [0, 1]}, "evaluators": [
    {"type": "bkr", "label": "mine", "A": "all", "B": "none"},
    {"type": "pqd", "label": "two", "H": [[0], []], "functions": [{"coordinate": 0}, {"coordinate": 0}]}]})");
  EXPECT_EQ(rs[0].name, "mine");
  EXPECT_EQ(rs[1].name, "two.pqd_upper");
}

TEST(Loader, EventForms) {
  const auto doc = parse_config_text(R"({"space": {"coords": [{"labels": [0, 2, 5]}, {"size": 2}]}, "evaluators": [
    {"type": "bkr", "A": {"all_at_least": [[0, 2], [1, 1]]}, "B": {"points": [[0, 0], [2, 1]]}}]})", "x");
  const cfg::Node root{&doc, ""};
  const auto sp = cfg::space(root.at("space"));
  const auto a = cfg::event(root.at("evaluators").at(0).at("A"), sp);
  const auto b = cfg::event(root.at("evaluators").at(0).at("B"), sp);
  EXPECT_EQ(a.count(), 2u);
  EXPECT_TRUE(a.contains(Point{1, 1}));
  EXPECT_TRUE(a.contains(Point{2, 1}));
  EXPECT_EQ(b.count(), 2u);
  EXPECT_TRUE(b.contains(Point{0, 0}));
  const auto clause = parse_config_text(R"({"any_equal": [[0, 0], [1, 0]]})", "e");
  const auto any = cfg::event(cfg::Node{&clause, ""}, sp);
  EXPECT_EQ(any.count(), 4u);  // 3 + 2 - 1
  EXPECT_FALSE(any.contains(Point{1, 1}));
}

TEST(Loader, FunctionForms) {
  const auto doc = parse_config_text(R"({"space": {"iid": 3, "labels": [0, 1, 3]},
    "f": [{"expr": "sum", "coords": [0, 2]}, {"expr": "product", "coords": [0, 1]}, {"expr": "max", "coords": [1, 2]},
          {"expr": "min", "coords": [0, 1, 2]}, {"coordinate": 1}, {"constant": 2.5}]})", "x");
  const cfg::Node root{&doc, ""};
  const auto sp = cfg::space(root.at("space"));
  const auto x = sp->index_of(Point{1, 2, 0});  // labels (1, 3, 0)
  const double want[] = {1.0, 3.0, 3.0, 0.0, 3.0, 2.5};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(cfg::function(root.at("f").at(i), sp)[x], want[i]) << i;
}

TEST(Loader, Diagnostics) {
  const std::string sp = R"("space": {"iid": 2, "labels": [0, 1]})";
  EXPECT_NE(config_error("{" + sp + R"(, "evaluators": [{"type": "zz"}]})").find("evaluators[0].type"),
            std::string::npos);
  EXPECT_NE(config_error("{" + sp + R"(, "evaluators": []})").find("evaluators: no evaluators"), std::string::npos);
  EXPECT_NE(config_error("{" + sp + R"(, "bogus": 1, "evaluators": []})").find("unknown field 'bogus'"),
            std::string::npos);
  EXPECT_NE(config_error("{" + sp + R"(, "evaluators": [{"type": "a", "mode": "mc", "samples": 10,
             "F": {"builtin": "coordinate-singletons"}, "G": {"builtin": "coordinate-singletons"}}]})")
                .find("at least 1000"),
            std::string::npos);
  EXPECT_NE(config_error("{" + sp + R"(, "evaluators": [{"type": "b", "f": {"table": [1, 2]}, "g": {"constant": 1}}]})")
                .find("evaluators[0].f.table"),
            std::string::npos);
  EXPECT_NE(config_error("{" + sp + R"(, "evaluators": [{"type": "pqd", "H": [[0], [1]],
             "functions": [{"table": [1, 0, 0, 0]}, {"coordinate": 0}]}]})")
                .find("functions[0]: function is not increasing"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"evaluators": [{"type": "bkr", "A": "all", "B": "all"}]})").find("top-level space"),
            std::string::npos);
  EXPECT_NE(config_error("{" + sp + R"(, "evaluators": [{"type": "a", "F": {"members": [{"constant": 1, "dep": [5]}]},
             "G": {"builtin": "coordinate-singletons"}}]})")
                .find("evaluators[0].F.members[0].dep[0]"),
            std::string::npos);
}

// ---------------------------------------------------------------------------
// Report I/O.

TEST(ReportIo, CsvRoundTripIsExact) {
  bkr::testing::Rng rng(41);
  std::vector<InequalityReport> rs;
  for (int i = 0; i < 50; ++i) {
    InequalityReport r = make_report("r" + std::to_string(i), bkr::testing::coin(rng) / 3.0, bkr::testing::coin(rng) * 7.0,
                                     "x=(1,2) \"q\", w|z");
    if (i % 3 == 0) r.mc = McInterval{1000, 0.125, 0.5};
    if (i % 5 == 0) r = as_observation(r);
    rs.push_back(r);
  }
  std::stringstream ss;
  write_csv(ss, rs);
  const auto rows = read_csv(ss);
  ASSERT_EQ(rows.size(), rs.size() + 1);
  EXPECT_EQ(rows[0], csv_columns());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const auto& row = rows[i + 1];
    EXPECT_EQ(row[0], rs[i].name);
    EXPECT_EQ(std::stod(row[1]), rs[i].lhs);
    EXPECT_EQ(std::stod(row[2]), rs[i].rhs);
    EXPECT_EQ(std::stod(row[3]), rs[i].slack);
    EXPECT_EQ(row[4], rs[i].holds ? "true" : "false");
    EXPECT_EQ(row[6], rs[i].witness);
    EXPECT_EQ(row[7], rs[i].mc ? "0.125;0.5;1000" : "");
    EXPECT_EQ(row[8], rs[i].observation ? "observation" : "theorem");
  }
}

TEST(ReportIo, MarkdownSummaryCounts) {
  std::vector<InequalityReport> rs{make_report("ok", 1, 2), make_report("bad", 2, 1),
                                   as_observation(make_report("obs", 3, 1))};
  std::stringstream ss;
  write_markdown(ss, rs);
  EXPECT_NE(ss.str().find("2 inequalities checked, 1 violated; 1 observations."), std::string::npos);
  EXPECT_FALSE(all_hold(rs));
  rs.erase(rs.begin() + 1);
  EXPECT_TRUE(all_hold(rs));
}

TEST(ReportIo, RejectsBadCsv) {
  std::stringstream bad("name,lhs\nx,1\n");
  EXPECT_THROW(write_markdown_rows(std::cout, read_csv(bad)), InvalidInput);
  std::stringstream open_quote("\"abc\n");
  EXPECT_THROW(read_csv(open_quote), InvalidInput);
}

// ---------------------------------------------------------------------------
// Worker pool.

TEST(WorkerPool, OrderedResults) {
  for (std::size_t workers : {1u, 2u, 5u}) {
    const auto out = parallel_map<std::size_t>(100, [](std::size_t i) { return i * i; }, workers);
    ASSERT_EQ(out.size(), 100u);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  }
}

TEST(WorkerPool, RethrowsFirstFailure) {
  auto task = [](std::size_t i) -> int {
    if (i == 7 || i == 30) throw InvalidInput("task " + std::to_string(i));
    return 0;
  };
  try {
    parallel_map<int>(50, task, 4);
    FAIL() << "no exception";
  } catch (const InvalidInput& e) {
    EXPECT_STREQ(e.what(), "task 7");
  }
}

TEST(WorkerPool, EnvironmentCap) {
  ::setenv("BKRLAB_THREADS", "1", 1);
  EXPECT_EQ(worker_count(), 1u);
  ::unsetenv("BKRLAB_THREADS");
  EXPECT_GE(worker_count(), 1u);
}

// ---------------------------------------------------------------------------
// Fuzzer.

TEST(Fuzz, InstancesAreValidAndReplay) {
  FuzzConfig c;
  c.seed = 77;
  c.instances = 40;
  for (std::size_t i = 0; i < c.instances; ++i) {
    const auto doc = fuzz_instance(c, i);
    EXPECT_EQ(doc, fuzz_instance(c, i));
    // A saved repro must parse back to the same reports.
    const auto text = doc.dump(2);
    const auto a = run_entries(load_scenario(doc, "fuzz"));
    const auto b = run_entries(load_scenario(parse_config_text(text, "repro"), "repro"));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].lhs, b[k].lhs);
      EXPECT_EQ(a[k].rhs, b[k].rhs);
    }
  }
}

TEST(Fuzz, SummaryCoversEveryEvaluator) {
  FuzzConfig c;
  c.seed = 5;
  c.instances = 80;
  const auto r = run_fuzz(c);
  EXPECT_EQ(r.violations(), 0u);
  EXPECT_TRUE(r.repro_files.empty());
  std::set<std::string> names;
  for (const auto& s : r.summaries) {
    names.insert(s.name);
    EXPECT_EQ(s.checked, c.instances) << s.name;
    EXPECT_GE(s.min_slack, -1e-9) << s.name;
  }
  for (const auto& e : c.evaluators) {
    const auto base = e == "st-max" ? "st_max" : e == "pqd" ? "pqd_upper" : e;
    EXPECT_TRUE(names.count(base)) << e;
  }
  // Tight instances occur.
  double tightest = 1.0;
  for (const auto& s : r.summaries) tightest = std::min(tightest, std::abs(s.min_slack));
  EXPECT_LT(tightest, 1e-9);
}

TEST(Fuzz, ConfigValidation) {
  auto err = [](const std::string& text) {
    try {
      parse_fuzz_config(parse_config_text(text, "f"), "f");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(err(R"({"fuzz": {"n": [0, 3]}})").find("fuzz.n"), std::string::npos);
  EXPECT_NE(err(R"({"fuzz": {"evaluators": ["a", "order-stats"]}})").find("fuzz.evaluators[1]"), std::string::npos);
  EXPECT_NE(err(R"({"seed": 1})").find("missing field 'fuzz'"), std::string::npos);
  const auto c = parse_fuzz_config(parse_config_text(R"({"seed": 3, "fuzz": {"instances": 5, "values": [2, 1]}})", "f"), "f");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.instances, 5u);
  EXPECT_EQ(c.values, (std::vector<double>{1, 2}));
}
