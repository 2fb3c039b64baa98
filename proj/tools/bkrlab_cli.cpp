#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "bkrlab/bkrlab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

const std::map<std::string, std::string> kDemos{
    {"order-stats", "order_stats.cfg"}, {"dual-xy", "dual_xy.cfg"},         {"graph-paths", "graph_paths.cfg"},
    {"allocation", "allocation.cfg"},   {"was5-gap", "was5_gap.cfg"}};

void write_to(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bkr::ConfigError(path + ": cannot write");
  body(out);
}

int run_file(const std::string& path, std::string csv, std::string md) {
  bkr::Scenario sc;
  const auto reports = bkr::run_scenario_file(path, &sc);
  if (csv.empty()) csv = sc.csv_path;
  if (md.empty()) md = sc.markdown_path;
  if (!csv.empty()) write_to(csv, [&](std::ostream& os) { bkr::write_csv(os, reports); });
  if (!md.empty()) write_to(md, [&](std::ostream& os) { bkr::write_markdown(os, reports); });
  bkr::write_markdown(std::cout, reports);
  return bkr::all_hold(reports) ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bkrlab: disjoint-occurrence and functional BKR inequality checker"};
  app.require_subcommand(1);

  std::string cfg_path, csv_path, md_path;
  auto* run = app.add_subcommand("run", "Evaluate every entry of a scenario file");
  run->add_option("config", cfg_path, "Scenario file")->required();
  run->add_option("--csv", csv_path, "Write the CSV report here");
  run->add_option("--md", md_path, "Write the markdown report here");

  std::string fuzz_path, repro_dir;
  std::optional<std::uint64_t> fuzz_seed;
  std::optional<std::size_t> fuzz_instances;
  auto* fuzz = app.add_subcommand("fuzz", "Check random instances and save repros of violations");
  fuzz->add_option("config", fuzz_path, "Fuzz configuration file")->required();
  fuzz->add_option("--seed", fuzz_seed, "Override the seed");
  fuzz->add_option("--instances", fuzz_instances, "Override the instance count");
  fuzz->add_option("--repro-dir", repro_dir, "Directory for repro scenarios");

  std::string demo_name, scenario_dir = BKRLAB_SCENARIO_DIR;
  auto* demo = app.add_subcommand("demo", "Run a bundled scenario");
  std::vector<std::string> names;
  for (const auto& [k, v] : kDemos) names.push_back(k);
  demo->add_option("name", demo_name, "Scenario name")->required()->check(CLI::IsMember(names));
  demo->add_option("--scenario-dir", scenario_dir, "Directory holding the bundled scenarios");
  demo->add_option("--csv", csv_path, "Write the CSV report here");
  demo->add_option("--md", md_path, "Write the markdown report here");

  std::string report_csv, format = "md";
  auto* report = app.add_subcommand("report", "Render a CSV report");
  report->add_option("csv", report_csv, "CSV report")->required();
  report->add_option("--format", format, "Output format")->check(CLI::IsMember({"md"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return run_file(cfg_path, csv_path, md_path);
    if (*demo) return run_file(scenario_dir + "/" + kDemos.at(demo_name), csv_path, md_path);
    if (*fuzz) {
      const auto doc = bkr::parse_config_text(bkr::read_file(fuzz_path), fuzz_path);
      auto fc = bkr::parse_fuzz_config(doc, fuzz_path);
      if (fuzz_seed) fc.seed = *fuzz_seed;
      if (fuzz_instances) fc.instances = *fuzz_instances;
      if (!repro_dir.empty()) fc.repro_dir = repro_dir;
      const auto res = bkr::run_fuzz(fc);
      bkr::write_fuzz_summary(std::cout, fc, res);
      return res.violations() == 0 ? kExitOk : kExitViolation;
    }
    if (*report) {
      std::ifstream in(report_csv, std::ios::binary);
      if (!in) throw bkr::ConfigError(report_csv + ": cannot open file");
      bkr::write_markdown_rows(std::cout, bkr::read_csv(in));
      return kExitOk;
    }
  } catch (const bkr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bkr::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
