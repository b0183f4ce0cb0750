// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: pmf and moment queries, sampling, dataset tests,
// and study regeneration. Exit codes: 0 = computed (regardless of test
// outcome), 1 = numerical or degeneracy failure, 2 = usage or parse error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bicount/bootstrap.hpp"
#include "bicount/errors.hpp"
#include "bicount/inference.hpp"
#include "bicount/io.hpp"
#include "bicount/moments.hpp"
#include "bicount/params.hpp"
#include "bicount/pmf_grid.hpp"
#include "bicount/sampling.hpp"
#include "bicount/study.hpp"

namespace {

struct PmfArgs {
  std::string dist;
  std::vector<long long> point;
  std::vector<int> grid;
};

struct SampleArgs {
  std::string dist;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct TestArgs {
  std::string input;
  std::string stat;
  std::string weight = "f1";
  long long bootstrap = 10000;
  bool bootstrap_given = false;
  bool chi2 = false;
  std::optional<std::uint64_t> seed;
};

struct StudyArgs {
  std::string table;
  long long reps = 2000;
  double alpha = 0.05;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::vector<std::size_t> n_list = {50, 100, 200, 500};
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed,
                           bool announce) {
  if (seed.has_value()) return *seed;
  std::random_device rd;
  const std::uint64_t chosen =
      (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  if (announce) std::cerr << "seed=" << chosen << "\n";
  return chosen;
}

void warn_grid_health(const bicount::TruncatedPmfGrid& grid) {
  if (grid.method() != "recursion" && grid.method() != "convolution") {
    std::cerr << "note: slow " << grid.method()
              << " path used for degenerate parameters\n";
  }
  if (grid.clamp_warning()) {
    std::cerr << "warning: recursion produced negative rounding noise "
              << grid.min_entry() << " (clamped to 0)\n";
  }
}

int run_pmf(const PmfArgs& args) {
  const bicount::DistributionSpec dist = bicount::parse_distribution(args.dist);
  if (!args.grid.empty()) {
    if (args.grid[0] < 0 || args.grid[1] < 0) {
      throw bicount::ParseError("--grid extents must be >= 0");
    }
    // BVB grids always cover the full support; the printed window is the
    // requested one either way.
    const bicount::TruncatedPmfGrid grid =
        bicount::pmf_grid(dist, args.grid[0], args.grid[1]);
    bicount::write_grid_csv(std::cout, grid, args.grid[0], args.grid[1]);
    warn_grid_health(grid);
    std::cerr << "mass_deficit=" << grid.mass_deficit() << "\n";
    return 0;
  }
  if (args.point.size() != 2) {
    throw bicount::ParseError("pmf needs either 'x y' or --grid k1 k2");
  }
  const long long x = args.point[0];
  const long long y = args.point[1];
  if (x < 0 || y < 0) {
    throw bicount::ParseError("pmf point coordinates must be >= 0");
  }
  const bicount::TruncatedPmfGrid grid =
      bicount::pmf_grid(dist, static_cast<int>(x), static_cast<int>(y));
  std::printf("%.12g\n", grid.at(x, y));
  warn_grid_health(grid);
  std::cerr << "mass_deficit=" << grid.mass_deficit() << "\n";
  return 0;
}

int run_sample(const SampleArgs& args) {
  const bicount::DistributionSpec dist = bicount::parse_distribution(args.dist);
  const std::uint64_t seed = resolve_seed(args.seed, true);
  const bicount::BivariateSample sample = bicount::sample(dist, args.n, seed);
  if (args.out.empty()) {
    bicount::write_pairs_csv(std::cout, sample);
    return 0;
  }
  std::ofstream out(args.out);
  if (!out) throw bicount::Error("cannot open output file '" + args.out + "'");
  bicount::write_pairs_csv(out, sample);
  if (!out.good()) throw bicount::Error("write failed for '" + args.out + "'");
  return 0;
}

bicount::BivariateSample load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bicount::ParseError("cannot open input file '" + path + "'");
  return bicount::read_pairs_csv(in, path);
}

int run_gof(const TestArgs& args) {
  if (args.stat != "tstar" && args.stat != "t1") {
    throw bicount::ParseError("gof supports --stat tstar or t1");
  }
  if (args.chi2 && args.bootstrap_given) {
    throw bicount::ParseError("--chi2 and --bootstrap are mutually exclusive");
  }
  if (args.chi2 && args.stat == "t1") {
    throw bicount::UnsupportedParams(
        "t1 has no chi-squared asymptotics here; use --bootstrap");
  }
  const bicount::BivariateSample sample = load_pairs(args.input);
  bicount::TestReport report;
  if (args.chi2) {
    const bicount::SummaryStats stats = bicount::summarize(sample);
    report.statistic_id = "tstar";
    report.observed = bicount::t_star(stats);
    report.p_value = bicount::t_star_p_value(report.observed, sample.size());
    report.method = "chi2";
  } else {
    bicount::BootstrapConfig cfg;
    cfg.replications = args.bootstrap;
    cfg.seed = resolve_seed(args.seed, false);
    cfg.null_family = bicount::NullFamily::bpoi;
    report = bicount::bootstrap_p_value(sample, args.stat, args.weight, cfg);
  }
  std::cout << bicount::to_json(report).dump() << "\n";
  return 0;
}

int run_symmetry(const TestArgs& args) {
  if (args.stat != "t2" && args.stat != "t3") {
    throw bicount::ParseError("symmetry supports --stat t2 or t3");
  }
  const bicount::BivariateSample sample = load_pairs(args.input);
  bicount::BootstrapConfig cfg;
  cfg.replications = args.bootstrap;
  cfg.seed = resolve_seed(args.seed, false);
  cfg.null_family = bicount::NullFamily::bpoi_symmetric;
  const bicount::TestReport report =
      bicount::bootstrap_p_value(sample, args.stat, args.weight, cfg);
  std::cout << bicount::to_json(report).dump() << "\n";
  return 0;
}

int run_study(const StudyArgs& args) {
  if (args.format != "csv" && args.format != "markdown") {
    throw bicount::ParseError("--format must be csv or markdown");
  }
  const std::uint64_t seed = resolve_seed(args.seed, true);
  const bicount::StudyTable table = bicount::run_table(
      args.table, args.n_list, args.reps, args.alpha, seed);
  if (table.tstar_chi2) {
    std::cerr << "note: tstar column uses chi-squared(2) critical values\n";
  }
  const std::string text = bicount::render(
      table, args.format == "csv" ? bicount::TableFormat::csv
                                  : bicount::TableFormat::markdown);
  if (args.out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(args.out);
  if (!out) throw bicount::Error("cannot open output file '" + args.out + "'");
  out << text;
  if (!out.good()) throw bicount::Error("write failed for '" + args.out + "'");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate count distributions, Stein identities, and "
               "Stein-based goodness-of-fit and symmetry tests"};
  app.require_subcommand(1);

  PmfArgs pmf_args;
  CLI::App* pmf = app.add_subcommand("pmf", "Joint pmf value or CSV grid");
  pmf->add_option("dist", pmf_args.dist, "Distribution, e.g. bpoi:0.5,1,1")
      ->required();
  pmf->add_option("point", pmf_args.point, "Coordinates x y")->expected(0, 2);
  pmf->add_option("--grid", pmf_args.grid, "Emit the full grid on [0..k1]x[0..k2]")
      ->expected(2);

  SampleArgs sample_args;
  CLI::App* smp = app.add_subcommand("sample", "Draw a seeded sample as CSV");
  smp->add_option("dist", sample_args.dist, "Distribution string")->required();
  smp->add_option("--n", sample_args.n, "Sample size")->required();
  smp->add_option("--seed", sample_args.seed, "RNG seed (echoed if omitted)");
  smp->add_option("--out", sample_args.out, "Output file (default stdout)");

  TestArgs gof_args;
  CLI::App* gof = app.add_subcommand("gof", "Goodness-of-fit test for the BPoi null");
  gof->add_option("--input", gof_args.input, "Pairs CSV (x1,x2[,count])")
      ->required();
  gof->add_option("--stat", gof_args.stat, "tstar or t1")->required();
  gof->add_option("--weight", gof_args.weight, "f1 or f05 (t1 only)");
  gof->add_option("--bootstrap", gof_args.bootstrap, "Bootstrap replications B")
      ->check(CLI::PositiveNumber);
  gof->add_flag("--chi2", gof_args.chi2, "Closed-form chi2(2) p-value (tstar only)");
  gof->add_option("--seed", gof_args.seed, "RNG seed");

  TestArgs sym_args;
  CLI::App* sym = app.add_subcommand("symmetry", "Symmetry test (symmetric BPoi null)");
  sym->add_option("--input", sym_args.input, "Pairs CSV (x1,x2[,count])")
      ->required();
  sym->add_option("--stat", sym_args.stat, "t2 or t3")->required();
  sym->add_option("--weight", sym_args.weight, "f1 or f05");
  sym->add_option("--bootstrap", sym_args.bootstrap, "Bootstrap replications B")
      ->check(CLI::PositiveNumber);
  sym->add_option("--seed", sym_args.seed, "RNG seed");

  StudyArgs study_args;
  CLI::App* study = app.add_subcommand("study", "Regenerate a rejection-rate table");
  study->add_option("--table", study_args.table, "gof or symmetry")->required();
  study->add_option("--reps", study_args.reps, "Monte Carlo replications M")
      ->check(CLI::PositiveNumber);
  study->add_option("--alpha", study_args.alpha, "Nominal level");
  study->add_option("--seed", study_args.seed, "RNG seed (echoed if omitted)");
  study->add_option("--out", study_args.out, "Output file (default stdout)");
  study->add_option("--format", study_args.format, "csv or markdown");
  study->add_option("--n", study_args.n_list, "Sample sizes (default 50 100 200 500)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  gof_args.bootstrap_given = gof->count("--bootstrap") > 0;

  try {
    if (pmf->parsed()) return run_pmf(pmf_args);
    if (smp->parsed()) return run_sample(sample_args);
    if (gof->parsed()) return run_gof(gof_args);
    if (sym->parsed()) return run_symmetry(sym_args);
    if (study->parsed()) return run_study(study_args);
  } catch (const bicount::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bicount::InvalidParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bicount::UnsupportedParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
