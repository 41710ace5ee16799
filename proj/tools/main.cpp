// fibgp: tree-GP engine for the recursive Fibonacci benchmark plus a
// runtime-perturbation harness measuring failed disruption propagation.
//
// Every run is fully determined by (subcommand, flags, seed); --jobs only
// changes wall-clock time, never the output files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fibgp/evolve.hpp"
#include "fibgp/fdp.hpp"
#include "fibgp/refcheck.hpp"
#include "fibgp/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSelftest = 3;

namespace fs = std::filesystem;

fibgp::Tree load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read tree file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  fibgp::Tree t = fibgp::parse_sexpr(buf.str());
  if (!fibgp::well_formed(t))
    throw std::runtime_error("ill-formed tree in " + path);
  return t;
}

void write_population(const std::string& path,
                      const std::vector<fibgp::Individual>& pop) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const fibgp::Individual& ind : pop)
    out << fibgp::print_sexpr(ind.tree) << '\n';
}

void write_opcode_report(const std::string& path,
                         const std::vector<fibgp::GenStats>& stats) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "generation,full_opcodes,evaluated_opcodes,ratio\n";
  for (const fibgp::GenStats& s : stats) {
    const double ratio =
        s.opcodes_full
            ? static_cast<double>(s.opcodes_evaluated) /
                  static_cast<double>(s.opcodes_full)
            : 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", ratio);
    out << s.generation << ',' << s.opcodes_full << ',' << s.opcodes_evaluated
        << ',' << buf << '\n';
  }
}

int cmd_evolve(std::size_t pop, std::size_t gens, std::uint64_t seed,
               unsigned tournament, const std::string& incremental,
               unsigned jobs, const std::string& out_dir, bool timing) {
  fibgp::RunConfig cfg;
  cfg.pop_size = pop;
  cfg.generations = gens;
  cfg.seed = seed;
  cfg.tournament_k = tournament;
  cfg.incremental = incremental == "on";
  cfg.jobs = jobs;
  fs::create_directories(out_dir);

  fibgp::RunResult result = fibgp::run_evolution(cfg);

  fibgp::write_stats_csv(out_dir + "/stats.csv", result.stats, timing);
  write_opcode_report(out_dir + "/opcodes.csv", result.stats);
  write_population(out_dir + "/final_pop.sexpr", result.final_pop);
  {
    std::ofstream best(out_dir + "/best.sexpr");
    best << fibgp::print_sexpr(result.best_of_run.tree) << '\n';
  }
  if (result.solution) {
    std::cout << "solution found at generation " << result.solution_generation
              << '\n';
    std::ofstream sol(out_dir + "/solution.sexpr");
    sol << fibgp::print_sexpr(*result.solution) << '\n';
  } else {
    std::cout << "no solution; best fitness "
              << result.best_of_run.fitness.total_abs_error << '\n';
  }
  return kExitOk;
}

int cmd_fdp(const std::string& tree_file, const std::string& kind,
            std::uint64_t seed, unsigned jobs, const std::string& memo,
            const std::string& out_dir, const std::string& trace_csv) {
  const fibgp::Tree tree = load_tree(tree_file);
  fs::create_directories(out_dir);

  fibgp::FdpOptions opts;
  opts.jobs = jobs;
  opts.memo_mode = memo == "sequential" ? fibgp::MemoMode::Sequential
                                        : fibgp::MemoMode::Baseline;

  if (!trace_csv.empty()) {
    const fibgp::EvalResult base = fibgp::fitness(tree, true);
    std::ofstream out(trace_csv);
    out << "case,node,value\n";
    for (int j = 0; j < fibgp::kTestCases; ++j)
      for (std::size_t node = 0; node < tree.size(); ++node)
        out << j << ',' << node << ',' << base.trace.value(j, node) << '\n';
  }

  std::vector<std::string> kinds;
  if (kind == "both") {
    kinds = {"plus1", "randint"};
  } else {
    kinds = {kind};
  }

  fibgp::FdpReport plus1, randint;
  bool have_plus1 = false, have_randint = false;
  for (const std::string& k : kinds) {
    const fibgp::PerturbKind pk = k == "plus1"
                                      ? fibgp::PerturbKind::plus_one()
                                      : fibgp::PerturbKind::rand_int(seed);
    fibgp::FdpReport report = fibgp::run_fdp(tree, pk, opts);
    fibgp::write_fdp_hist_csv(out_dir + "/fdp_hist_" + k + ".csv", report);
    fibgp::write_fdp_depth_csv(out_dir + "/fdp_depth_" + k + ".csv", report);
    const auto points = fibgp::lattice_layout(tree, report.lattice_counts);
    fibgp::write_fdp_lattice_csv(out_dir + "/fdp_lattice_" + k + ".csv",
                                 points);
    fibgp::write_lattice_svg(out_dir + "/lattice_" + k + ".svg", points);
    if (k == "plus1") {
      plus1 = std::move(report);
      have_plus1 = true;
    } else {
      randint = std::move(report);
      have_randint = true;
    }
  }
  // Table-2-shaped summary row; a kind that was not run leaves its columns 0.
  const fibgp::SummaryRow row = fibgp::make_summary(
      tree, have_plus1 ? plus1 : (have_randint ? randint : plus1),
      have_randint ? randint : (have_plus1 ? plus1 : randint));
  fibgp::SummaryRow printed = row;
  if (!have_plus1) {
    printed.plus1_pct = 0;
    printed.plus1_slope = 0;
  }
  if (!have_randint) {
    printed.randint_pct = 0;
    printed.randint_slope = 0;
  }
  fibgp::write_summary_csv(out_dir + "/fdp_summary.csv", {printed});
  fibgp::write_summary_csv(out_dir + "/summary.csv", {printed});
  {
    const auto& rep = have_plus1 ? plus1 : randint;
    const auto points = fibgp::lattice_layout(tree, rep.lattice_counts);
    fibgp::write_lattice_svg(out_dir + "/lattice.svg", points);
  }
  fibgp::emit_plot_scripts(out_dir, kinds);

  std::cout << "size " << printed.size << " depth " << printed.depth
            << " fitness " << printed.fitness << " +1% " << printed.plus1_pct
            << " +1 slope " << printed.plus1_slope << " RANDINT% "
            << printed.randint_pct << " RANDINT slope "
            << printed.randint_slope << '\n';
  return kExitOk;
}

int cmd_tune(const std::vector<std::size_t>& pops, std::size_t runs,
             std::size_t gens, std::uint64_t seed, unsigned jobs,
             const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto table =
      fibgp::tuning_experiment(pops, runs, gens, seed, jobs);
  fibgp::write_tune_csv(out_dir + "/tune.csv", table);
  for (const fibgp::TuneRow& row : table)
    std::cout << "pop " << row.pop_size << ": " << row.successes << '/'
              << row.runs << " successful\n";
  return kExitOk;
}

int cmd_report(const std::string& stats_file, const std::string& tune_file,
               const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto copy_in = [&](const std::string& src, const std::string& name) {
    if (src.empty()) return;
    if (!fs::exists(src)) throw std::runtime_error("cannot read " + src);
    fs::copy_file(src, out_dir + "/" + name,
                  fs::copy_options::overwrite_existing);
  };
  copy_in(stats_file, "stats.csv");
  copy_in(tune_file, "tune.csv");
  fibgp::emit_plot_scripts(out_dir, {"plus1", "randint"});
  return kExitOk;
}

int cmd_selftest() {
  const fibgp::refcheck::CheckResult res = fibgp::refcheck::run_selftest();
  if (res.ok()) {
    std::cout << "selftest: " << res.checks_run << " checks passed\n";
    return kExitOk;
  }
  std::cout << "selftest: " << res.failures.size() << " of " << res.checks_run
            << " checks FAILED\n";
  for (const std::string& f : res.failures) std::cout << "  " << f << '\n';
  return kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GP engine and disruption-propagation harness for the "
               "recursive Fibonacci benchmark"};
  app.require_subcommand(1);

  // evolve
  std::size_t pop = 2000, gens = 50;
  std::uint64_t seed = 1;
  unsigned tournament = 7, jobs = 1;
  std::string incremental = "on", out_dir = "out";
  bool timing = false;
  auto* evolve = app.add_subcommand("evolve", "run a GP experiment");
  evolve->add_option("--pop", pop, "population size")->check(CLI::Range(2u, 1000000u));
  evolve->add_option("--gens", gens, "generations");
  evolve->add_option("--seed", seed, "random seed");
  evolve->add_option("--tournament", tournament, "tournament size")
      ->check(CLI::Range(1u, 1000u));
  evolve->add_option("--incremental", incremental, "incremental evaluation")
      ->check(CLI::IsMember({"on", "off"}));
  evolve->add_option("--jobs", jobs, "worker threads");
  evolve->add_option("--out", out_dir, "output directory")->required();
  evolve->add_flag("--timing", timing,
                   "include wall-clock GPops in stats.csv (breaks "
                   "byte-reproducibility)");

  // fdp
  std::string tree_file, kind = "both", memo = "baseline", trace_csv;
  std::uint64_t fdp_seed = 1;
  unsigned fdp_jobs = 1;
  std::string fdp_out = "out";
  auto* fdp = app.add_subcommand("fdp", "perturb every node on every case");
  fdp->add_option("--tree", tree_file, "s-expression tree file")->required();
  fdp->add_option("--kind", kind, "perturbation kind")
      ->check(CLI::IsMember({"plus1", "randint", "both"}));
  fdp->add_option("--seed", fdp_seed, "RANDINT draw seed");
  fdp->add_option("--jobs", fdp_jobs, "worker threads");
  fdp->add_option("--memo", memo,
                  "memo semantics during perturbation (baseline: SRF reads "
                  "unperturbed earlier outputs)")
      ->check(CLI::IsMember({"baseline", "sequential"}));
  fdp->add_option("--out", fdp_out, "output directory")->required();
  fdp->add_option("--trace-csv", trace_csv, "dump baseline trace to CSV");

  // tune
  std::vector<std::size_t> pops{500, 2000, 8000};
  std::size_t runs = 10, tune_gens = 50;
  std::uint64_t tune_seed = 1;
  unsigned tune_jobs = 1;
  std::string tune_out = "out";
  auto* tune = app.add_subcommand("tune", "success rate vs population size");
  tune->add_option("--pops", pops, "population sizes");
  tune->add_option("--runs", runs, "runs per population size");
  tune->add_option("--gens", tune_gens, "generations per run");
  tune->add_option("--seed", tune_seed, "random seed");
  tune->add_option("--jobs", tune_jobs, "worker threads");
  tune->add_option("--out", tune_out, "output directory")->required();

  // report
  std::string stats_file, tune_file, report_out = "out";
  auto* report = app.add_subcommand("report", "emit gnuplot-ready files");
  report->add_option("--stats", stats_file, "stats.csv from evolve");
  report->add_option("--tune", tune_file, "tune.csv from tune");
  report->add_option("--out", report_out, "output directory")->required();

  auto* selftest =
      app.add_subcommand("selftest", "run the embedded oracle suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (evolve->parsed())
      return cmd_evolve(pop, gens, seed, tournament, incremental, jobs,
                        out_dir, timing);
    if (fdp->parsed())
      return cmd_fdp(tree_file, kind, fdp_seed, fdp_jobs, memo, fdp_out,
                     trace_csv);
    if (tune->parsed())
      return cmd_tune(pops, runs, tune_gens, tune_seed, tune_jobs, tune_out);
    if (report->parsed())
      return cmd_report(stats_file, tune_file, report_out);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const fibgp::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
