#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "fibgp/eval.hpp"
#include "fibgp/incremental.hpp"
#include "fibgp/parallel.hpp"
#include "fibgp/variation.hpp"

namespace fibgp {

struct Individual {
  Tree tree;
  Fitness fitness;
};

struct RunConfig {
  std::size_t pop_size = 2000;
  std::size_t generations = 50;
  unsigned tournament_k = 7;
  std::uint64_t seed = 1;
  int init_depth_min = 2;
  int init_depth_max = 6;
  bool incremental = true;
  unsigned jobs = 1;
};

struct GenStats {
  std::size_t generation = 0;
  double mean_size = 0.0;
  double mean_fitness = 0.0;
  Fitness best_fitness;
  double frac_child_fitness_differs = 0.0;
  std::uint64_t opcodes_full = 0;       // cost of full evaluation of all children
  std::uint64_t opcodes_evaluated = 0;  // opcodes actually interpreted
  double wallclock_gpops = 0.0;         // opcodes_evaluated / elapsed seconds
};

// Tournament size k, sampling with replacement, minimum fitness wins, ties
// broken uniformly among the tied candidates (reservoir style).
inline std::size_t tournament_select(const std::vector<Individual>& pop,
                                     unsigned k, RandomStream& rng) {
  std::size_t best = rng.below(pop.size());
  std::size_t ties = 1;
  for (unsigned i = 1; i < k; ++i) {
    const std::size_t cand = rng.below(pop.size());
    if (pop[cand].fitness < pop[best].fitness) {
      best = cand;
      ties = 1;
    } else if (pop[cand].fitness == pop[best].fitness) {
      ++ties;
      if (rng.below(ties) == 0) best = cand;
    }
  }
  return best;
}

namespace detail {

inline void accumulate_stats(const std::vector<Individual>& pop,
                             GenStats& stats) {
  double size_sum = 0.0;
  double fit_sum = 0.0;
  Fitness best = pop.front().fitness;
  for (const Individual& ind : pop) {
    size_sum += static_cast<double>(ind.tree.size());
    fit_sum += static_cast<double>(ind.fitness.total_abs_error);
    if (ind.fitness < best) best = ind.fitness;
  }
  stats.mean_size = size_sum / static_cast<double>(pop.size());
  stats.mean_fitness = fit_sum / static_cast<double>(pop.size());
  stats.best_fitness = best;
}

}  // namespace detail

// One generation: pop_size children, each from a single crossover of two
// independently tournament-selected parents.  Non-elitist, no reproduction
// copies, no mutation.  All RNG consumption happens in the sequential
// breeding loop; child evaluation is pure and parallel, so seeded runs are
// identical for any job count.
inline std::vector<Individual> breed_generation(
    const std::vector<Individual>& pop, const RunConfig& cfg,
    RandomStream& rng, GenStats& stats,
    std::vector<bool>* improved_on_mum = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Mating {
    std::size_t mum, dad;
    Tree child;
    SpliceInfo splice;
  };
  std::vector<Mating> matings(cfg.pop_size);
  for (std::size_t i = 0; i < cfg.pop_size; ++i) {
    const std::size_t mum = tournament_select(pop, cfg.tournament_k, rng);
    const std::size_t dad = tournament_select(pop, cfg.tournament_k, rng);
    CrossoverResult cx = crossover(pop[mum].tree, pop[dad].tree, rng);
    const auto [mf, ml] = subtree_span(pop[mum].tree, cx.mum_point);
    const auto [df, dl] = subtree_span(pop[dad].tree, cx.dad_point);
    matings[i] = {mum, dad, std::move(cx.child),
                  SpliceInfo{cx.mum_point, ml - mf + 1, dl - df + 1}};
  }

  std::vector<Individual> next(cfg.pop_size);
  std::vector<std::uint64_t> evaluated(cfg.pop_size, 0);

  if (cfg.incremental) {
    // Group children by mum so each parent trace is recorded once and
    // dropped as soon as its children are done.
    std::map<std::size_t, std::vector<std::size_t>> by_mum;
    for (std::size_t i = 0; i < cfg.pop_size; ++i)
      by_mum[matings[i].mum].push_back(i);
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> groups(
        by_mum.begin(), by_mum.end());
    std::vector<std::uint64_t> trace_cost(groups.size(), 0);
    parallel_for(groups.size(), cfg.jobs, [&](std::size_t g) {
      const auto& [mum, children] = groups[g];
      EvalResult parent = fitness(pop[mum].tree, /*record_trace=*/true);
      trace_cost[g] = parent.trace.opcount;
      for (std::size_t i : children) {
        next[i].tree = std::move(matings[i].child);
        next[i].fitness = incremental_fitness(next[i].tree, parent.trace,
                                              matings[i].splice, evaluated[i]);
      }
    });
    for (std::uint64_t c : trace_cost) stats.opcodes_evaluated += c;
  } else {
    parallel_for(cfg.pop_size, cfg.jobs, [&](std::size_t i) {
      next[i].tree = std::move(matings[i].child);
      EvalResult r = fitness(next[i].tree);
      next[i].fitness = r.fitness;
      evaluated[i] = r.trace.opcount;
    });
  }

  std::size_t differs = 0;
  if (improved_on_mum) improved_on_mum->assign(cfg.pop_size, false);
  for (std::size_t i = 0; i < cfg.pop_size; ++i) {
    stats.opcodes_full +=
        static_cast<std::uint64_t>(next[i].tree.size()) * kTestCases;
    stats.opcodes_evaluated += evaluated[i];
    if (next[i].fitness != pop[matings[i].mum].fitness) ++differs;
    if (improved_on_mum && next[i].fitness < pop[matings[i].mum].fitness)
      (*improved_on_mum)[i] = true;
  }
  stats.frac_child_fitness_differs =
      static_cast<double>(differs) / static_cast<double>(cfg.pop_size);
  detail::accumulate_stats(next, stats);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  stats.wallclock_gpops =
      secs > 0 ? static_cast<double>(stats.opcodes_evaluated) / secs : 0.0;
  return next;
}

struct RunResult {
  std::vector<Individual> final_pop;
  std::vector<GenStats> stats;
  std::optional<Tree> solution;       // first fitness-0 individual seen
  std::size_t solution_generation = 0;
  Individual best_of_run;
  // Deepest child that improved on its root-donating parent's fitness;
  // feeds the perturbation experiments, which want deep fit trees.
  std::optional<Individual> deepest_improved;
  int deepest_improved_depth = 0;
};

// Generational loop per the run configuration.  A found solution is recorded
// but the run continues to the generation limit.
inline RunResult run_evolution(
    const RunConfig& cfg,
    const std::function<void(const GenStats&)>& on_generation = {}) {
  if (cfg.pop_size < 2) throw std::invalid_argument("pop_size must be >= 2");
  RandomStream rng(cfg.seed);
  RunResult result;

  std::vector<Tree> init = ramped_half_and_half(
      cfg.pop_size, rng, cfg.init_depth_min, cfg.init_depth_max);
  std::vector<Individual> pop(cfg.pop_size);
  GenStats init_stats;
  init_stats.generation = 0;
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(cfg.pop_size, cfg.jobs, [&](std::size_t i) {
    pop[i].tree = std::move(init[i]);
    EvalResult r = fitness(pop[i].tree);
    pop[i].fitness = r.fitness;
  });
  for (const Individual& ind : pop) {
    init_stats.opcodes_full +=
        static_cast<std::uint64_t>(ind.tree.size()) * kTestCases;
  }
  init_stats.opcodes_evaluated = init_stats.opcodes_full;
  detail::accumulate_stats(pop, init_stats);
  {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    init_stats.wallclock_gpops =
        secs > 0
            ? static_cast<double>(init_stats.opcodes_evaluated) / secs
            : 0.0;
  }

  auto scan_population = [&](const std::vector<Individual>& p,
                             std::size_t gen) {
    for (const Individual& ind : p) {
      if (!result.solution && ind.fitness.total_abs_error == 0) {
        result.solution = ind.tree;
        result.solution_generation = gen;
      }
      if (result.best_of_run.tree.ops.empty() ||
          ind.fitness < result.best_of_run.fitness)
        result.best_of_run = ind;
    }
  };
  scan_population(pop, 0);
  result.stats.push_back(init_stats);
  if (on_generation) on_generation(init_stats);

  std::vector<bool> improved;
  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    GenStats stats;
    stats.generation = gen;
    std::vector<Individual> parents = std::move(pop);
    pop = breed_generation(parents, cfg, rng, stats, &improved);
    scan_population(pop, gen);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (!improved[i]) continue;
      const int d = depth(pop[i].tree);
      if (!result.deepest_improved || d > result.deepest_improved_depth) {
        result.deepest_improved = pop[i];
        result.deepest_improved_depth = d;
      }
    }
    result.stats.push_back(stats);
    if (on_generation) on_generation(stats);
  }
  result.final_pop = std::move(pop);
  return result;
}

struct TuneRow {
  std::size_t pop_size;
  std::size_t successes;
  std::size_t runs;
};

// Independent seeded runs per population size; success = any fitness-0
// individual by the generation limit.
inline std::vector<TuneRow> tuning_experiment(
    const std::vector<std::size_t>& pop_sizes, std::size_t runs_per_size,
    std::size_t generations, std::uint64_t seed, unsigned jobs = 1,
    const std::function<void(std::size_t, std::size_t, bool)>& on_run = {}) {
  std::vector<TuneRow> table;
  for (std::size_t p = 0; p < pop_sizes.size(); ++p) {
    TuneRow row{pop_sizes[p], 0, runs_per_size};
    for (std::size_t r = 0; r < runs_per_size; ++r) {
      RunConfig cfg;
      cfg.pop_size = pop_sizes[p];
      cfg.generations = generations;
      cfg.seed = splitmix64(seed + p * 1000003ULL + r);
      cfg.jobs = jobs;
      RunResult result = run_evolution(cfg);
      const bool success = result.solution.has_value();
      if (success) ++row.successes;
      if (on_run) on_run(pop_sizes[p], r, success);
    }
    table.push_back(row);
  }
  return table;
}

}  // namespace fibgp
