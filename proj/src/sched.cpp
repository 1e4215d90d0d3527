#include "hmai/sched.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hmai {

std::vector<std::size_t> SchedulerPolicy::decide_window(
    std::span<const TaskRecord> tasks, const PlatformView& view) {
  Platform scratch = view.p();
  PlatformView v = view;
  v.platform = &scratch;
  std::vector<std::size_t> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) {
    out.push_back(decide(t, v));
    scratch.commit(t, out.back(), view.now, view.now, view.overhead);
  }
  return out;
}

std::size_t minmin_choose(const TaskRecord& task, const PlatformView& view) {
  const Platform& p = view.p();
  std::size_t best = 0;
  double best_completion = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double c = p.predicted_completion(task, i, view.now, view.overhead);
    if (i == 0 || c < best_completion) {
      best = i;
      best_completion = c;
    }
  }
  return best;
}

std::size_t ata_choose(const TaskRecord& task, const PlatformView& view) {
  const Platform& p = view.p();
  std::optional<std::size_t> best;
  double best_energy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double response =
        p.predicted_completion(task, i, view.now, view.overhead) -
        task.capture_time;
    if (response > task.safety_time) continue;
    const double e = exec_energy(task, p.kind_of(i));
    if (!best || e < best_energy) {
      best = i;
      best_energy = e;
    }
  }
  return best ? *best : minmin_choose(task, view);
}

std::size_t worstcase_choose(const TaskRecord& task, const PlatformView& view) {
  const Platform& p = view.p();
  const auto& kinds = p.kinds();
  std::size_t best_kind = 0;
  for (std::size_t k = 1; k < kinds.size(); ++k) {
    if (kinds[k].fps_for(task.model) > kinds[best_kind].fps_for(task.model)) {
      best_kind = k;
    }
  }
  for (const auto& a : p.accelerators()) {
    if (a.kind == best_kind) return a.index;
  }
  return 0;
}

double window_fitness(std::span<const TaskRecord> tasks,
                      std::span<const std::size_t> assignment,
                      const PlatformView& view) {
  Platform scratch = view.p();
  double total = 0.0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    total += scratch
                 .commit(tasks[i], assignment[i], view.now, view.now,
                         view.overhead)
                 .reward;
  }
  return total;
}

namespace {

std::vector<std::size_t> random_assignment(std::size_t n, std::size_t n_accel,
                                           Rng& rng) {
  std::vector<std::size_t> a(n);
  for (auto& x : a) x = uniform_index(rng, n_accel);
  return a;
}

}  // namespace

std::vector<std::size_t> ga_schedule_window(std::span<const TaskRecord> tasks,
                                            const PlatformView& view, Rng& rng,
                                            const GaParams& params) {
  const std::size_t n = tasks.size();
  const std::size_t n_accel = view.p().size();
  if (n == 0) return {};
  if (params.population < 1) throw ConfigError("GA population must be >= 1");

  struct Individual {
    std::vector<std::size_t> genes;
    double fitness = 0.0;
  };
  const auto evaluate = [&](Individual& ind) {
    ind.fitness = window_fitness(tasks, ind.genes, view);
  };
  const auto pop_size = static_cast<std::size_t>(params.population);
  std::vector<Individual> pop(pop_size);
  for (auto& ind : pop) {
    ind.genes = random_assignment(n, n_accel, rng);
    evaluate(ind);
  }
  const auto by_fitness = [](const Individual& a, const Individual& b) {
    return a.fitness > b.fitness;
  };
  const auto tournament = [&]() -> const Individual& {
    std::size_t best = uniform_index(rng, pop_size);
    for (int k = 1; k < params.tournament; ++k) {
      const std::size_t c = uniform_index(rng, pop_size);
      if (pop[c].fitness > pop[best].fitness) best = c;
    }
    return pop[best];
  };

  for (int g = 0; g < params.generations; ++g) {
    std::stable_sort(pop.begin(), pop.end(), by_fitness);
    std::vector<Individual> next;
    next.reserve(pop_size);
    const auto elites = std::min<std::size_t>(
        pop_size, static_cast<std::size_t>(std::max(params.elitism, 0)));
    for (std::size_t e = 0; e < elites; ++e) next.push_back(pop[e]);
    while (next.size() < pop_size) {
      const Individual& a = tournament();
      const Individual& b = tournament();
      Individual child;
      child.genes = a.genes;
      if (n > 1) {
        const std::size_t cut = 1 + uniform_index(rng, n - 1);
        std::copy(b.genes.begin() + static_cast<std::ptrdiff_t>(cut),
                  b.genes.end(),
                  child.genes.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (auto& gene : child.genes) {
        if (uniform01(rng) < params.mutation_rate) {
          gene = uniform_index(rng, n_accel);
        }
      }
      evaluate(child);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (pop[i].fitness > pop[arg].fitness) arg = i;
  }
  return pop[arg].genes;
}

std::vector<std::size_t> sa_schedule_window(std::span<const TaskRecord> tasks,
                                            const PlatformView& view, Rng& rng,
                                            const SaParams& params) {
  const std::size_t n = tasks.size();
  const std::size_t n_accel = view.p().size();
  if (n == 0) return {};

  const auto cost = [&](const std::vector<std::size_t>& a) {
    return -window_fitness(tasks, a, view);
  };

  double temperature = 0.0;
  if (params.initial_temperature) {
    temperature = *params.initial_temperature;
  } else if (params.initial_samples > 1) {
    std::vector<double> samples;
    for (int i = 0; i < params.initial_samples; ++i) {
      samples.push_back(cost(random_assignment(n, n_accel, rng)));
    }
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                        static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    temperature = std::sqrt(var / static_cast<double>(samples.size() - 1));
  }

  auto current = random_assignment(n, n_accel, rng);
  double current_cost = cost(current);
  auto best = current;
  double best_cost = current_cost;
  if (n_accel < 2) return best;

  for (int it = 0; it < params.iterations; ++it) {
    temperature *= params.alpha;
    const std::size_t task = uniform_index(rng, n);
    const std::size_t old = current[task];
    std::size_t repl = uniform_index(rng, n_accel - 1);
    if (repl >= old) ++repl;
    current[task] = repl;
    const double c = cost(current);
    const double delta = c - current_cost;
    const double u = uniform01(rng);
    const bool accept =
        delta <= 0.0 || (temperature > 0.0 && u < std::exp(-delta / temperature));
    if (accept) {
      current_cost = c;
      if (c < best_cost) {
        best_cost = c;
        best = current;
      }
    } else {
      current[task] = old;
    }
  }
  return best;
}

namespace {

// Instance counts (SconvOD, SconvIC, MconvMC) per [scenario][model].
constexpr std::array<std::array<std::array<int, 3>, 3>, 3> kStaticAllocation{{
    {{{1, 2, 0}, {3, 1, 2}, {0, 1, 1}}},  // GoStraight: YOLO, SSD, GOTURN
    {{{2, 0, 1}, {2, 4, 0}, {0, 0, 2}}},  // Turn
    {{{0, 3, 0}, {2, 0, 3}, {2, 1, 0}}},  // Reverse
}};

constexpr std::array<std::string_view, 3> kStaticKinds{"SconvOD", "SconvIC",
                                                       "MconvMC"};

}  // namespace

StaticAllocation::StaticAllocation(const Platform& platform) {
  std::array<std::vector<std::size_t>, 3> instances;
  for (const auto& a : platform.accelerators()) {
    const auto& name = platform.kinds()[a.kind].name;
    for (std::size_t k = 0; k < 3; ++k) {
      if (name == kStaticKinds[k]) instances[k].push_back(a.index);
    }
  }
  for (Scenario s : kScenarios) {
    std::array<std::size_t, 3> next{};
    for (Model m : kModels) {
      auto& subset = subsets_[index_of(s)][index_of(m)];
      for (std::size_t k = 0; k < 3; ++k) {
        for (int c = 0; c < kStaticAllocation[index_of(s)][index_of(m)][k]; ++c) {
          if (next[k] >= instances[k].size()) {
            throw ConfigError(
                "static allocation needs at least 4 SconvOD, 4 SconvIC and "
                "3 MconvMC accelerators");
          }
          subset.push_back(instances[k][next[k]++]);
        }
      }
      std::sort(subset.begin(), subset.end());
    }
  }
}

const std::vector<std::size_t>& StaticAllocation::subset(Model m,
                                                         Scenario s) const {
  return subsets_[index_of(s)][index_of(m)];
}

std::size_t StaticAllocation::choose(const TaskRecord& task, Scenario s) {
  const auto& set = subset(task.model, s);
  if (set.empty()) {
    throw DomainError("static has no allocation for " +
                      std::string(to_string(task.model)) + " in " +
                      std::string(to_string(s)));
  }
  auto& cursor = cursor_[index_of(s)][index_of(task.model)];
  const std::size_t pick = set[cursor % set.size()];
  ++cursor;
  return pick;
}

std::size_t static_choose(const TaskRecord& task, Scenario scenario,
                                 StaticAllocation& allocation) {
  return allocation.choose(task, scenario);
}

std::size_t StaticScheduler::decide(const TaskRecord& t,
                                    const PlatformView& v) {
  if (!v.scenario) {
    throw DomainError("static scheduler needs the route's scenario schedule");
  }
  if (!alloc_) alloc_ = std::make_unique<StaticAllocation>(v.p());
  return static_choose(t, *v.scenario, *alloc_);
}

GaScheduler::GaScheduler(GaParams params, double window, std::uint64_t seed)
    : params_(params), window_(window), seed_(seed), rng_(seed) {}

std::size_t GaScheduler::decide(const TaskRecord& t, const PlatformView& v) {
  return ga_schedule_window(std::span(&t, 1), v, rng_, params_).front();
}

std::vector<std::size_t> GaScheduler::decide_window(
    std::span<const TaskRecord> tasks, const PlatformView& view) {
  return ga_schedule_window(tasks, view, rng_, params_);
}

SaScheduler::SaScheduler(SaParams params, double window, std::uint64_t seed)
    : params_(params), window_(window), seed_(seed), rng_(seed) {}

std::size_t SaScheduler::decide(const TaskRecord& t, const PlatformView& v) {
  return sa_schedule_window(std::span(&t, 1), v, rng_, params_).front();
}

std::vector<std::size_t> SaScheduler::decide_window(
    std::span<const TaskRecord> tasks, const PlatformView& view) {
  return sa_schedule_window(tasks, view, rng_, params_);
}

}  // namespace hmai
