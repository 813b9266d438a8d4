#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "railsched/exact.hpp"
#include "railsched/heuristic.hpp"
#include "railsched/instance_gen.hpp"

namespace railsched {

struct BenchConfig {
    std::vector<std::size_t> sizes{6, 20, 40, 60, 80, 100};
    std::vector<std::uint64_t> seeds{1};
    std::size_t segments = 3;
    std::size_t freights = 10;
    SearchBudget exact_budget{50'000'000, 60.0};
    HeuristicParams heuristic;
    std::size_t jobs = 1;
    /// Size of the instance used for the OPT on/off convergence pair; 0 skips it.
    std::size_t opt_trace_trains = 60;
};

/// One table row. Empty cells were not run or failed.
struct BenchRow {
    std::size_t trains = 0;
    std::uint64_t seed = 0;
    std::optional<double> h_cpu, h_gap, h_fitness;
    std::optional<double> e_cpu, e_gap, e_lower, e_upper;
    std::optional<SolveStatus> e_status;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::vector<TraceRow> trace_opt;
    std::vector<TraceRow> trace_no_opt;
};

/// Trains split two to one between departing and returning.
inline Instance bench_instance(std::size_t trains, std::size_t segments, std::size_t freights,
                               std::uint64_t seed) {
    const std::size_t returning = trains / 3;
    return generate(segments, trains - returning, returning, freights, seed);
}

/// Runs one cell: the heuristic on the scheduling objective alone (the
/// allocation weight is zeroed so its fitness is comparable with the
/// scheduling bounds) and the exact solver within its budget.
inline BenchRow bench_cell(const BenchConfig& cfg, std::size_t trains, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    BenchRow row;
    row.trains = trains;
    row.seed = seed;
    const Instance inst = bench_instance(trains, cfg.segments, cfg.freights, seed);

    double lower = free_run_bound(inst);
    if (cfg.exact_budget.max_seconds > 0.0 && cfg.exact_budget.max_nodes > 0) {
        try {
            const auto rep = solve_scheduling_exact(inst, ObjectiveKind::WeightedTravelTime,
                                                    cfg.exact_budget);
            row.e_cpu = rep.cpu_seconds;
            row.e_gap = rep.gap;
            row.e_lower = rep.lower_bound;
            row.e_upper = rep.upper_bound;
            row.e_status = rep.status;
            lower = rep.lower_bound;
        } catch (const std::exception&) {
        }
    }
    try {
        HeuristicParams hp = cfg.heuristic;
        hp.allocation_weight = 0.0;
        hp.seed = seed;
        const auto started = clock::now();
        const auto res = run_heuristic(inst, hp);
        row.h_cpu = std::chrono::duration<double>(clock::now() - started).count();
        row.h_fitness = res.best.fitness;
        row.h_gap = relative_gap(lower, res.best.fitness);
    } catch (const std::exception&) {
    }
    return row;
}

/// Runs every (size, seed) cell, up to cfg.jobs at a time. Row order is the
/// sweep order regardless of scheduling.
inline BenchResult bench_compare(const BenchConfig& cfg) {
    BenchResult result;
    std::vector<std::pair<std::size_t, std::uint64_t>> cells;
    for (std::size_t size : cfg.sizes) {
        for (std::uint64_t seed : cfg.seeds) cells.emplace_back(size, seed);
    }
    result.rows.resize(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            result.rows[i] = bench_cell(cfg, cells[i].first, cells[i].second);
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    if (cfg.opt_trace_trains > 0) {
        const std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
        const Instance inst = bench_instance(cfg.opt_trace_trains, cfg.segments, cfg.freights, seed);
        HeuristicParams hp = cfg.heuristic;
        hp.seed = seed;
        hp.opt_enabled = true;
        result.trace_opt = run_heuristic(inst, hp).trace;
        hp.opt_enabled = false;
        result.trace_no_opt = run_heuristic(inst, hp).trace;
    }
    return result;
}

namespace detail {

inline std::string cell(const std::optional<double>& v, const char* spec = "{:.6f}") {
    if (!v) return "-";
    if (!std::isfinite(*v)) return "inf";
    return fmt::format(fmt::runtime(spec), *v);
}

}  // namespace detail

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "trains,h_cpu,h_gap,h_fitness,e_cpu,e_gap,e_lower,e_upper\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.trains, detail::cell(r.h_cpu, "{:.1f}"),
                           detail::cell(r.h_gap, "{}"), detail::cell(r.h_fitness, "{}"),
                           detail::cell(r.e_cpu, "{:.1f}"), detail::cell(r.e_gap, "{}"),
                           detail::cell(r.e_lower, "{}"), detail::cell(r.e_upper, "{}"));
    }
    return out;
}

/// Aligned plain-text rendering of the same columns; CPU in seconds and gaps
/// as fractions.
inline std::string bench_table(const std::vector<BenchRow>& rows) {
    std::string out = fmt::format("{:>6} {:>6} | {:>10} {:>8} {:>12} | {:>10} {:>8} {:>12} {:>12} {:>15}\n",
                                  "trains", "seed", "h_cpu[s]", "h_gap", "h_fitness", "e_cpu[s]",
                                  "e_gap", "e_lower", "e_upper", "e_status");
    for (const auto& r : rows) {
        out += fmt::format("{:>6} {:>6} | {:>10} {:>8} {:>12} | {:>10} {:>8} {:>12} {:>12} {:>15}\n",
                           r.trains, r.seed, detail::cell(r.h_cpu, "{:.1f}"),
                           detail::cell(r.h_gap, "{:.3f}"), detail::cell(r.h_fitness, "{:.3f}"),
                           detail::cell(r.e_cpu, "{:.1f}"), detail::cell(r.e_gap, "{:.3f}"),
                           detail::cell(r.e_lower, "{:.3f}"), detail::cell(r.e_upper, "{:.3f}"),
                           r.e_status ? to_string(*r.e_status) : "-");
    }
    return out;
}

}  // namespace railsched
