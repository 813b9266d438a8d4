// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Pass criterion numbers as arguments to run a
// subset.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "support.hpp"

namespace {

using namespace railsched;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

constexpr ObjectiveKind kKinds[] = {ObjectiveKind::TotalDeparture, ObjectiveKind::TotalArrival,
                                    ObjectiveKind::WeightedTravelTime};

// 1. Exact solver against exhaustive enumeration on 50 desk-size instances.
Outcome oracle_equivalence() {
    int mismatches = 0, not_optimal = 0;
    double exact_seconds = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto inst = generate(3, 3, 2, 0, 1000 + seed);
        for (auto kind : kKinds) {
            const auto start = clock_type::now();
            const auto rep = solve_scheduling_exact(inst, kind);
            exact_seconds += seconds_since(start);
            const auto oracle = testing::enumerate_optimum(inst, kind);
            if (rep.status != SolveStatus::Optimal) ++not_optimal;
            if (!oracle || std::abs(rep.upper_bound - *oracle) > 1e-9) ++mismatches;
        }
    }
    return {mismatches == 0 && not_optimal == 0 && exact_seconds < 60.0,
            fmt::format("150 solves, {} mismatches, {} not optimal, exact time {:.2f} s", mismatches,
                        not_optimal, exact_seconds)};
}

/// Breaks one constraint of a feasible schedule and returns the family
/// that was targeted, or nothing when the instance offers no such pair.
std::optional<ConstraintFamily> inject(const Instance& inst, Schedule& s, std::mt19937_64& rng) {
    const std::size_t n = inst.segments();
    const std::size_t T = inst.trains.size();
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    const std::size_t t = rng() % T;
    auto& tt = s.trains[t];
    switch (rng() % 6) {
        case 0: {
            const std::size_t k = rng() % n;
            const double mr = inst.trains[t].min_run[k];
            if (mr <= 0.01) return std::nullopt;
            tt.arr[k] = tt.dep[k] + mr * frac(rng);
            return ConstraintFamily::RunTime;
        }
        case 1: {
            if (n < 2) return std::nullopt;
            const std::size_t k = rng() % (n - 1);
            const double stop = inst.trains[t].stop_time(k + 1);
            if (stop <= 0.01) return std::nullopt;
            tt.dep[k + 1] = tt.arr[k] + stop * frac(rng);
            return ConstraintFamily::StationStop;
        }
        case 2: {
            // Pull the follower of a same-direction pair inside the lag.
            const std::size_t k = rng() % n;
            const std::size_t seg = physical_segment(inst.trains[t].direction, k + 1, n);
            const double st = inst.safety[seg - 1];
            if (st <= 0.01) return std::nullopt;
            std::optional<std::size_t> leader;
            for (std::size_t u = 0; u < T; ++u) {
                if (u == t || inst.trains[u].direction != inst.trains[t].direction) continue;
                if (s.trains[u].dep[k] <= tt.dep[k] &&
                    (!leader || s.trains[u].dep[k] > s.trains[*leader].dep[k])) {
                    leader = u;
                }
            }
            if (!leader) return std::nullopt;
            tt.dep[k] = s.trains[*leader].dep[k] + st * frac(rng);
            return ConstraintFamily::Headway;
        }
        case 3: {
            // Start an opposing traversal inside this train's occupation.
            const std::size_t k = rng() % n;
            const std::size_t seg = physical_segment(inst.trains[t].direction, k + 1, n);
            for (std::size_t u = 0; u < T; ++u) {
                if (inst.trains[u].direction == inst.trains[t].direction) continue;
                const std::size_t ku = traversal_index(inst.trains[u].direction, seg, n) - 1;
                if (tt.arr[k] - tt.dep[k] <= 0.01 || inst.trains[u].min_run[ku] <= 0.0) continue;
                const double start = tt.dep[k] + (tt.arr[k] - tt.dep[k]) * frac(rng);
                const double len = s.trains[u].arr[ku] - s.trains[u].dep[ku];
                s.trains[u].dep[ku] = start;
                s.trains[u].arr[ku] = start + len;
                return ConstraintFamily::Collision;
            }
            return std::nullopt;
        }
        case 4:
            tt.dep[0] = -0.5 - frac(rng);
            return ConstraintFamily::NegativeTime;
        default:
            tt.arr[rng() % n] = std::numeric_limits<double>::quiet_NaN();
            return ConstraintFamily::NonFinite;
    }
}

// 2. Solver output is clean; every single injected breach is reported.
Outcome validator_supremacy() {
    std::mt19937_64 rng(2);
    int dirty_outputs = 0, missed = 0, injected = 0;
    int pairs = 0;
    while (pairs < 10'000) {
        const auto inst = generate(1 + rng() % 4, 1 + rng() % 4, rng() % 4, 0, rng());
        Schedule s;
        if (pairs % 50 == 0) {
            s = solve_scheduling_exact(inst, kKinds[rng() % 3], {20'000, 5.0}).schedule;
        } else {
            s = solve_fixed_order(inst, testing::random_ordering(inst, rng), kKinds[rng() % 3])
                    .schedule();
        }
        ++pairs;
        if (!validate_schedule(inst, s).empty()) ++dirty_outputs;
        Schedule broken = s;
        std::optional<ConstraintFamily> family;
        for (int attempt = 0; attempt < 20 && !family; ++attempt) {
            broken = s;
            family = inject(inst, broken, rng);
        }
        if (!family) continue;
        ++injected;
        bool named = false;
        for (const auto& v : validate_schedule(inst, broken)) named = named || v.family == *family;
        if (!named) ++missed;
    }
    return {dirty_outputs == 0 && missed == 0 && injected >= 9'000,
            fmt::format("{} pairs, {} dirty solver outputs, {} injected breaches, {} missed", pairs,
                        dirty_outputs, injected, missed)};
}

// 3. Tardiness identity and exact allocation against 4^5 enumeration.
Outcome allocation_arithmetic() {
    const bool identity = tardiness(18.5, 10) == 8.5 && tardiness(12, 10) == 2.0 &&
                          tardiness(23.5, 10) == 13.5;
    int mismatches = 0;
    std::size_t evaluated = 0;
    GeneratorRanges ranges;
    ranges.capacity_lo = 40;
    ranges.capacity_hi = 80;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = generate(3, 3, 0, 5, 500 + seed, ranges);
        const auto sched = solve_scheduling_exact(inst, ObjectiveKind::TotalDeparture).schedule;
        const auto res = solve_allocation_exact(inst, sched);
        // Every freight: train 0, 1, 2 or none.
        std::size_t best_rel = SIZE_MAX;
        double best_obj = 0.0;
        for (int code = 0; code < 1024; ++code) {
            ++evaluated;
            std::vector<double> load(3, 0.0);
            double obj = 0.0;
            bool ok = true;
            for (int j = 0, c = code; j < 5; ++j, c /= 4) {
                if (c % 4 == 3) continue;
                const auto& f = inst.freights[j];
                const auto& tr = inst.trains[c % 4];
                load[c % 4] += f.weight;
                ok = ok && sched.trains[c % 4].dep[0] >= f.release + tr.load[0] - 1e-9;
                obj += f.priority * (sched.trains[c % 4].arr.back() - f.due) - f.priority;
            }
            std::size_t rel = 0;
            for (int t = 0; t < 3; ++t) {
                ok = ok && load[t] <= inst.trains[t].capacity + 1e-9;
                rel += load[t] < inst.capacity_floor * inst.trains[t].capacity - 1e-9 ? 1 : 0;
            }
            if (!ok) continue;
            if (rel < best_rel || (rel == best_rel && obj < best_obj)) {
                best_rel = rel;
                best_obj = obj;
            }
        }
        if (res.relaxed != best_rel || std::abs(res.objective - best_obj) > 1e-9) ++mismatches;
    }
    return {identity && mismatches == 0,
            fmt::format("tardiness identity {}, 20 cases ({} assignments), {} mismatches",
                        identity ? "holds" : "broken", evaluated, mismatches)};
}

// 4. Every accepted allocation puts each freight on at most one train.
Outcome single_assignment() {
    std::mt19937_64 rng(4);
    int outputs = 0, rejected = 0, multi = 0;
    while (outputs < 1000) {
        const auto inst = generate(1 + rng() % 3, 1 + rng() % 4, rng() % 3, rng() % 8, rng());
        const auto sched = solve_fixed_order(inst, testing::random_ordering(inst, rng),
                                             ObjectiveKind::TotalArrival)
                               .schedule();
        const Allocation alloc = outputs % 2 == 0 ? solve_allocation_exact(inst, sched).alloc
                                                  : allocate_for_schedule(inst, sched);
        ++outputs;
        if (!check_allocation(inst, sched, alloc).empty()) {
            ++rejected;
            continue;
        }
        const auto x = assignment_matrix(inst, alloc);
        for (std::size_t j = 0; j < inst.freights.size(); ++j) {
            int col = 0;
            for (const auto& row : x) col += row[j];
            if (col > 1) ++multi;
        }
    }
    return {rejected == 0 && multi == 0,
            fmt::format("{} solver outputs, {} rejected, {} multiply assigned freights", outputs,
                        rejected, multi)};
}

// 5. The ten-train resequencing example.
Outcome resequencing() {
    const std::vector<int> seq{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const std::vector<int> ref{4, 3, 5, 6, 7, 8, 10, 1, 2, 9};
    const auto out = reorder_toward_reference(seq, ref, {2, 4, 10});
    const std::vector<int> expected{10, 1, 4, 3, 5, 6, 7, 8, 2, 9};
    return {out == expected, fmt::format("got [{}]", fmt::join(out, ","))};
}

// 6. Heuristic reaches the exact optimum on 6-train instances.
Outcome small_scale_optimality() {
    int hits = 0;
    double heuristic_seconds = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = generate(3, 4, 2, 0, 600 + seed);
        const auto exact = solve_scheduling_exact(inst, ObjectiveKind::WeightedTravelTime);
        HeuristicParams p;
        p.population = 30;
        p.iterations = 200;
        p.seed = seed;
        const auto start = clock_type::now();
        const auto res = run_heuristic(inst, p);
        heuristic_seconds += seconds_since(start);
        if (exact.status == SolveStatus::Optimal &&
            relative_gap(exact.upper_bound, res.best.fitness) <= 1e-6) {
            ++hits;
        }
    }
    return {hits >= 18 && heuristic_seconds < 120.0,
            fmt::format("{}/20 at the exact optimum, heuristic time {:.1f} s", hits,
                        heuristic_seconds)};
}

// Population and iteration count used for the 60-train OPT comparison.
constexpr std::size_t kOptPopulation = 8;
constexpr std::size_t kOptIterations = 15;

// 7. OPT on versus off with paired seeds on 60-train instances.
Outcome opt_efficacy() {
    int opt_not_worse = 0, monotone = 0;
    const auto start = clock_type::now();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = bench_instance(60, 3, 10, 700 + seed);
        HeuristicParams p;
        p.population = kOptPopulation;
        p.iterations = kOptIterations;
        p.seed = seed;
        p.opt_enabled = true;
        const auto with = run_heuristic(inst, p);
        p.opt_enabled = false;
        const auto without = run_heuristic(inst, p);
        if (with.best.fitness <= without.best.fitness + 1e-9) ++opt_not_worse;
        bool mono = true;
        for (const auto* res : {&with, &without}) {
            for (std::size_t i = 1; i < res->trace.size(); ++i) {
                mono = mono && res->trace[i].best <= res->trace[i - 1].best;
            }
        }
        if (mono) ++monotone;
    }
    return {opt_not_worse >= 18 && monotone == 20,
            fmt::format("OPT not worse on {}/20, traces nonincreasing on {}/20 "
                        "(population {}, {} iterations, {:.0f} s)",
                        opt_not_worse, monotone, kOptPopulation, kOptIterations,
                        seconds_since(start))};
}

// 8. The departure-optimal schedule has the least total departure.
Outcome cross_objective_dominance() {
    int violations = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto inst = desk_instance(seed);
        double dep_value[3];
        for (int k = 0; k < 3; ++k) {
            const auto rep = solve_scheduling_exact(inst, kKinds[k]);
            dep_value[k] = objective_value(inst, rep.schedule, ObjectiveKind::TotalDeparture);
        }
        if (dep_value[0] > dep_value[1] + 1e-9 || dep_value[0] > dep_value[2] + 1e-9) ++violations;
    }
    return {violations == 0, fmt::format("50 instances, {} dominance violations", violations)};
}

/// Every non-timing output for one instance, concatenated.
std::string all_outputs(std::uint64_t seed) {
    std::string out = to_json(desk_instance(seed)).dump();
    const auto inst = desk_instance(seed);
    for (auto kind : kKinds) {
        const auto rep = solve_scheduling_exact(inst, kind);
        auto report = to_json(rep);
        report.erase("cpu_seconds");
        out += to_json(inst, rep.schedule).dump() + report.dump();
        out += render_train_time(inst, rep.schedule, ChartFormat::Svg);
        out += render_train_time(inst, rep.schedule, ChartFormat::Text);
        out += render_train_location(inst, rep.schedule, ChartFormat::Svg);
        out += render_train_location(inst, rep.schedule, ChartFormat::Text);
        out += to_json(inst, solve_allocation_exact(inst, rep.schedule).alloc).dump();
    }
    HeuristicParams p;
    p.population = 10;
    p.iterations = 20;
    p.seed = seed;
    const auto res = run_heuristic(inst, p);
    out += to_json(inst, res.best).dump() + trace_csv(res.trace);
    return out;
}

// 9. Two runs with the same seed give byte-identical outputs.
Outcome determinism() {
    int differing = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        if (all_outputs(seed) != all_outputs(seed)) ++differing;
    }
    return {differing == 0, fmt::format("10 instances, {} differing", differing)};
}

constexpr std::size_t kScalePopulation = 10;
constexpr std::size_t kScaleIterations = 20;

// 10. 100 trains: the heuristic finishes cleanly; exact stops on its budget.
Outcome scale_smoke() {
    const auto inst = bench_instance(100, 3, 10, 1);
    HeuristicParams p;
    p.population = kScalePopulation;
    p.iterations = kScaleIterations;
    const auto start = clock_type::now();
    const auto res = run_heuristic(inst, p);
    const double heuristic_seconds = seconds_since(start);
    const bool clean = validate_schedule(inst, res.best.sched).empty() &&
                       check_allocation(inst, res.best.sched, res.best.alloc).empty();
    const auto rep = solve_scheduling_exact(inst, ObjectiveKind::TotalArrival, {50'000'000, 60.0});
    const bool exact_ok = rep.status == SolveStatus::BudgetExhausted && std::isfinite(rep.gap) &&
                          validate_schedule(inst, rep.schedule).empty();
    return {clean && heuristic_seconds < 600.0 && exact_ok,
            fmt::format("heuristic {:.1f} s ({}), exact {} after {:.1f} s, gap {:.4f}",
                        heuristic_seconds, clean ? "clean" : "violations", to_string(rep.status),
                        rep.cpu_seconds, rep.gap)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"validator supremacy", validator_supremacy},
        {"allocation arithmetic", allocation_arithmetic},
        {"single assignment", single_assignment},
        {"resequencing example", resequencing},
        {"small-scale optimality", small_scale_optimality},
        {"OPT efficacy", opt_efficacy},
        {"cross-objective dominance", cross_objective_dominance},
        {"determinism", determinism},
        {"scale smoke test", scale_smoke},
    };
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(static_cast<std::size_t>(std::stoul(argv[i])));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        const auto& [name, check] = criteria[i];
        Outcome o{false, ""};
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, name.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
