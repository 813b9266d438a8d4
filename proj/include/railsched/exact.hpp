#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "railsched/core.hpp"
#include "railsched/decode.hpp"
#include "railsched/timing.hpp"

namespace railsched {

struct SearchBudget {
    std::size_t max_nodes = 50'000'000;
    double max_seconds = 60.0;
};

enum class SolveStatus : std::uint8_t { Optimal, BudgetExhausted };

inline const char* to_string(SolveStatus s) {
    return s == SolveStatus::Optimal ? "Optimal" : "BudgetExhausted";
}

/// One anytime sample: incumbent and global lower bound after `nodes` nodes.
struct ProgressPoint {
    std::size_t nodes;
    double incumbent;
    double lower;
};

struct SolveReport {
    Schedule schedule;
    Ordering ordering;
    ObjectiveKind kind = ObjectiveKind::WeightedTravelTime;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    double gap = 0.0;  ///< (upper - lower) / lower; infinity when undefined
    std::size_t nodes_explored = 0;
    double cpu_seconds = 0.0;  ///< wall clock of the solve call
    SolveStatus status = SolveStatus::Optimal;
    std::vector<ProgressPoint> progress;
};

/// Relative gap between bounds. Zero when they meet, infinity when the
/// lower bound is not positive and they do not.
inline double relative_gap(double lower, double upper) {
    if (upper - lower <= kTimeTolerance) return 0.0;
    if (lower <= 0.0) return std::numeric_limits<double>::infinity();
    return (upper - lower) / lower;
}

struct BnBNode {
    Ordering partial;
    double bound = 0.0;
    std::size_t depth = 0;
};

inline double free_run_bound(const Instance& inst) {
    double total = 0.0;
    for (const auto& t : inst.trains) total += t.priority * t.free_run_time();
    return total;
}

namespace detail {

/// Same-direction trains leave a segment at least `st` apart, so given
/// per-train earliest departures the sum of departures is at least that of
/// the release-ordered spacing.
inline double spaced_sum(std::vector<double> release, double st) {
    std::sort(release.begin(), release.end());
    double total = 0.0;
    double prev = -std::numeric_limits<double>::infinity();
    for (double r : release) {
        prev = std::max(r, prev + st);
        total += prev;
    }
    return total;
}

/// Lower bound on every completion of the partial ordering whose earliest
/// times are `times`. `path` returns the longest path between two nodes
/// over the fixed arcs, or nothing when too expensive to compute.
template <typename PathFn>
double partial_bound(const Instance& inst, const EventLayout& ev, const std::vector<double>& times,
                     ObjectiveKind kind, PathFn&& path) {
    const std::size_t n = inst.segments();
    const std::size_t last = n - 1;
    double total = 0.0;
    if (kind == ObjectiveKind::WeightedTravelTime) {
        for (std::size_t t = 0; t < inst.trains.size(); ++t) {
            double travel = inst.trains[t].free_run_time();
            if (auto p = path(ev.first_dep(t), ev.last_arr(t))) travel = std::max(travel, *p);
            total += inst.trains[t].priority * travel;
        }
        return total;
    }
    double plain = 0.0;
    for (Direction d : {Direction::Departing, Direction::Returning}) {
        const auto group = inst.trains_in(d);
        if (group.empty()) continue;
        std::vector<double> release;
        double runs = 0.0;
        const std::size_t k = kind == ObjectiveKind::TotalDeparture ? 0 : last;
        for (std::size_t t : group) {
            release.push_back(times[ev.dep(t, k)]);
            if (kind == ObjectiveKind::TotalArrival) {
                runs += inst.trains[t].min_run[k];
                plain += times[ev.last_arr(t)];
            } else {
                plain += times[ev.first_dep(t)];
            }
        }
        total += spaced_sum(std::move(release), inst.safety_for(d, k)) + runs;
    }
    return std::max(total, plain);
}

/// Branching order: opposing pairs before same-direction pairs, each by
/// physical segment in decreasing contention (total minimum run time on it).
inline std::vector<std::array<std::size_t, 3>> decision_order(const Instance& inst) {
    const std::size_t n = inst.segments();
    const std::size_t count = inst.trains.size();
    std::vector<double> load(n, 0.0);
    for (const auto& tr : inst.trains) {
        for (std::size_t k = 0; k < n; ++k) {
            load[physical_segment(tr.direction, k + 1, n) - 1] += tr.min_run[k];
        }
    }
    std::vector<std::size_t> segs(n);
    std::iota(segs.begin(), segs.end(), 0);
    std::stable_sort(segs.begin(), segs.end(),
                     [&](std::size_t a, std::size_t b) { return load[a] > load[b]; });
    std::vector<std::array<std::size_t, 3>> out;
    for (bool opposing : {true, false}) {
        for (std::size_t seg : segs) {
            for (std::size_t a = 0; a < count; ++a) {
                for (std::size_t b = a + 1; b < count; ++b) {
                    const bool opp = inst.trains[a].direction != inst.trains[b].direction;
                    if (opp == opposing) out.push_back({seg, a, b});
                }
            }
        }
    }
    return out;
}

/// Longest paths are only used while their cost stays small next to the
/// rest of the node work.
inline bool path_bound_affordable(const EventLayout& ev) {
    return ev.node_count() * ev.trains <= 20'000;
}

}  // namespace detail

/// Lower bound for a search node: the larger of the free-run bound and the
/// bound from the earliest times over the already fixed decisions.
/// Returns infinity when the fixed decisions are already contradictory.
inline double scheduling_lower_bound(const Instance& inst, const BnBNode& node,
                                     ObjectiveKind kind = ObjectiveKind::WeightedTravelTime) {
    const auto g = build_constraint_graph(inst, node.partial, true);
    const auto outcome = earliest_times(g);
    if (!outcome.is_feasible()) return std::numeric_limits<double>::infinity();
    IncrementalTimes inc(g.node_count());
    for (const auto& a : g.arcs) inc.add_arc(a);
    const double b = detail::partial_bound(
        inst, g.layout, outcome.node_times(), kind,
        [&](std::size_t s, std::size_t d) -> std::optional<double> {
            return inc.longest_path(s, d);
        });
    return kind == ObjectiveKind::WeightedTravelTime ? std::max(b, free_run_bound(inst)) : b;
}

/// Depth-first branch and bound over the pairwise precedence decisions.
/// Every leaf is timed by solve_fixed_order, so an Optimal result equals the
/// best complete ordering under that timing rule.
inline SolveReport solve_scheduling_exact(const Instance& inst,
                                          ObjectiveKind kind = ObjectiveKind::WeightedTravelTime,
                                          const SearchBudget& budget = {}) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    const std::size_t n = inst.segments();
    const std::size_t count = inst.trains.size();
    const EventLayout ev{count, n};
    constexpr double inf = std::numeric_limits<double>::infinity();

    SolveReport rep;
    rep.kind = kind;

    // Initial incumbent: both directions in decreasing priority.
    {
        auto by_priority = [&](Direction d) {
            auto seq = inst.trains_in(d);
            std::stable_sort(seq.begin(), seq.end(), [&](std::size_t a, std::size_t b) {
                return inst.trains[a].priority > inst.trains[b].priority;
            });
            return seq;
        };
        rep.ordering = decode_sequences(inst, by_priority(Direction::Departing),
                                        by_priority(Direction::Returning), kind);
        auto outcome = solve_fixed_order(inst, rep.ordering, kind);
        rep.schedule = outcome.schedule();
        rep.upper_bound = rep.schedule.objective;
    }

    IncrementalTimes inc(ev.node_count());
    attach_objective(inc, inst, ev, kind);
    detail::emit_train_arcs(inst, ev, [&](const Arc& a) { inc.add_arc(a); });
    const bool use_paths =
        kind == ObjectiveKind::WeightedTravelTime && detail::path_bound_affordable(ev);
    auto bound_now = [&] {
        return detail::partial_bound(
            inst, ev, inc.times(), kind,
            [&](std::size_t s, std::size_t d) -> std::optional<double> {
                if (!use_paths) return std::nullopt;
                return inc.longest_path(s, d);
            });
    };
    const double root_bound = std::max(
        bound_now(), kind == ObjectiveKind::WeightedTravelTime ? free_run_bound(inst) : -inf);

    const auto decisions = detail::decision_order(inst);
    Ordering ord(count, n);

    struct Child {
        std::size_t leader;
        double bound;
    };
    struct Frame {
        std::size_t depth;
        IncrementalTimes::Mark mark;
        std::array<Child, 2> child;
        std::size_t count = 0;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;

    auto apply = [&](std::size_t depth, std::size_t leader) {
        const auto& [seg, a, b] = decisions[depth];
        const std::size_t follower = leader == a ? b : a;
        bool ok = true;
        detail::emit_pair_arcs(inst, ev, seg, leader, follower,
                               [&](const Arc& arc) { ok = ok && inc.add_arc(arc); });
        if (ok) ord.set_leader(seg, leader, follower);
        return ok;
    };

    auto global_lower = [&] {
        double lo = rep.upper_bound;
        for (const auto& f : stack) {
            for (std::size_t i = f.next; i < f.count; ++i) lo = std::min(lo, f.child[i].bound);
        }
        return std::max(std::min(lo, rep.upper_bound), std::min(root_bound, rep.upper_bound));
    };
    auto sample = [&] {
        rep.progress.push_back({rep.nodes_explored, rep.upper_bound, global_lower()});
    };

    auto expand = [&](std::size_t depth) {
        ++rep.nodes_explored;
        if (depth == decisions.size()) {
            if (kind != ObjectiveKind::WeightedTravelTime &&
                inc.weighted_sum() >= rep.upper_bound - kTimeTolerance) {
                return;
            }
            auto outcome = solve_fixed_order(inst, ord, kind);
            if (outcome.is_feasible() &&
                outcome.schedule().objective < rep.upper_bound - kTimeTolerance) {
                rep.schedule = outcome.schedule();
                rep.ordering = ord;
                rep.upper_bound = rep.schedule.objective;
                sample();
            }
            return;
        }
        Frame f{depth, inc.mark(), {}, 0, 0};
        const auto& d = decisions[depth];
        for (std::size_t leader : {d[1], d[2]}) {
            if (apply(depth, leader)) {
                const double b = std::max(bound_now(), root_bound);
                if (b < rep.upper_bound - kTimeTolerance) f.child[f.count++] = {leader, b};
            }
            inc.undo(f.mark);
            ord.clear(d[0], d[1], d[2]);
        }
        if (f.count == 2 && f.child[1].bound < f.child[0].bound) std::swap(f.child[0], f.child[1]);
        if (f.count > 0) stack.push_back(f);
    };

    rep.progress.push_back({0, rep.upper_bound, std::min(root_bound, rep.upper_bound)});
    bool exhausted = false;
    if (root_bound < rep.upper_bound - kTimeTolerance) expand(0);
    while (!stack.empty()) {
        if (rep.nodes_explored >= budget.max_nodes ||
            ((rep.nodes_explored & 255) == 0 &&
             std::chrono::duration<double>(clock::now() - started).count() > budget.max_seconds)) {
            exhausted = true;
            break;
        }
        if ((rep.nodes_explored & 4095) == 0) sample();
        Frame& f = stack.back();
        const auto& d = decisions[f.depth];
        if (f.next > 0) {
            inc.undo(f.mark);
            ord.clear(d[0], d[1], d[2]);
        }
        while (f.next < f.count && f.child[f.next].bound >= rep.upper_bound - kTimeTolerance) {
            ++f.next;
        }
        if (f.next == f.count) {
            stack.pop_back();
            continue;
        }
        const std::size_t leader = f.child[f.next++].leader;
        const std::size_t depth = f.depth;
        apply(depth, leader);
        expand(depth + 1);
    }

    rep.lower_bound = exhausted ? global_lower() : rep.upper_bound;
    rep.status = exhausted ? SolveStatus::BudgetExhausted : SolveStatus::Optimal;
    rep.gap = relative_gap(rep.lower_bound, rep.upper_bound);
    sample();
    rep.cpu_seconds = std::chrono::duration<double>(clock::now() - started).count();
    return rep;
}

}  // namespace railsched
