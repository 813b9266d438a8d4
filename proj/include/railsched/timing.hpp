#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "railsched/core.hpp"
#include "railsched/validate.hpp"

namespace railsched {

/// Node numbering of the event graph: node 0 is the time origin, then one
/// departure and one arrival node per train and traversal index.
struct EventLayout {
    std::size_t trains = 0;
    std::size_t segments = 0;

    static constexpr std::size_t origin = 0;
    std::size_t node_count() const { return 1 + 2 * trains * segments; }
    std::size_t dep(std::size_t t, std::size_t k) const { return 1 + 2 * (t * segments + k); }
    std::size_t arr(std::size_t t, std::size_t k) const { return dep(t, k) + 1; }
    std::size_t first_dep(std::size_t t) const { return dep(t, 0); }
    std::size_t last_arr(std::size_t t) const { return arr(t, segments - 1); }
};

enum class ArcKind : std::uint8_t { Origin, Run, Station, Headway, ArrivalHeadway, Opposing, Other };

/// time(to) - time(from) >= bound
struct Arc {
    std::size_t from;
    std::size_t to;
    double bound;
    ArcKind kind = ArcKind::Other;
};

/// Difference-constraint system over the event nodes.
struct ConstraintGraph {
    EventLayout layout;
    std::vector<Arc> arcs;

    std::size_t node_count() const { return layout.node_count(); }
};

namespace detail {

/// Raises below this are treated as no change; keeps zero-weight cycles
/// from looping on rounding noise.
inline constexpr double kRaiseEpsilon = 1e-10;

template <typename Sink>
void emit_train_arcs(const Instance& inst, const EventLayout& ev, Sink&& sink) {
    const std::size_t n = inst.segments();
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        const auto& tr = inst.trains[t];
        sink(Arc{EventLayout::origin, ev.first_dep(t), 0.0, ArcKind::Origin});
        for (std::size_t k = 0; k < n; ++k) {
            sink(Arc{ev.dep(t, k), ev.arr(t, k), tr.min_run[k], ArcKind::Run});
            if (k + 1 < n) {
                sink(Arc{ev.arr(t, k), ev.dep(t, k + 1), tr.stop_time(k + 1), ArcKind::Station});
            }
        }
    }
}

/// Arcs fixing `leader` ahead of `follower` on physical segment `seg` (0-based).
template <typename Sink>
void emit_pair_arcs(const Instance& inst, const EventLayout& ev, std::size_t seg,
                    std::size_t leader, std::size_t follower, Sink&& sink) {
    const std::size_t n = inst.segments();
    const auto& tl = inst.trains[leader];
    const auto& tf = inst.trains[follower];
    const std::size_t kl = traversal_index(tl.direction, seg + 1, n) - 1;
    const std::size_t kf = traversal_index(tf.direction, seg + 1, n) - 1;
    if (tl.direction == tf.direction) {
        const double st = inst.safety[seg];
        sink(Arc{ev.dep(leader, kl), ev.dep(follower, kf), st, ArcKind::Headway});
        if (inst.arrival_headway) {
            sink(Arc{ev.arr(leader, kl), ev.arr(follower, kf), st, ArcKind::ArrivalHeadway});
        }
    } else {
        sink(Arc{ev.arr(leader, kl), ev.dep(follower, kf), 0.0, ArcKind::Opposing});
    }
}

struct Adjacency {
    std::vector<std::size_t> offset;
    std::vector<std::size_t> arc;  ///< indices into the arc list

    Adjacency(std::size_t nodes, const std::vector<Arc>& arcs, bool reverse)
        : offset(nodes + 1, 0), arc(arcs.size()) {
        for (const auto& a : arcs) ++offset[(reverse ? a.to : a.from) + 1];
        for (std::size_t i = 0; i < nodes; ++i) offset[i + 1] += offset[i];
        std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            arc[fill[reverse ? arcs[i].to : arcs[i].from]++] = i;
        }
    }
};

/// Kahn order of the graph, or nullopt when it has a cycle.
inline std::optional<std::vector<std::size_t>> topological_order(std::size_t nodes,
                                                                 const std::vector<Arc>& arcs,
                                                                 const Adjacency& out) {
    std::vector<std::size_t> indeg(nodes, 0);
    for (const auto& a : arcs) ++indeg[a.to];
    std::vector<std::size_t> order;
    order.reserve(nodes);
    for (std::size_t v = 0; v < nodes; ++v) {
        if (indeg[v] == 0) order.push_back(v);
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
        const std::size_t u = order[head];
        for (std::size_t i = out.offset[u]; i < out.offset[u + 1]; ++i) {
            const std::size_t v = arcs[out.arc[i]].to;
            if (--indeg[v] == 0) order.push_back(v);
        }
    }
    if (order.size() != nodes) return std::nullopt;
    return order;
}

}  // namespace detail

/// Builds the difference constraints for a fixed ordering. Undecided pairs
/// are an error unless `allow_partial` is set, in which case they add no arc.
inline ConstraintGraph build_constraint_graph(const Instance& inst, const Ordering& ord,
                                              bool allow_partial = false) {
    const std::size_t n = inst.segments();
    const std::size_t count = inst.trains.size();
    if (ord.trains() != count || (count > 1 && ord.segments() != n)) {
        throw std::invalid_argument("ordering does not match instance dimensions");
    }
    ConstraintGraph g{EventLayout{count, n}, {}};
    auto sink = [&](const Arc& a) { g.arcs.push_back(a); };
    detail::emit_train_arcs(inst, g.layout, sink);
    for (std::size_t seg = 0; seg < n; ++seg) {
        for (std::size_t a = 0; a < count; ++a) {
            for (std::size_t b = a + 1; b < count; ++b) {
                const auto lead = ord.leader(seg, a, b);
                if (!lead) {
                    if (allow_partial) continue;
                    throw std::invalid_argument(fmt::format(
                        "ordering undecided for trains {} and {} on segment {}",
                        inst.trains[a].id, inst.trains[b].id, seg + 1));
                }
                detail::emit_pair_arcs(inst, g.layout, seg, *lead, *lead == a ? b : a, sink);
            }
        }
    }
    return g;
}

/// Result of a longest-path solve: either event times or a positive cycle.
class TimingOutcome {
public:
    static TimingOutcome feasible(Schedule s, std::vector<double> times) {
        TimingOutcome o;
        o.schedule_ = std::move(s);
        o.times_ = std::move(times);
        return o;
    }
    static TimingOutcome infeasible(std::vector<Arc> cycle) {
        TimingOutcome o;
        o.cycle_ = std::move(cycle);
        return o;
    }

    bool is_feasible() const { return schedule_.has_value(); }
    const Schedule& schedule() const {
        if (!schedule_) throw std::logic_error("timing outcome is infeasible");
        return *schedule_;
    }
    Schedule& schedule() {
        if (!schedule_) throw std::logic_error("timing outcome is infeasible");
        return *schedule_;
    }
    const std::vector<double>& node_times() const { return times_; }
    const std::vector<Arc>& cycle() const { return cycle_; }

private:
    std::optional<Schedule> schedule_;
    std::vector<double> times_;
    std::vector<Arc> cycle_;
};

inline Schedule schedule_from_times(const EventLayout& ev, const std::vector<double>& times) {
    Schedule s;
    s.trains.resize(ev.trains);
    for (std::size_t t = 0; t < ev.trains; ++t) {
        auto& tt = s.trains[t];
        tt.dep.resize(ev.segments);
        tt.arr.resize(ev.segments);
        for (std::size_t k = 0; k < ev.segments; ++k) {
            tt.dep[k] = times[ev.dep(t, k)];
            tt.arr[k] = times[ev.arr(t, k)];
        }
    }
    return s;
}

inline std::vector<double> times_from_schedule(const EventLayout& ev, const Schedule& s) {
    std::vector<double> times(ev.node_count(), 0.0);
    for (std::size_t t = 0; t < ev.trains; ++t) {
        for (std::size_t k = 0; k < ev.segments; ++k) {
            times[ev.dep(t, k)] = s.trains[t].dep[k];
            times[ev.arr(t, k)] = s.trains[t].arr[k];
        }
    }
    return times;
}

/// Least nonnegative solution of the constraint system (longest paths from
/// the origin), or a positive-weight cycle proving there is none.
inline TimingOutcome earliest_times(const ConstraintGraph& g) {
    const std::size_t nodes = g.node_count();
    const auto& arcs = g.arcs;
    const detail::Adjacency out(nodes, arcs, false);
    std::vector<double> t(nodes, 0.0);

    if (auto order = detail::topological_order(nodes, arcs, out)) {
        for (std::size_t u : *order) {
            for (std::size_t i = out.offset[u]; i < out.offset[u + 1]; ++i) {
                const Arc& a = arcs[out.arc[i]];
                t[a.to] = std::max(t[a.to], t[u] + a.bound);
            }
        }
        Schedule s = schedule_from_times(g.layout, t);
        return TimingOutcome::feasible(std::move(s), std::move(t));
    }

    // Cyclic: label-correcting search with a relaxation counter.
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> pred(nodes, none);
    std::vector<std::size_t> relaxed(nodes, 0);
    std::vector<char> queued(nodes, 1);
    std::deque<std::size_t> queue;
    for (std::size_t v = 0; v < nodes; ++v) queue.push_back(v);
    std::size_t culprit = none;
    while (!queue.empty() && culprit == none) {
        const std::size_t u = queue.front();
        queue.pop_front();
        queued[u] = 0;
        for (std::size_t i = out.offset[u]; i < out.offset[u + 1]; ++i) {
            const Arc& a = arcs[out.arc[i]];
            const double cand = t[u] + a.bound;
            if (cand > t[a.to] + detail::kRaiseEpsilon) {
                t[a.to] = cand;
                pred[a.to] = out.arc[i];
                if (++relaxed[a.to] > nodes) {
                    culprit = a.to;
                    break;
                }
                if (!queued[a.to]) {
                    queued[a.to] = 1;
                    queue.push_back(a.to);
                }
            }
        }
    }
    if (culprit == none) {
        Schedule s = schedule_from_times(g.layout, t);
        return TimingOutcome::feasible(std::move(s), std::move(t));
    }

    // Walk predecessors far enough to land on the cycle, then collect it.
    std::size_t v = culprit;
    for (std::size_t i = 0; i < nodes; ++i) v = arcs[pred[v]].from;
    std::vector<Arc> cycle;
    std::size_t w = v;
    do {
        cycle.push_back(arcs[pred[w]]);
        w = arcs[pred[w]].from;
    } while (w != v && cycle.size() <= nodes);
    std::reverse(cycle.begin(), cycle.end());
    return TimingOutcome::infeasible(std::move(cycle));
}

/// Backward pass: keeps the origin and every train's final arrival at
/// `times` and moves every other event as late as the constraints allow.
/// `times` must satisfy the graph.
inline std::vector<double> latest_times(const ConstraintGraph& g, const std::vector<double>& times) {
    const std::size_t nodes = g.node_count();
    const auto& ev = g.layout;
    std::vector<char> fixed(nodes, 0);
    fixed[EventLayout::origin] = 1;
    for (std::size_t t = 0; t < ev.trains; ++t) fixed[ev.last_arr(t)] = 1;

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> late(nodes, inf);
    for (std::size_t v = 0; v < nodes; ++v) {
        if (fixed[v]) late[v] = times[v];
    }
    const detail::Adjacency out(nodes, g.arcs, false);
    if (auto order = detail::topological_order(nodes, g.arcs, out)) {
        for (auto it = order->rbegin(); it != order->rend(); ++it) {
            const std::size_t u = *it;
            if (fixed[u]) continue;
            for (std::size_t i = out.offset[u]; i < out.offset[u + 1]; ++i) {
                const Arc& a = g.arcs[out.arc[i]];
                late[u] = std::min(late[u], late[a.to] - a.bound);
            }
        }
    } else {
        for (std::size_t round = 0; round <= nodes; ++round) {
            bool changed = false;
            for (const Arc& a : g.arcs) {
                if (fixed[a.from]) continue;
                const double cand = late[a.to] - a.bound;
                if (cand < late[a.from] - detail::kRaiseEpsilon) {
                    late[a.from] = cand;
                    changed = true;
                }
            }
            if (!changed) break;
        }
    }
    for (std::size_t v = 0; v < nodes; ++v) {
        if (!(late[v] < inf)) late[v] = times[v];
        late[v] = std::max(late[v], times[v]);
    }
    return late;
}

inline double objective_value(const Instance& inst, const Schedule& s, ObjectiveKind kind) {
    double total = 0.0;
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        switch (kind) {
            case ObjectiveKind::TotalDeparture: total += s.first_departure(t); break;
            case ObjectiveKind::TotalArrival: total += s.final_arrival(t); break;
            case ObjectiveKind::WeightedTravelTime:
                total += inst.trains[t].priority * (s.final_arrival(t) - s.first_departure(t));
                break;
        }
    }
    return total;
}

/// The ordering a feasible schedule realises on every segment.
inline Ordering induce_ordering(const Instance& inst, const Schedule& s) {
    const std::size_t n = inst.segments();
    const std::size_t count = inst.trains.size();
    Ordering ord(count, n);
    for (std::size_t seg = 0; seg < n; ++seg) {
        for (std::size_t a = 0; a < count; ++a) {
            for (std::size_t b = a + 1; b < count; ++b) {
                const auto& ta = inst.trains[a];
                const auto& tb = inst.trains[b];
                const std::size_t ka = traversal_index(ta.direction, seg + 1, n) - 1;
                const std::size_t kb = traversal_index(tb.direction, seg + 1, n) - 1;
                bool a_first;
                if (ta.direction == tb.direction) {
                    a_first = s.trains[a].dep[ka] <= s.trains[b].dep[kb];
                } else {
                    a_first = s.trains[a].arr[ka] <= s.trains[b].dep[kb] + kTimeTolerance;
                }
                if (a_first) {
                    ord.set_leader(seg, a, b);
                } else {
                    ord.set_leader(seg, b, a);
                }
            }
        }
    }
    return ord;
}

/// Holding every train's final arrival, pushes all earlier events as late as
/// the schedule's own ordering allows. Throws std::logic_error on an
/// infeasible input.
inline Schedule tighten_departures(const Instance& inst, const Schedule& s) {
    if (!validate_schedule(inst, s).empty()) {
        throw std::logic_error("tighten_departures requires a feasible schedule");
    }
    const auto g = build_constraint_graph(inst, induce_ordering(inst, s));
    const auto late = latest_times(g, times_from_schedule(g.layout, s));
    Schedule out = schedule_from_times(g.layout, late);
    out.objective = objective_value(inst, out, ObjectiveKind::WeightedTravelTime);
    return out;
}

/// Timing for a complete ordering. Earliest times for the departure and
/// arrival objectives; earliest arrivals then latest departures for the
/// weighted travel time.
inline TimingOutcome solve_fixed_order(const Instance& inst, const Ordering& ord,
                                       ObjectiveKind kind) {
    const auto g = build_constraint_graph(inst, ord);
    auto outcome = earliest_times(g);
    if (!outcome.is_feasible()) return outcome;
    if (kind == ObjectiveKind::WeightedTravelTime) {
        auto late = latest_times(g, outcome.node_times());
        Schedule s = schedule_from_times(g.layout, late);
        s.objective = objective_value(inst, s, kind);
        return TimingOutcome::feasible(std::move(s), std::move(late));
    }
    outcome.schedule().objective = objective_value(inst, outcome.schedule(), kind);
    return outcome;
}

/// Longest-path times maintained under arc insertion with undo. A weighted
/// sum of node times is tracked alongside so callers can read an objective
/// without a rescan.
class IncrementalTimes {
public:
    struct Mark {
        std::size_t arcs;
        std::size_t trail;
        double sum;
    };

    explicit IncrementalTimes(std::size_t nodes)
        : out_(nodes), times_(nodes, 0.0), weight_(nodes, 0.0), queued_(nodes, 0) {}

    std::size_t node_count() const { return times_.size(); }
    double time(std::size_t v) const { return times_[v]; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Arc>& arcs() const { return arcs_; }

    void set_weight(std::size_t v, double w) {
        sum_ += (w - weight_[v]) * times_[v];
        weight_[v] = w;
    }
    double weighted_sum() const { return sum_; }

    Mark mark() const { return {arcs_.size(), trail_.size(), sum_}; }

    void undo(const Mark& m) {
        while (trail_.size() > m.trail) {
            times_[trail_.back().first] = trail_.back().second;
            trail_.pop_back();
        }
        while (arcs_.size() > m.arcs) {
            out_[arcs_.back().from].pop_back();
            arcs_.pop_back();
        }
        sum_ = m.sum;
    }

    /// Inserts the arc and propagates. On a positive cycle the state is
    /// rolled back and false is returned.
    bool add_arc(const Arc& a) {
        const Mark m = mark();
        arcs_.push_back(a);
        out_[a.from].push_back({a.to, a.bound});
        if (times_[a.from] + a.bound <= times_[a.to] + detail::kRaiseEpsilon) return true;
        if (a.from == a.to) {
            undo(m);
            return false;
        }
        raise(a.to, times_[a.from] + a.bound);
        queue_.clear();
        queue_.push_back(a.to);
        queued_[a.to] = 1;
        bool ok = true;
        for (std::size_t head = 0; head < queue_.size(); ++head) {
            const std::size_t u = queue_[head];
            queued_[u] = 0;
            if (!ok) continue;
            for (const auto& e : out_[u]) {
                const double cand = times_[u] + e.bound;
                if (cand > times_[e.to] + detail::kRaiseEpsilon) {
                    if (e.to == a.from) {
                        ok = false;
                        break;
                    }
                    raise(e.to, cand);
                    if (!queued_[e.to]) {
                        queued_[e.to] = 1;
                        queue_.push_back(e.to);
                    }
                }
            }
        }
        if (!ok) undo(m);
        return ok;
    }

    /// Longest path from `src` to `dst` over the current arcs; -inf when
    /// unreachable.
    double longest_path(std::size_t src, std::size_t dst) const {
        constexpr double ninf = -std::numeric_limits<double>::infinity();
        std::vector<double> dist(times_.size(), ninf);
        std::vector<char> queued(times_.size(), 0);
        std::vector<std::size_t> queue{src};
        dist[src] = 0.0;
        queued[src] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t u = queue[head];
            queued[u] = 0;
            for (const auto& e : out_[u]) {
                const double cand = dist[u] + e.bound;
                if (cand > dist[e.to] + detail::kRaiseEpsilon) {
                    dist[e.to] = cand;
                    if (!queued[e.to]) {
                        queued[e.to] = 1;
                        queue.push_back(e.to);
                    }
                }
            }
        }
        return dist[dst];
    }

private:
    struct Edge {
        std::size_t to;
        double bound;
    };

    void raise(std::size_t v, double value) {
        trail_.emplace_back(v, times_[v]);
        sum_ += weight_[v] * (value - times_[v]);
        times_[v] = value;
    }

    std::vector<std::vector<Edge>> out_;
    std::vector<Arc> arcs_;
    std::vector<double> times_;
    std::vector<double> weight_;
    std::vector<std::pair<std::size_t, double>> trail_;
    std::vector<std::size_t> queue_;
    std::vector<char> queued_;
    double sum_ = 0.0;
};

/// Sets the node weights of `inc` so that its weighted sum equals `kind`
/// evaluated on the earliest times (travel time uses untightened departures).
inline void attach_objective(IncrementalTimes& inc, const Instance& inst, const EventLayout& ev,
                             ObjectiveKind kind) {
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        const double pi = inst.trains[t].priority;
        switch (kind) {
            case ObjectiveKind::TotalDeparture: inc.set_weight(ev.first_dep(t), 1.0); break;
            case ObjectiveKind::TotalArrival: inc.set_weight(ev.last_arr(t), 1.0); break;
            case ObjectiveKind::WeightedTravelTime:
                inc.set_weight(ev.first_dep(t), -pi);
                inc.set_weight(ev.last_arr(t), pi);
                break;
        }
    }
}

}  // namespace railsched
