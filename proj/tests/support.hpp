#pragma once

// Shared test helpers: hand-built instances and a brute-force ordering oracle.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "railsched/railsched.hpp"

namespace railsched::testing {

inline Train make_train(std::string id, Direction dir, std::vector<double> min_run,
                        double priority = 1.0, double capacity = 100.0) {
    Train t;
    t.id = std::move(id);
    t.direction = dir;
    t.priority = priority;
    t.capacity = capacity;
    const std::size_t n = min_run.size();
    t.min_run = std::move(min_run);
    t.load.assign(n + 1, 0.0);
    t.unload.assign(n + 1, 0.0);
    t.dwell.assign(n + 1, 0.0);
    return t;
}

inline Instance make_instance(std::size_t n, std::vector<Train> trains, double safety = 0.0) {
    Instance inst;
    inst.corridor.segments = n;
    inst.trains = std::move(trains);
    inst.safety.assign(n, safety);
    inst.big_m = std::ceil(required_big_m(inst)) + 1.0;
    return inst;
}

/// Visits every complete ordering that admits a timing. Decisions are
/// made slot by slot in plain index order; a branch is cut as soon as its
/// fixed arcs contain a positive cycle, which no completion can remove.
inline std::size_t for_each_feasible_ordering(const Instance& inst,
                                              const std::function<void(const Ordering&)>& visit) {
    const std::size_t n = inst.segments();
    const std::size_t count = inst.trains.size();
    const EventLayout ev{count, n};
    Ordering ord(count, n);
    IncrementalTimes inc(ev.node_count());
    detail::emit_train_arcs(inst, ev, [&](const Arc& a) { inc.add_arc(a); });
    std::vector<std::array<std::size_t, 3>> slots;
    for (std::size_t seg = 0; seg < n; ++seg) {
        for (std::size_t a = 0; a < count; ++a) {
            for (std::size_t b = a + 1; b < count; ++b) slots.push_back({seg, a, b});
        }
    }
    std::size_t leaves = 0;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == slots.size()) {
            ++leaves;
            visit(ord);
            return;
        }
        const auto [seg, a, b] = slots[i];
        for (auto [lead, follow] : {std::pair{a, b}, std::pair{b, a}}) {
            const auto m = inc.mark();
            bool ok = true;
            detail::emit_pair_arcs(inst, ev, seg, lead, follow,
                                   [&](const Arc& arc) { ok = ok && inc.add_arc(arc); });
            if (ok) {
                ord.set_leader(seg, lead, follow);
                rec(i + 1);
                ord.clear(seg, a, b);
            }
            inc.undo(m);
        }
    };
    rec(0);
    return leaves;
}

/// Best objective over all complete orderings under solve_fixed_order.
inline std::optional<double> enumerate_optimum(const Instance& inst, ObjectiveKind kind) {
    std::optional<double> best;
    for_each_feasible_ordering(inst, [&](const Ordering& ord) {
        const auto out = solve_fixed_order(inst, ord, kind);
        if (!out.is_feasible()) return;
        const double v = out.schedule().objective;
        if (!best || v < *best) best = v;
    });
    return best;
}

/// A complete, feasible ordering from randomly shuffled sequences.
template <typename Rng>
Ordering random_ordering(const Instance& inst, Rng& rng) {
    auto dep = inst.trains_in(Direction::Departing);
    auto ret = inst.trains_in(Direction::Returning);
    std::shuffle(dep.begin(), dep.end(), rng);
    std::shuffle(ret.begin(), ret.end(), rng);
    return decode_sequences(inst, dep, ret);
}

inline std::size_t ordering_pairs(const Instance& inst) {
    const std::size_t t = inst.trains.size();
    return t < 2 ? 0 : t * (t - 1) / 2 * inst.segments();
}

}  // namespace railsched::testing
