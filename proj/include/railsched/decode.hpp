#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "railsched/core.hpp"
#include "railsched/timing.hpp"

namespace railsched {

/// Throws std::invalid_argument unless `seq` lists every train of direction
/// `d` exactly once.
inline void require_permutation(const Instance& inst, const std::vector<std::size_t>& seq,
                                Direction d) {
    const auto expected = inst.trains_in(d);
    std::vector<char> seen(inst.trains.size(), 0);
    for (std::size_t t : seq) {
        if (t >= inst.trains.size() || inst.trains[t].direction != d || seen[t]) {
            throw std::invalid_argument(
                fmt::format("{} sequence is not a permutation of its trains", to_string(d)));
        }
        seen[t] = 1;
    }
    if (seq.size() != expected.size()) {
        throw std::invalid_argument(
            fmt::format("{} sequence has {} trains, expected {}", to_string(d), seq.size(),
                        expected.size()));
    }
}

/// Turns the two train sequences into a complete ordering.
///
/// Same-direction pairs follow sequence order on every segment. Opposing
/// pairs are decided one at a time, physical segments left to right, then
/// departing trains in sequence order, then returning trains in sequence
/// order: both directions are trial-propagated and the one with the smaller
/// earliest-times objective wins, ties going to the departing train. Once a
/// returning train has gone first on a segment it also goes first on every
/// segment to the right, since it reached those earlier.
inline Ordering decode_sequences(const Instance& inst, const std::vector<std::size_t>& seq_dep,
                                 const std::vector<std::size_t>& seq_ret,
                                 ObjectiveKind kind = ObjectiveKind::WeightedTravelTime) {
    require_permutation(inst, seq_dep, Direction::Departing);
    require_permutation(inst, seq_ret, Direction::Returning);
    const std::size_t n = inst.segments();
    const EventLayout ev{inst.trains.size(), n};
    Ordering ord(inst.trains.size(), n);
    IncrementalTimes inc(ev.node_count());
    attach_objective(inc, inst, ev, kind);
    auto add = [&](const Arc& a) {
        if (!inc.add_arc(a)) throw std::logic_error("decode produced a cyclic ordering");
    };
    detail::emit_train_arcs(inst, ev, add);

    for (const auto* seq : {&seq_dep, &seq_ret}) {
        for (std::size_t seg = 0; seg < n; ++seg) {
            for (std::size_t i = 0; i < seq->size(); ++i) {
                for (std::size_t j = i + 1; j < seq->size(); ++j) {
                    ord.set_leader(seg, (*seq)[i], (*seq)[j]);
                }
                // Headway is transitive along the sequence; adjacent arcs suffice.
                if (i + 1 < seq->size()) {
                    detail::emit_pair_arcs(inst, ev, seg, (*seq)[i], (*seq)[i + 1], add);
                }
            }
        }
    }

    for (std::size_t seg = 0; seg < n; ++seg) {
        for (std::size_t t : seq_dep) {
            for (std::size_t r : seq_ret) {
                auto try_lead = [&](std::size_t leader, std::size_t follower) {
                    bool ok = true;
                    detail::emit_pair_arcs(inst, ev, seg, leader, follower,
                                           [&](const Arc& a) { ok = ok && inc.add_arc(a); });
                    return ok;
                };
                if (seg > 0 && ord.leader(seg - 1, t, r) == r) {
                    if (!try_lead(r, t)) throw std::logic_error("decode produced a cyclic ordering");
                    ord.set_leader(seg, r, t);
                    continue;
                }
                const auto m = inc.mark();
                const bool t_ok = try_lead(t, r);
                const double t_obj = inc.weighted_sum();
                inc.undo(m);
                const bool r_ok = try_lead(r, t);
                const double r_obj = inc.weighted_sum();
                if (t_ok && (!r_ok || t_obj <= r_obj + kTimeTolerance)) {
                    inc.undo(m);
                    try_lead(t, r);
                    ord.set_leader(seg, t, r);
                } else if (r_ok) {
                    ord.set_leader(seg, r, t);
                } else {
                    throw std::logic_error("decode found no feasible direction for an opposing pair");
                }
            }
        }
    }
    return ord;
}

}  // namespace railsched
