#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "railsched/core.hpp"

namespace railsched {

enum class ConstraintFamily : std::uint8_t {
    RunTime,         ///< arr - dep >= min run
    StationStop,     ///< next dep - arr >= unload + load + dwell
    Headway,         ///< same-direction departures separated by the safety lag
    ArrivalHeadway,  ///< same, for arrivals (only when enabled on the instance)
    Collision,       ///< opposing occupation intervals overlap
    NegativeTime,
    NonFinite,
};

inline const char* to_string(ConstraintFamily f) {
    switch (f) {
        case ConstraintFamily::RunTime: return "RunTime";
        case ConstraintFamily::StationStop: return "StationStop";
        case ConstraintFamily::Headway: return "Headway";
        case ConstraintFamily::ArrivalHeadway: return "ArrivalHeadway";
        case ConstraintFamily::Collision: return "Collision";
        case ConstraintFamily::NegativeTime: return "NegativeTime";
        case ConstraintFamily::NonFinite: return "NonFinite";
    }
    return "?";
}

struct Violation {
    ConstraintFamily family;
    std::size_t train;
    std::optional<std::size_t> other;
    std::size_t segment;  ///< physical segment, 1-based
    double slack;         ///< negative amount by which the constraint is missed
};

inline std::string describe(const Instance& inst, const Violation& v) {
    std::string who = inst.trains.at(v.train).id;
    if (v.other) who += "," + inst.trains.at(*v.other).id;
    return fmt::format("{} trains=[{}] segment={} slack={:.6g}", to_string(v.family), who,
                       v.segment, v.slack);
}

/// Throws std::invalid_argument unless `sched` has one event pair per train
/// and traversal index of `inst`.
inline void require_schedule_shape(const Instance& inst, const Schedule& sched) {
    if (sched.trains.size() != inst.trains.size()) {
        throw std::invalid_argument(fmt::format("schedule covers {} trains, instance has {}",
                                                sched.trains.size(), inst.trains.size()));
    }
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        const auto& tt = sched.trains[t];
        if (tt.dep.size() != inst.segments() || tt.arr.size() != inst.segments()) {
            throw std::invalid_argument(
                fmt::format("schedule for train {} is missing event times", inst.trains[t].id));
        }
    }
}

/// Checks every scheduling constraint and reports each broken one. The
/// result is empty iff the schedule is feasible.
inline std::vector<Violation> validate_schedule(const Instance& inst, const Schedule& sched) {
    require_schedule_shape(inst, sched);
    const std::size_t n = inst.segments();
    const std::size_t count = inst.trains.size();
    std::vector<Violation> out;
    auto flag = [&](ConstraintFamily f, std::size_t a, std::optional<std::size_t> b,
                    std::size_t seg, double slack) {
        if (slack < -kTimeTolerance) out.push_back({f, a, b, seg, slack});
    };

    for (std::size_t t = 0; t < count; ++t) {
        const auto& tr = inst.trains[t];
        const auto& tt = sched.trains[t];
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t seg = physical_segment(tr.direction, k + 1, n);
            for (double v : {tt.dep[k], tt.arr[k]}) {
                if (!std::isfinite(v)) {
                    out.push_back({ConstraintFamily::NonFinite, t, std::nullopt, seg, -1.0});
                } else {
                    flag(ConstraintFamily::NegativeTime, t, std::nullopt, seg, v);
                }
            }
            flag(ConstraintFamily::RunTime, t, std::nullopt, seg,
                 tt.arr[k] - tt.dep[k] - tr.min_run[k]);
            if (k + 1 < n) {
                flag(ConstraintFamily::StationStop, t, std::nullopt, seg,
                     tt.dep[k + 1] - tt.arr[k] - tr.stop_time(k + 1));
            }
        }
    }

    for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t b = a + 1; b < count; ++b) {
            const auto& ta = inst.trains[a];
            const auto& tb = inst.trains[b];
            for (std::size_t seg = 1; seg <= n; ++seg) {
                const std::size_t ka = traversal_index(ta.direction, seg, n) - 1;
                const std::size_t kb = traversal_index(tb.direction, seg, n) - 1;
                const auto& ea = sched.trains[a];
                const auto& eb = sched.trains[b];
                if (ta.direction == tb.direction) {
                    const double st = inst.safety[seg - 1];
                    flag(ConstraintFamily::Headway, a, b, seg,
                         std::abs(ea.dep[ka] - eb.dep[kb]) - st);
                    if (inst.arrival_headway) {
                        flag(ConstraintFamily::ArrivalHeadway, a, b, seg,
                             std::abs(ea.arr[ka] - eb.arr[kb]) - st);
                    }
                } else {
                    // One occupation interval must end before the other starts.
                    const double slack =
                        std::max(eb.dep[kb] - ea.arr[ka], ea.dep[ka] - eb.arr[kb]);
                    flag(ConstraintFamily::Collision, a, b, seg, slack);
                }
            }
        }
    }
    return out;
}

}  // namespace railsched
