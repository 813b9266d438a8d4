#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>

namespace railsched {

/// Absolute tolerance used for every time comparison.
inline constexpr double kTimeTolerance = 1e-9;

enum class Direction : std::uint8_t { Departing, Returning };

inline const char* to_string(Direction d) {
    return d == Direction::Departing ? "dep" : "ret";
}

/// Maps a direction-relative traversal index k (1-based) onto the physical
/// segment it occupies. Departing trains run 1..n, returning trains n..1.
inline std::size_t physical_segment(Direction direction, std::size_t k, std::size_t n) {
    if (n == 0 || k < 1 || k > n) {
        throw std::invalid_argument(
            fmt::format("traversal index {} out of range for {} segment(s)", k, n));
    }
    return direction == Direction::Departing ? k : n + 1 - k;
}

/// Inverse of physical_segment: the traversal index (1-based) at which a train
/// moving in `direction` occupies physical segment `segment`.
inline std::size_t traversal_index(Direction direction, std::size_t segment, std::size_t n) {
    return physical_segment(direction, segment, n);
}

struct Corridor {
    std::size_t segments = 1;

    std::size_t stations() const { return segments + 1; }
};

/// A freight train with a fixed route over the corridor.
///
/// All per-segment and per-station arrays are in traversal order: index 0 of
/// `min_run` is the first segment the train enters and index 0 of the station
/// arrays is the station it starts from.
struct Train {
    std::string id;
    Direction direction = Direction::Departing;
    double priority = 1.0;
    double capacity = 0.0;
    std::vector<double> min_run;
    std::vector<double> load;
    std::vector<double> unload;
    std::vector<double> dwell;

    /// Mandatory stop at a station in traversal order (unload + load + dwell).
    double stop_time(std::size_t station) const {
        return unload.at(station) + load.at(station) + dwell.at(station);
    }

    /// Travel time with no interaction: every run at minimum time plus the
    /// mandatory stops at intermediate stations.
    double free_run_time() const {
        double total = 0.0;
        for (double r : min_run) total += r;
        for (std::size_t s = 1; s + 1 < load.size(); ++s) total += stop_time(s);
        return total;
    }
};

struct Freight {
    std::string id;
    double priority = 1.0;
    double weight = 1.0;
    double due = 10.0;
    double release = 0.0;
};

struct Instance {
    Corridor corridor;
    std::vector<Train> trains;
    std::vector<Freight> freights;
    std::vector<double> safety;  ///< per physical segment, 0-based
    double big_m = 1e6;
    double capacity_floor = 0.6;
    bool arrival_headway = false;

    std::size_t segments() const { return corridor.segments; }

    /// Safety lag on the segment a train enters at traversal index k (0-based).
    double safety_for(Direction d, std::size_t k) const {
        return safety.at(physical_segment(d, k + 1, segments()) - 1);
    }

    std::vector<std::size_t> trains_in(Direction d) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < trains.size(); ++i) {
            if (trains[i].direction == d) out.push_back(i);
        }
        return out;
    }

    std::optional<std::size_t> train_index(const std::string& id) const {
        for (std::size_t i = 0; i < trains.size(); ++i) {
            if (trains[i].id == id) return i;
        }
        return std::nullopt;
    }
};

/// Loose upper estimate of any event time reachable under any ordering:
/// every train's own run and stop times, plus one safety lag per train per
/// segment, plus the latest release.
inline double horizon_estimate(const Instance& inst) {
    double h = 0.0;
    for (const auto& t : inst.trains) {
        for (double v : t.min_run) h += v;
        for (std::size_t s = 0; s < t.load.size(); ++s) {
            h += t.load[s] + (s < t.unload.size() ? t.unload[s] : 0.0) +
                 (s < t.dwell.size() ? t.dwell[s] : 0.0);
        }
    }
    double st = 0.0;
    for (double v : inst.safety) st += v;
    h += static_cast<double>(inst.trains.size()) * st;
    double latest_release = 0.0;
    for (const auto& f : inst.freights) latest_release = std::max(latest_release, f.release);
    return h + latest_release;
}

/// Smallest big-M accepted by validate_instance.
inline double required_big_m(const Instance& inst) { return 10.0 * horizon_estimate(inst); }

enum class DefectKind : std::uint8_t {
    EmptyCorridor,
    WrongLength,
    NegativeTime,
    NonFinite,
    NonPositivePriority,
    PriorityAboveOne,
    NegativeCapacity,
    BadCapacityFloor,
    BigMTooSmall,
    NonPositiveWeight,
    NegativeDue,
    NegativeRelease,
    NoDepartingTrain,
    DuplicateId,
};

inline const char* to_string(DefectKind k) {
    switch (k) {
        case DefectKind::EmptyCorridor: return "EmptyCorridor";
        case DefectKind::WrongLength: return "WrongLength";
        case DefectKind::NegativeTime: return "NegativeTime";
        case DefectKind::NonFinite: return "NonFinite";
        case DefectKind::NonPositivePriority: return "NonPositivePriority";
        case DefectKind::PriorityAboveOne: return "PriorityAboveOne";
        case DefectKind::NegativeCapacity: return "NegativeCapacity";
        case DefectKind::BadCapacityFloor: return "BadCapacityFloor";
        case DefectKind::BigMTooSmall: return "BigMTooSmall";
        case DefectKind::NonPositiveWeight: return "NonPositiveWeight";
        case DefectKind::NegativeDue: return "NegativeDue";
        case DefectKind::NegativeRelease: return "NegativeRelease";
        case DefectKind::NoDepartingTrain: return "NoDepartingTrain";
        case DefectKind::DuplicateId: return "DuplicateId";
    }
    return "?";
}

struct Defect {
    DefectKind kind;
    std::string where;
    std::string message;
};

namespace detail {

inline void check_times(std::vector<Defect>& out, const std::vector<double>& values,
                        std::size_t expected, const std::string& where) {
    if (values.size() != expected) {
        out.push_back({DefectKind::WrongLength, where,
                       fmt::format("expected {} entries, found {}", expected, values.size())});
        return;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            out.push_back({DefectKind::NonFinite, fmt::format("{}[{}]", where, i), "not finite"});
        } else if (values[i] < 0.0) {
            out.push_back({DefectKind::NegativeTime, fmt::format("{}[{}]", where, i),
                           fmt::format("negative time {}", values[i])});
        }
    }
}

}  // namespace detail

/// Returns every violated instance invariant. An empty result means the
/// instance is well-formed.
inline std::vector<Defect> validate_instance(const Instance& inst) {
    std::vector<Defect> out;
    const std::size_t n = inst.segments();
    if (n == 0) {
        out.push_back({DefectKind::EmptyCorridor, "n", "corridor needs at least one segment"});
        return out;
    }
    detail::check_times(out, inst.safety, n, "safety");

    std::unordered_set<std::string> ids;
    bool any_departing = false;
    for (std::size_t i = 0; i < inst.trains.size(); ++i) {
        const auto& t = inst.trains[i];
        const std::string where = fmt::format("trains[{}]", i);
        if (!ids.insert(t.id).second) {
            out.push_back({DefectKind::DuplicateId, where + ".id", "duplicate train id " + t.id});
        }
        any_departing |= t.direction == Direction::Departing;
        if (!std::isfinite(t.priority)) {
            out.push_back({DefectKind::NonFinite, where + ".priority", "not finite"});
        } else if (t.priority <= 0.0) {
            out.push_back({DefectKind::NonPositivePriority, where + ".priority",
                           "priority must be positive"});
        } else if (t.priority > 1.0) {
            out.push_back({DefectKind::PriorityAboveOne, where + ".priority",
                           "priority must lie in (0, 1]"});
        }
        if (!std::isfinite(t.capacity)) {
            out.push_back({DefectKind::NonFinite, where + ".capacity", "not finite"});
        } else if (t.capacity < 0.0) {
            out.push_back({DefectKind::NegativeCapacity, where + ".capacity",
                           "capacity must be nonnegative"});
        }
        detail::check_times(out, t.min_run, n, where + ".min_run");
        detail::check_times(out, t.load, n + 1, where + ".load");
        detail::check_times(out, t.unload, n + 1, where + ".unload");
        detail::check_times(out, t.dwell, n + 1, where + ".dwell");
    }

    ids.clear();
    for (std::size_t j = 0; j < inst.freights.size(); ++j) {
        const auto& f = inst.freights[j];
        const std::string where = fmt::format("freights[{}]", j);
        if (!ids.insert(f.id).second) {
            out.push_back({DefectKind::DuplicateId, where + ".id", "duplicate freight id " + f.id});
        }
        if (!(f.priority > 0.0) || !std::isfinite(f.priority)) {
            out.push_back({DefectKind::NonPositivePriority, where + ".priority",
                           "priority must be positive"});
        }
        if (!(f.weight > 0.0) || !std::isfinite(f.weight)) {
            out.push_back({DefectKind::NonPositiveWeight, where + ".weight",
                           "weight must be positive"});
        }
        if (!(f.due >= 0.0) || !std::isfinite(f.due)) {
            out.push_back({DefectKind::NegativeDue, where + ".due", "due date must be >= 0"});
        }
        if (!(f.release >= 0.0) || !std::isfinite(f.release)) {
            out.push_back({DefectKind::NegativeRelease, where + ".release",
                           "release date must be >= 0"});
        }
    }
    if (!inst.freights.empty() && !any_departing) {
        out.push_back({DefectKind::NoDepartingTrain, "trains",
                       "freight present but no departing train to carry it"});
    }
    if (!(inst.capacity_floor >= 0.0 && inst.capacity_floor <= 1.0)) {
        out.push_back({DefectKind::BadCapacityFloor, "capacity_floor", "must lie in [0, 1]"});
    }
    // Only meaningful once every array has the right shape.
    if (out.empty()) {
        const double need = required_big_m(inst);
        if (!(inst.big_m > 0.0) || inst.big_m < need) {
            out.push_back({DefectKind::BigMTooSmall, "big_m",
                           fmt::format("big_m {} below 10 x horizon estimate ({})", inst.big_m,
                                       need)});
        }
    }
    return out;
}

/// Departure and arrival of one train per traversal index (0-based).
struct TrainTimes {
    std::vector<double> dep;
    std::vector<double> arr;
};

struct Schedule {
    std::vector<TrainTimes> trains;  ///< indexed like Instance::trains
    double objective = 0.0;

    double first_departure(std::size_t t) const { return trains.at(t).dep.front(); }
    double final_arrival(std::size_t t) const { return trains.at(t).arr.back(); }
};

enum class ObjectiveKind : std::uint8_t { TotalDeparture, TotalArrival, WeightedTravelTime };

inline const char* to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::TotalDeparture: return "departure";
        case ObjectiveKind::TotalArrival: return "arrival";
        case ObjectiveKind::WeightedTravelTime: return "travel";
    }
    return "?";
}

inline ObjectiveKind objective_from_string(const std::string& s) {
    if (s == "departure") return ObjectiveKind::TotalDeparture;
    if (s == "arrival") return ObjectiveKind::TotalArrival;
    if (s == "travel") return ObjectiveKind::WeightedTravelTime;
    throw std::invalid_argument("unknown objective '" + s + "'");
}

/// Leader of a train pair on one physical segment.
enum class Lead : std::int8_t { Undecided = -1, Lower = 0, Higher = 1 };

/// The pairwise precedence decisions on every physical segment.
///
/// One slot is stored per unordered train pair and segment, so the two
/// directions of a pair can never both be recorded. Whether a slot is an
/// alpha, beta or gamma decision follows from the two trains' directions.
class Ordering {
public:
    Ordering() = default;
    Ordering(std::size_t trains, std::size_t segments)
        : trains_(trains),
          segments_(segments),
          pairs_(trains < 2 ? 0 : trains * (trains - 1) / 2),
          slots_(pairs_ * segments, Lead::Undecided) {}

    std::size_t trains() const { return trains_; }
    std::size_t segments() const { return segments_; }
    std::size_t slot_count() const { return slots_.size(); }

    /// Slot index; `segment` is the 0-based physical segment.
    std::size_t slot(std::size_t segment, std::size_t a, std::size_t b) const {
        if (a == b || a >= trains_ || b >= trains_ || segment >= segments_) {
            throw std::invalid_argument("invalid ordering slot");
        }
        if (a > b) std::swap(a, b);
        return segment * pairs_ + a * trains_ - a * (a + 1) / 2 + (b - a - 1);
    }

    Lead raw(std::size_t slot) const { return slots_.at(slot); }
    void set_raw(std::size_t slot, Lead lead) { slots_.at(slot) = lead; }

    /// Leader of trains a and b on `segment`, if decided.
    std::optional<std::size_t> leader(std::size_t segment, std::size_t a, std::size_t b) const {
        const Lead l = slots_[slot(segment, a, b)];
        if (l == Lead::Undecided) return std::nullopt;
        const std::size_t lo = std::min(a, b), hi = std::max(a, b);
        return l == Lead::Lower ? lo : hi;
    }

    void set_leader(std::size_t segment, std::size_t leader, std::size_t follower) {
        slots_[slot(segment, leader, follower)] = leader < follower ? Lead::Lower : Lead::Higher;
    }

    void clear(std::size_t segment, std::size_t a, std::size_t b) {
        slots_[slot(segment, a, b)] = Lead::Undecided;
    }

    bool complete() const {
        for (Lead l : slots_) {
            if (l == Lead::Undecided) return false;
        }
        return true;
    }

    bool operator==(const Ordering&) const = default;

private:
    std::size_t trains_ = 0;
    std::size_t segments_ = 0;
    std::size_t pairs_ = 0;
    std::vector<Lead> slots_;
};

}  // namespace railsched
