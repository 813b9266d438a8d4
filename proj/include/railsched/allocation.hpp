#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "railsched/core.hpp"
#include "railsched/validate.hpp"

namespace railsched {

/// Freight-to-train assignment plus the quantities derived from a schedule.
/// Freight can only ride departing trains (start station to end station).
struct Allocation {
    std::vector<std::optional<std::size_t>> assign;  ///< per freight: train index
    std::vector<bool> relax;                         ///< per train: capacity floor waived
    std::vector<std::optional<double>> wr;           ///< arrival at the end station
    std::vector<std::optional<double>> tardi;

    static Allocation empty(const Instance& inst) {
        Allocation a;
        a.assign.assign(inst.freights.size(), std::nullopt);
        a.relax.assign(inst.trains.size(), false);
        a.wr.assign(inst.freights.size(), std::nullopt);
        a.tardi.assign(inst.freights.size(), std::nullopt);
        return a;
    }
};

/// Arrival minus due date. Signed unless `clamp` is set.
inline double tardiness(double wr, double due, bool clamp = false) {
    const double d = wr - due;
    return clamp ? std::max(0.0, d) : d;
}

/// Weighted tardiness of assigned freight minus the weights of assigned
/// freight (assignment is rewarded). Unassigned freight contributes nothing.
inline double allocation_objective(const std::vector<Freight>& freights, const Allocation& alloc) {
    double total = 0.0;
    for (std::size_t j = 0; j < freights.size(); ++j) {
        if (!alloc.assign.at(j)) continue;
        if (!alloc.tardi.at(j)) {
            throw std::logic_error("allocation has an assigned freight without tardiness");
        }
        total += freights[j].priority * *alloc.tardi[j] - freights[j].priority;
    }
    return total;
}

/// Fills wr and tardi from the schedule's final arrivals.
inline Allocation derive_arrivals(const Instance& inst, const Schedule& sched, Allocation alloc,
                                  bool clamp = false) {
    const std::size_t freights = inst.freights.size();
    alloc.wr.assign(freights, std::nullopt);
    alloc.tardi.assign(freights, std::nullopt);
    for (std::size_t j = 0; j < freights; ++j) {
        const auto t = alloc.assign.at(j);
        if (!t) continue;
        if (*t >= sched.trains.size() || *t >= inst.trains.size()) {
            throw std::invalid_argument(
                fmt::format("freight {} assigned to unknown train", inst.freights[j].id));
        }
        alloc.wr[j] = sched.final_arrival(*t);
        alloc.tardi[j] = tardiness(*alloc.wr[j], inst.freights[j].due, clamp);
    }
    return alloc;
}

inline std::vector<double> train_loads(const Instance& inst, const Allocation& alloc) {
    std::vector<double> load(inst.trains.size(), 0.0);
    for (std::size_t j = 0; j < inst.freights.size(); ++j) {
        if (alloc.assign[j] && *alloc.assign[j] < load.size()) {
            load[*alloc.assign[j]] += inst.freights[j].weight;
        }
    }
    return load;
}

inline bool below_floor(const Instance& inst, std::size_t t, double load) {
    const auto& tr = inst.trains[t];
    return tr.direction == Direction::Departing &&
           load < inst.capacity_floor * tr.capacity - kTimeTolerance;
}

/// Sets relax exactly on the departing trains whose load misses the floor.
inline void set_relax_flags(const Instance& inst, Allocation& alloc) {
    const auto load = train_loads(inst, alloc);
    alloc.relax.assign(inst.trains.size(), false);
    for (std::size_t t = 0; t < inst.trains.size(); ++t) alloc.relax[t] = below_floor(inst, t, load[t]);
}

inline std::size_t relaxed_count(const Allocation& alloc) {
    return static_cast<std::size_t>(std::count(alloc.relax.begin(), alloc.relax.end(), true));
}

/// Whether freight j may ride train t given the schedule: departing train,
/// enough capacity on its own, and leaving the start station no earlier
/// than the freight's release plus the train's loading time there.
inline bool can_carry(const Instance& inst, const Schedule& sched, std::size_t j, std::size_t t) {
    const auto& tr = inst.trains[t];
    const auto& f = inst.freights[j];
    return tr.direction == Direction::Departing && f.weight <= tr.capacity + kTimeTolerance &&
           sched.first_departure(t) >= f.release + tr.load.front() - kTimeTolerance;
}

enum class AllocationIssue : std::uint8_t {
    CapacityFloor,
    CapacityExceeded,
    ArrivalMismatch,
    InvalidTrain,
    Release,
    ShapeMismatch,
};

inline const char* to_string(AllocationIssue k) {
    switch (k) {
        case AllocationIssue::CapacityFloor: return "CapacityFloor";
        case AllocationIssue::CapacityExceeded: return "CapacityExceeded";
        case AllocationIssue::ArrivalMismatch: return "ArrivalMismatch";
        case AllocationIssue::InvalidTrain: return "InvalidTrain";
        case AllocationIssue::Release: return "Release";
        case AllocationIssue::ShapeMismatch: return "ShapeMismatch";
    }
    return "?";
}

struct AllocationViolation {
    AllocationIssue kind;
    std::optional<std::size_t> freight;
    std::optional<std::size_t> train;
    double slack = 0.0;
};

inline std::vector<AllocationViolation> check_allocation(const Instance& inst, const Schedule& sched,
                                                         const Allocation& alloc) {
    std::vector<AllocationViolation> out;
    const std::size_t freights = inst.freights.size();
    const std::size_t trains = inst.trains.size();
    if (alloc.assign.size() != freights || alloc.relax.size() != trains ||
        alloc.wr.size() != freights) {
        out.push_back({AllocationIssue::ShapeMismatch, std::nullopt, std::nullopt, 0.0});
        return out;
    }
    require_schedule_shape(inst, sched);

    std::vector<double> load(trains, 0.0);
    for (std::size_t j = 0; j < freights; ++j) {
        const auto t = alloc.assign[j];
        if (!t) continue;
        if (*t >= trains || inst.trains[*t].direction != Direction::Departing) {
            out.push_back({AllocationIssue::InvalidTrain, j, t, 0.0});
            continue;
        }
        load[*t] += inst.freights[j].weight;
        const double arrival = sched.final_arrival(*t);
        if (!alloc.wr[j] || std::abs(*alloc.wr[j] - arrival) > kTimeTolerance) {
            out.push_back({AllocationIssue::ArrivalMismatch, j, t,
                           alloc.wr[j] ? -std::abs(*alloc.wr[j] - arrival) : -1.0});
        }
        const double slack = sched.first_departure(*t) -
                             (inst.freights[j].release + inst.trains[*t].load.front());
        if (slack < -kTimeTolerance) out.push_back({AllocationIssue::Release, j, t, slack});
    }
    for (std::size_t t = 0; t < trains; ++t) {
        const auto& tr = inst.trains[t];
        if (tr.direction != Direction::Departing) continue;
        if (load[t] > tr.capacity + kTimeTolerance) {
            out.push_back({AllocationIssue::CapacityExceeded, std::nullopt, t, tr.capacity - load[t]});
        }
        if (!alloc.relax[t] && below_floor(inst, t, load[t])) {
            out.push_back({AllocationIssue::CapacityFloor, std::nullopt, t,
                           load[t] - inst.capacity_floor * tr.capacity});
        }
    }
    return out;
}

/// x[t][j] = 1 iff freight j rides train t.
inline std::vector<std::vector<int>> assignment_matrix(const Instance& inst, const Allocation& alloc) {
    std::vector<std::vector<int>> x(inst.trains.size(), std::vector<int>(inst.freights.size(), 0));
    for (std::size_t j = 0; j < alloc.assign.size(); ++j) {
        if (alloc.assign[j] && *alloc.assign[j] < x.size()) x[*alloc.assign[j]][j] = 1;
    }
    return x;
}

struct AllocationBudget {
    std::size_t max_nodes = 20'000'000;
};

enum class AllocationSearch : std::uint8_t { Auto, Enumerate, BranchAndBound };

struct AllocationResult {
    Allocation alloc;
    double objective = 0.0;
    std::size_t relaxed = 0;
    std::size_t nodes = 0;
    bool exhausted = false;
};

namespace detail {

/// Lexicographic comparison: fewer relaxed trains first, then objective.
inline bool better_allocation(std::size_t relaxed, double obj, std::size_t best_relaxed,
                              double best_obj) {
    if (relaxed != best_relaxed) return relaxed < best_relaxed;
    return obj < best_obj - kTimeTolerance;
}

struct AllocationProblem {
    const Instance& inst;
    const Schedule& sched;
    std::vector<std::vector<std::size_t>> options;  ///< per freight, cheapest first
    std::vector<std::vector<double>> cost;          ///< per freight, per option
    std::vector<std::size_t> departing;

    AllocationProblem(const Instance& i, const Schedule& s) : inst(i), sched(s) {
        departing = inst.trains_in(Direction::Departing);
        options.resize(inst.freights.size());
        cost.resize(inst.freights.size());
        for (std::size_t j = 0; j < inst.freights.size(); ++j) {
            const auto& f = inst.freights[j];
            std::vector<std::pair<double, std::size_t>> opts;
            for (std::size_t t : departing) {
                if (!can_carry(inst, sched, j, t)) continue;
                opts.emplace_back(
                    f.priority * tardiness(sched.final_arrival(t), f.due) - f.priority, t);
            }
            std::stable_sort(opts.begin(), opts.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (const auto& [c, t] : opts) {
                options[j].push_back(t);
                cost[j].push_back(c);
            }
        }
    }

    std::size_t relaxed(const std::vector<double>& load) const {
        std::size_t r = 0;
        for (std::size_t t : departing) r += below_floor(inst, t, load[t]) ? 1 : 0;
        return r;
    }
};

}  // namespace detail

/// Exact allocation for a fixed schedule: minimizes the number of trains
/// whose capacity floor must be waived, then the allocation objective.
/// Small problems are enumerated outright; larger ones use depth-first
/// branch and bound over per-freight choices.
inline AllocationResult solve_allocation_exact(const Instance& inst, const Schedule& sched,
                                               const AllocationBudget& budget = {},
                                               AllocationSearch search = AllocationSearch::Auto) {
    require_schedule_shape(inst, sched);
    const std::size_t J = inst.freights.size();
    const detail::AllocationProblem prob(inst, sched);
    const std::size_t T = prob.departing.size();

    std::vector<std::optional<std::size_t>> choice(J), best_choice(J);
    std::vector<double> load(inst.trains.size(), 0.0);
    std::size_t best_relaxed = prob.relaxed(load);
    double best_obj = 0.0;
    AllocationResult result;

    if (search == AllocationSearch::Auto) {
        search = J * T <= 32 ? AllocationSearch::Enumerate : AllocationSearch::BranchAndBound;
    }

    if (search == AllocationSearch::Enumerate) {
        std::vector<std::size_t> digit(J, 0);  // options[j].size() means unassigned
        while (true) {
            ++result.nodes;
            std::fill(load.begin(), load.end(), 0.0);
            double obj = 0.0;
            bool ok = true;
            for (std::size_t j = 0; j < J && ok; ++j) {
                if (digit[j] == prob.options[j].size()) continue;
                const std::size_t t = prob.options[j][digit[j]];
                load[t] += inst.freights[j].weight;
                ok = load[t] <= inst.trains[t].capacity + kTimeTolerance;
                obj += prob.cost[j][digit[j]];
            }
            if (ok) {
                const std::size_t rel = prob.relaxed(load);
                if (detail::better_allocation(rel, obj, best_relaxed, best_obj)) {
                    best_relaxed = rel;
                    best_obj = obj;
                    for (std::size_t j = 0; j < J; ++j) {
                        best_choice[j] = digit[j] == prob.options[j].size()
                                             ? std::nullopt
                                             : std::optional<std::size_t>(prob.options[j][digit[j]]);
                    }
                }
            }
            std::size_t j = 0;
            while (j < J && ++digit[j] > prob.options[j].size()) digit[j++] = 0;
            if (j == J) break;
            if (result.nodes >= budget.max_nodes) {
                result.exhausted = true;
                break;
            }
        }
    } else {
        // Suffix sums for bounds: total weight each train could still receive,
        // and the best possible objective contribution of the remaining freight.
        std::vector<double> best_rest(J + 1, 0.0);
        for (std::size_t j = J; j-- > 0;) {
            const double c = prob.cost[j].empty() ? 0.0 : std::min(0.0, prob.cost[j].front());
            best_rest[j] = best_rest[j + 1] + c;
        }
        std::vector<std::vector<double>> reach(J + 1, std::vector<double>(inst.trains.size(), 0.0));
        for (std::size_t j = J; j-- > 0;) {
            reach[j] = reach[j + 1];
            for (std::size_t t : prob.options[j]) reach[j][t] += inst.freights[j].weight;
        }
        auto lower_relaxed = [&](std::size_t depth) {
            std::size_t r = 0;
            for (std::size_t t : prob.departing) {
                r += below_floor(inst, t, load[t] + reach[depth][t]) ? 1 : 0;
            }
            return r;
        };

        double obj = 0.0;
        auto dfs = [&](auto&& self, std::size_t j) -> void {
            if (result.exhausted) return;
            if (++result.nodes > budget.max_nodes) {
                result.exhausted = true;
                return;
            }
            if (j == J) {
                const std::size_t rel = prob.relaxed(load);
                if (detail::better_allocation(rel, obj, best_relaxed, best_obj)) {
                    best_relaxed = rel;
                    best_obj = obj;
                    best_choice = choice;
                }
                return;
            }
            const std::size_t lr = lower_relaxed(j);
            if (lr > best_relaxed) return;
            if (lr == best_relaxed && obj + best_rest[j] >= best_obj - kTimeTolerance) return;
            for (std::size_t o = 0; o <= prob.options[j].size(); ++o) {
                if (o == prob.options[j].size()) {
                    choice[j] = std::nullopt;
                    self(self, j + 1);
                    break;
                }
                const std::size_t t = prob.options[j][o];
                if (load[t] + inst.freights[j].weight > inst.trains[t].capacity + kTimeTolerance) {
                    continue;
                }
                load[t] += inst.freights[j].weight;
                obj += prob.cost[j][o];
                choice[j] = t;
                self(self, j + 1);
                obj -= prob.cost[j][o];
                load[t] -= inst.freights[j].weight;
            }
        };
        dfs(dfs, 0);
    }

    result.alloc = Allocation::empty(inst);
    result.alloc.assign = best_choice;
    set_relax_flags(inst, result.alloc);
    result.alloc = derive_arrivals(inst, sched, std::move(result.alloc));
    result.objective = allocation_objective(inst.freights, result.alloc);
    result.relaxed = relaxed_count(result.alloc);
    return result;
}

}  // namespace railsched
