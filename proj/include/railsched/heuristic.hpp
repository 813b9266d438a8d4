#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "railsched/allocation.hpp"
#include "railsched/core.hpp"
#include "railsched/decode.hpp"
#include "railsched/instance_gen.hpp"
#include "railsched/timing.hpp"

namespace railsched {

struct HeuristicParams {
    std::size_t population = 30;
    double rho = 0.2;
    double alpha = 0.4;
    std::size_t iterations = 200;
    std::uint64_t seed = 1;
    bool opt_enabled = true;
    double allocation_weight = 1.0;

    void validate() const {
        if (population < 1) throw std::invalid_argument("population must be at least 1");
        if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
        if (std::floor(rho * static_cast<double>(population)) < 1.0) {
            throw std::invalid_argument("rho * population must be at least 1");
        }
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
        if (!(allocation_weight >= 0.0) || !std::isfinite(allocation_weight)) {
            throw std::invalid_argument("allocation weight must be finite and nonnegative");
        }
    }
};

struct Solution {
    std::vector<std::size_t> seq_dep;
    std::vector<std::size_t> seq_ret;
    Ordering ordering;
    std::vector<double> earliest;  ///< per train: earliest final arrival
    Schedule sched;
    Allocation alloc;
    double fitness = 0.0;
};

/// Sum of w * weight over the train's freight, relative to its capacity.
inline double train_score(const Train& train, const std::vector<Freight>& assigned) {
    if (assigned.empty()) return 0.0;
    if (train.capacity <= 0.0) {
        throw std::invalid_argument("train " + train.id + " has no capacity but carries freight");
    }
    double total = 0.0;
    for (const auto& f : assigned) total += f.priority * f.weight;
    return total / train.capacity;
}

/// Linear ranking over k ranked items: rank i (1-based) gets 2(k-i+1)/(k(k+1)).
inline std::vector<double> selection_probabilities(std::size_t k) {
    if (k == 0) throw std::invalid_argument("selection needs at least one item");
    std::vector<double> p(k);
    const double denom = static_cast<double>(k) * static_cast<double>(k + 1);
    for (std::size_t i = 0; i < k; ++i) p[i] = 2.0 * static_cast<double>(k - i) / denom;
    return p;
}

/// Roulette-wheel draw; the last index absorbs rounding in the cumulative sum.
inline std::size_t monte_carlo_select(const std::vector<double>& probs, UniformSource& rng) {
    if (probs.empty()) throw std::invalid_argument("cannot select from an empty distribution");
    const double u = rng.unit();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

/// Freight per train before any schedule exists: earliest release first,
/// each onto the departing train with the most remaining capacity.
inline std::vector<std::vector<Freight>> tentative_allocation(const Instance& inst) {
    std::vector<std::vector<Freight>> out(inst.trains.size());
    std::vector<double> room(inst.trains.size(), 0.0);
    for (std::size_t t = 0; t < inst.trains.size(); ++t) room[t] = inst.trains[t].capacity;
    std::vector<std::size_t> order(inst.freights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return inst.freights[a].release < inst.freights[b].release;
    });
    const auto departing = inst.trains_in(Direction::Departing);
    for (std::size_t j : order) {
        const auto& f = inst.freights[j];
        std::optional<std::size_t> pick;
        for (std::size_t t : departing) {
            if (room[t] + kTimeTolerance >= f.weight && (!pick || room[t] > room[*pick])) pick = t;
        }
        if (!pick) continue;
        room[*pick] -= f.weight;
        out[*pick].push_back(f);
    }
    return out;
}

/// Allocation for a fixed schedule: greedy by release date onto the cheapest
/// feasible train, then single-freight moves while they reduce the number of
/// waived floors or, failing that, the objective.
inline Allocation allocate_for_schedule(const Instance& inst, const Schedule& sched) {
    const std::size_t J = inst.freights.size();
    const std::size_t T = inst.trains.size();
    std::vector<std::optional<std::size_t>> assign(J);
    std::vector<double> load(T, 0.0);
    auto cost = [&](std::size_t j, std::size_t t) {
        const auto& f = inst.freights[j];
        return f.priority * tardiness(sched.final_arrival(t), f.due) - f.priority;
    };
    auto fits = [&](std::size_t j, std::size_t t) {
        return can_carry(inst, sched, j, t) &&
               load[t] + inst.freights[j].weight <= inst.trains[t].capacity + kTimeTolerance;
    };

    std::vector<std::size_t> order(J);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return inst.freights[a].release < inst.freights[b].release;
    });
    for (std::size_t j : order) {
        std::optional<std::size_t> pick;
        for (std::size_t t = 0; t < T; ++t) {
            if (fits(j, t) && (!pick || cost(j, t) < cost(j, *pick) - kTimeTolerance)) pick = t;
        }
        if (pick) {
            assign[j] = pick;
            load[*pick] += inst.freights[j].weight;
        }
    }

    auto relaxed = [&] {
        std::size_t r = 0;
        for (std::size_t t = 0; t < T; ++t) r += below_floor(inst, t, load[t]) ? 1 : 0;
        return r;
    };
    auto total = [&] {
        double s = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            if (assign[j]) s += cost(j, *assign[j]);
        }
        return s;
    };
    std::size_t cur_relaxed = relaxed();
    double cur_obj = total();
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t j = 0; j < J; ++j) {
            const auto from = assign[j];
            const double w = inst.freights[j].weight;
            for (std::size_t o = 0; o <= T; ++o) {
                const std::optional<std::size_t> to =
                    o == T ? std::nullopt : std::optional<std::size_t>(o);
                if (to == assign[j]) continue;
                if (from) load[*from] -= w;
                if (to && !fits(j, *to)) {
                    if (from) load[*from] += w;
                    continue;
                }
                if (to) load[*to] += w;
                assign[j] = to;
                const std::size_t r = relaxed();
                const double obj = total();
                if (detail::better_allocation(r, obj, cur_relaxed, cur_obj)) {
                    cur_relaxed = r;
                    cur_obj = obj;
                    improved = true;
                    break;
                }
                if (to) load[*to] -= w;
                if (from) load[*from] += w;
                assign[j] = from;
            }
        }
    }

    Allocation alloc = Allocation::empty(inst);
    alloc.assign = assign;
    set_relax_flags(inst, alloc);
    return derive_arrivals(inst, sched, std::move(alloc));
}

inline double fitness(const Instance& inst, const Solution& sol, double allocation_weight) {
    return objective_value(inst, sol.sched, ObjectiveKind::WeightedTravelTime) +
           allocation_weight * allocation_objective(inst.freights, sol.alloc);
}

/// Decodes the sequences, times them, allocates freight and scores the result.
inline Solution evaluate_sequences(const Instance& inst, std::vector<std::size_t> seq_dep,
                                   std::vector<std::size_t> seq_ret, double allocation_weight) {
    Solution sol;
    sol.seq_dep = std::move(seq_dep);
    sol.seq_ret = std::move(seq_ret);
    sol.ordering = decode_sequences(inst, sol.seq_dep, sol.seq_ret);
    auto outcome = solve_fixed_order(inst, sol.ordering, ObjectiveKind::WeightedTravelTime);
    sol.sched = std::move(outcome.schedule());
    sol.earliest.resize(inst.trains.size());
    for (std::size_t t = 0; t < inst.trains.size(); ++t) sol.earliest[t] = sol.sched.final_arrival(t);
    sol.alloc = allocate_for_schedule(inst, sol.sched);
    sol.fitness = fitness(inst, sol, allocation_weight);
    return sol;
}

/// Builds one solution: scores trains by their tentative freight, then draws
/// each direction's sequence by rank-weighted selection without replacement.
inline Solution construct_solution(const Instance& inst, UniformSource& rng,
                                   const HeuristicParams& params) {
    const auto tentative = tentative_allocation(inst);
    std::vector<double> score(inst.trains.size());
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        score[t] = train_score(inst.trains[t], tentative[t]);
    }
    auto draw = [&](Direction d) {
        auto pool = inst.trains_in(d);
        std::stable_sort(pool.begin(), pool.end(),
                         [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
        std::vector<std::size_t> seq;
        while (!pool.empty()) {
            const std::size_t i = monte_carlo_select(selection_probabilities(pool.size()), rng);
            seq.push_back(pool[i]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
        }
        return seq;
    };
    auto seq_dep = draw(Direction::Departing);
    auto seq_ret = draw(Direction::Returning);
    return evaluate_sequences(inst, std::move(seq_dep), std::move(seq_ret),
                              params.allocation_weight);
}

/// How many trains of a solution with fitness phi_i get resequenced.
inline std::size_t correction_count(double phi_best, double phi_worst, double phi_i, double alpha,
                                    std::size_t train_count) {
    if (phi_i < phi_best - kTimeTolerance || phi_i > phi_worst + kTimeTolerance) {
        throw std::invalid_argument("fitness lies outside [best, worst]");
    }
    const std::size_t cap = train_count == 0 ? 0 : train_count - 1;
    if (std::abs(phi_i - phi_worst) <= kTimeTolerance) return cap;
    const double raw = alpha * (phi_best - phi_worst) / (phi_i - phi_worst);
    const double rounded = std::floor(raw + 0.5);
    if (rounded <= 0.0) return 0;
    return std::min(cap, static_cast<std::size_t>(rounded));
}

/// Weighted delay over free-run time per train.
inline std::vector<double> train_delays(const Instance& inst, const Schedule& sched) {
    std::vector<double> delay(inst.trains.size());
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        const auto& tr = inst.trains[t];
        delay[t] = tr.priority *
                   (sched.final_arrival(t) - sched.first_departure(t) - tr.free_run_time());
    }
    return delay;
}

/// The nu trains with the largest weighted delay; ties go to the smaller id.
/// Delays are compared on a kTimeTolerance grid so rounding noise in
/// propagated times does not decide between equally delayed trains.
inline std::vector<std::size_t> select_worst_trains(const Instance& inst, const Solution& sol,
                                                    std::size_t nu) {
    auto delay = train_delays(inst, sol.sched);
    for (auto& d : delay) d = std::round(d / kTimeTolerance);
    std::vector<std::size_t> idx(inst.trains.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (delay[a] != delay[b]) return delay[a] > delay[b];
        return inst.trains[a].id < inst.trains[b].id;
    });
    idx.resize(std::min(nu, idx.size()));
    return idx;
}

/// Moves the selected items of `seq` toward their placement in `ref`.
///
/// The selected items are removed, then reinserted one by one in `ref`
/// order, each directly before the first item after it in `ref` that is
/// already present; with no such item it goes to the end.
template <typename T>
std::vector<T> reorder_toward_reference(const std::vector<T>& seq, const std::vector<T>& ref,
                                        const std::vector<T>& selected) {
    auto contains = [](const std::vector<T>& v, const T& x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    for (const auto& s : selected) {
        if (!contains(seq, s) || !contains(ref, s)) {
            throw std::invalid_argument("selected item is not in both sequences");
        }
    }
    std::vector<T> out;
    for (const auto& x : seq) {
        if (!contains(selected, x)) out.push_back(x);
    }
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!contains(selected, ref[i])) continue;
        auto pos = out.end();
        for (std::size_t k = i + 1; k < ref.size(); ++k) {
            auto it = std::find(out.begin(), out.end(), ref[k]);
            if (it != out.end()) {
                pos = it;
                break;
            }
        }
        out.insert(pos, ref[i]);
    }
    return out;
}

/// Adjacent-swap local search: departing sequence then returning sequence,
/// keeping a swap only when it strictly lowers fitness.
inline Solution opt_pass(const Instance& inst, Solution sol, const HeuristicParams& params) {
    for (bool departing : {true, false}) {
        const std::size_t len = departing ? sol.seq_dep.size() : sol.seq_ret.size();
        for (std::size_t i = 0; i + 1 < len; ++i) {
            auto dep = sol.seq_dep;
            auto ret = sol.seq_ret;
            auto& seq = departing ? dep : ret;
            std::swap(seq[i], seq[i + 1]);
            Solution cand = evaluate_sequences(inst, std::move(dep), std::move(ret),
                                               params.allocation_weight);
            if (cand.fitness < sol.fitness - kTimeTolerance) sol = std::move(cand);
        }
    }
    return sol;
}

struct TraceRow {
    std::size_t iteration;
    double best;
    double mean;
};

struct HeuristicResult {
    Solution best;
    std::vector<TraceRow> trace;  ///< row 0 is the initial population
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream per (seed, solution, iteration).
inline UniformSource stream_for(std::uint64_t seed, std::size_t index, std::size_t iteration) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(index));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(iteration) << 32));
    return UniformSource(h);
}

inline double mean_fitness(const std::vector<Solution>& pop) {
    double s = 0.0;
    for (const auto& p : pop) s += p.fitness;
    return s / static_cast<double>(pop.size());
}

}  // namespace detail

/// Population search: each iteration every solution resequences its most
/// delayed trains toward a random member of the elite set, optionally
/// followed by the adjacent-swap pass. The best solution ever seen is kept.
inline HeuristicResult run_heuristic(const Instance& inst, const HeuristicParams& params) {
    params.validate();
    const std::size_t size = params.population;
    std::vector<Solution> pop;
    pop.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        auto rng = detail::stream_for(params.seed, i, 0);
        pop.push_back(construct_solution(inst, rng, params));
    }

    HeuristicResult result;
    auto track_best = [&] {
        for (const auto& s : pop) {
            if (s.fitness < result.best.fitness - kTimeTolerance) result.best = s;
        }
    };
    result.best = pop.front();
    track_best();
    result.trace.push_back({0, result.best.fitness, detail::mean_fitness(pop)});

    const std::size_t elite =
        static_cast<std::size_t>(std::floor(params.rho * static_cast<double>(size)));
    for (std::size_t it = 1; it <= params.iterations; ++it) {
        std::vector<std::size_t> rank(size);
        std::iota(rank.begin(), rank.end(), 0);
        std::stable_sort(rank.begin(), rank.end(),
                         [&](std::size_t a, std::size_t b) { return pop[a].fitness < pop[b].fitness; });
        const double phi_best = pop[rank.front()].fitness;
        const double phi_worst = pop[rank.back()].fitness;

        std::vector<Solution> next;
        next.reserve(size);
        for (std::size_t i = 0; i < size; ++i) {
            auto rng = detail::stream_for(params.seed, i, it);
            const std::size_t pick = std::min(
                elite - 1, static_cast<std::size_t>(rng.unit() * static_cast<double>(elite)));
            const Solution& ref = pop[rank[pick]];
            const Solution& cur = pop[i];
            const std::size_t nu = correction_count(phi_best, phi_worst, cur.fitness, params.alpha,
                                                    inst.trains.size());
            const auto worst = select_worst_trains(inst, cur, nu);
            std::vector<std::size_t> sel_dep, sel_ret;
            for (std::size_t t : worst) {
                (inst.trains[t].direction == Direction::Departing ? sel_dep : sel_ret).push_back(t);
            }
            Solution sol = evaluate_sequences(
                inst, reorder_toward_reference(cur.seq_dep, ref.seq_dep, sel_dep),
                reorder_toward_reference(cur.seq_ret, ref.seq_ret, sel_ret),
                params.allocation_weight);
            if (params.opt_enabled) sol = opt_pass(inst, std::move(sol), params);
            next.push_back(std::move(sol));
        }
        pop = std::move(next);
        track_best();
        result.trace.push_back({it, result.best.fitness, detail::mean_fitness(pop)});
    }
    return result;
}

}  // namespace railsched
