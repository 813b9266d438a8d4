#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <fmt/format.h>

#include "railsched/core.hpp"

namespace railsched {

/// Uniform draws with a fixed bit recipe, so generated instances are the
/// same on every standard library (std::uniform_real_distribution is not).
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

    /// [0, 1)
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    /// (0, 1]
    double positive_unit() { return 1.0 - unit(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

struct GeneratorRanges {
    double station_time_max = 4.0;  ///< load, unload, dwell and safety lag
    double min_run_lo = 0.5;
    double min_run_hi = 4.0;
    double weight_lo = 10.0;
    double weight_hi = 50.0;
    double capacity_lo = 60.0;
    double capacity_hi = 120.0;
    double release_max = 5.0;
    double due = 10.0;
};

/// Random instance. Departing trains are t1.., returning trains r1.., and
/// freights j1..; all values are drawn in that order from one stream.
inline Instance generate(std::size_t n_segments, std::size_t n_departing, std::size_t n_returning,
                         std::size_t n_freights, std::uint64_t seed,
                         const GeneratorRanges& ranges = {}) {
    if (n_segments == 0) throw std::invalid_argument("generator needs at least one segment");
    if (n_freights > 0 && n_departing == 0) {
        throw std::invalid_argument("freight needs at least one departing train");
    }
    UniformSource rng(seed);
    Instance inst;
    inst.corridor.segments = n_segments;
    const std::size_t n = n_segments;
    auto times = [&](std::size_t count, double lo, double hi) {
        std::vector<double> v(count);
        for (auto& x : v) x = rng.uniform(lo, hi);
        return v;
    };
    inst.safety = times(n, 0.0, ranges.station_time_max);
    for (std::size_t i = 0; i < n_departing + n_returning; ++i) {
        Train tr;
        const bool dep = i < n_departing;
        tr.direction = dep ? Direction::Departing : Direction::Returning;
        tr.id = dep ? fmt::format("t{}", i + 1) : fmt::format("r{}", i - n_departing + 1);
        tr.priority = rng.positive_unit();
        tr.capacity = rng.uniform(ranges.capacity_lo, ranges.capacity_hi);
        tr.min_run = times(n, ranges.min_run_lo, ranges.min_run_hi);
        tr.load = times(n + 1, 0.0, ranges.station_time_max);
        tr.unload = times(n + 1, 0.0, ranges.station_time_max);
        tr.dwell = times(n + 1, 0.0, ranges.station_time_max);
        inst.trains.push_back(std::move(tr));
    }
    for (std::size_t j = 0; j < n_freights; ++j) {
        Freight f;
        f.id = fmt::format("j{}", j + 1);
        f.priority = rng.positive_unit();
        f.weight = rng.uniform(ranges.weight_lo, ranges.weight_hi);
        f.release = rng.uniform(0.0, ranges.release_max);
        f.due = ranges.due;
        inst.freights.push_back(std::move(f));
    }
    inst.big_m = std::ceil(required_big_m(inst));
    return inst;
}

/// The small reference shape used throughout the tests: 3 segments,
/// 3 departing and 2 returning trains, 5 freights.
inline Instance desk_instance(std::uint64_t seed) { return generate(3, 3, 2, 5, seed); }

}  // namespace railsched
