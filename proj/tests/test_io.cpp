#include <gtest/gtest.h>

#include "support.hpp"

namespace railsched {
namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

bool same_instance(const Instance& a, const Instance& b) {
    if (a.segments() != b.segments() || a.safety != b.safety || a.big_m != b.big_m ||
        a.capacity_floor != b.capacity_floor || a.trains.size() != b.trains.size() ||
        a.freights.size() != b.freights.size() || a.arrival_headway != b.arrival_headway) {
        return false;
    }
    for (std::size_t t = 0; t < a.trains.size(); ++t) {
        const auto& x = a.trains[t];
        const auto& y = b.trains[t];
        if (x.id != y.id || x.direction != y.direction || x.priority != y.priority ||
            x.capacity != y.capacity || x.min_run != y.min_run || x.load != y.load ||
            x.unload != y.unload || x.dwell != y.dwell) {
            return false;
        }
    }
    for (std::size_t j = 0; j < a.freights.size(); ++j) {
        const auto& x = a.freights[j];
        const auto& y = b.freights[j];
        if (x.id != y.id || x.priority != y.priority || x.weight != y.weight || x.due != y.due ||
            x.release != y.release) {
            return false;
        }
    }
    return true;
}

TEST(InstanceJson, RoundTripIsExact) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = generate(1 + seed % 4, 2 + seed % 3, seed % 3, seed % 6, seed);
        const auto text = to_json(inst).dump();
        const auto back = instance_from_json(parse_json(text));
        EXPECT_TRUE(same_instance(inst, back));
        EXPECT_EQ(to_json(back).dump(), text);
    }
}

TEST(InstanceJson, DefaultsForOptionalFields) {
    const auto j = parse_json(R"({
        "n": 1, "safety": [0.5],
        "trains": [{"id": "a", "direction": "dep", "priority": 1, "capacity": 80,
                    "min_run": [2], "load": [0, 0], "unload": [0, 0], "dwell": [0, 0]}]
    })");
    const auto inst = instance_from_json(j);
    EXPECT_EQ(inst.capacity_floor, 0.6);
    EXPECT_TRUE(inst.freights.empty());
    EXPECT_GE(inst.big_m, required_big_m(inst));
    EXPECT_TRUE(validate_instance(inst).empty());
}

TEST(InstanceJson, SyntaxErrorsReportLineAndColumn) {
    const std::string text = "{\n  \"n\": 3,\n  \"safety\": [1, 2,, 3]\n}";
    const auto msg = error_of([&] { parse_json(text, "inst.json"); });
    EXPECT_NE(msg.find("inst.json"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(InstanceJson, ShapeErrorsNameTheField) {
    auto j = to_json(desk_instance(1));
    j["trains"][2]["min_run"][1] = "fast";
    EXPECT_NE(error_of([&] { instance_from_json(j); }).find("trains[2].min_run[1]"), std::string::npos);

    j = to_json(desk_instance(1));
    j["trains"][0].erase("priority");
    EXPECT_NE(error_of([&] { instance_from_json(j); }).find("trains[0]: missing field 'priority'"),
              std::string::npos);

    j = to_json(desk_instance(1));
    j["trains"][1]["direction"] = "up";
    EXPECT_NE(error_of([&] { instance_from_json(j); }).find("trains[1].direction"), std::string::npos);

    j = to_json(desk_instance(1));
    j["n"] = 0;
    EXPECT_NE(error_of([&] { instance_from_json(j); }).find("n:"), std::string::npos);
}

TEST(ScheduleJson, RoundTripAndOrderIndependence) {
    const auto inst = desk_instance(3);
    const auto sched = solve_scheduling_exact(inst, ObjectiveKind::TotalArrival).schedule;
    auto j = to_json(inst, sched);
    const auto back = schedule_from_json(inst, parse_json(j.dump()));
    EXPECT_EQ(back.objective, sched.objective);
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        EXPECT_EQ(back.trains[t].dep, sched.trains[t].dep);
        EXPECT_EQ(back.trains[t].arr, sched.trains[t].arr);
    }
    std::reverse(j["trains"].begin(), j["trains"].end());
    const auto reversed = schedule_from_json(inst, j);
    EXPECT_EQ(reversed.trains[0].dep, sched.trains[0].dep);
}

TEST(ScheduleJson, StructuralErrors) {
    const auto inst = desk_instance(3);
    const auto sched = solve_scheduling_exact(inst, ObjectiveKind::TotalArrival).schedule;
    auto j = to_json(inst, sched);
    j["trains"][1]["dep"].erase(0);
    EXPECT_NE(error_of([&] { schedule_from_json(inst, j); }).find("trains[1]"), std::string::npos);

    j = to_json(inst, sched);
    j["trains"][0]["id"] = "zz";
    EXPECT_NE(error_of([&] { schedule_from_json(inst, j); }).find("unknown train 'zz'"),
              std::string::npos);

    j = to_json(inst, sched);
    j["trains"].erase(4);
    EXPECT_NE(error_of([&] { schedule_from_json(inst, j); }).find("has no event times"),
              std::string::npos);
}

TEST(AllocationJson, RoundTrip) {
    const auto inst = desk_instance(5);
    const auto sched = solve_scheduling_exact(inst, ObjectiveKind::TotalDeparture).schedule;
    const auto alloc = solve_allocation_exact(inst, sched).alloc;
    const auto back = allocation_from_json(inst, parse_json(to_json(inst, alloc).dump()));
    EXPECT_EQ(back.assign, alloc.assign);
    EXPECT_EQ(back.relax, alloc.relax);
    EXPECT_EQ(back.wr, alloc.wr);
    EXPECT_EQ(back.tardi, alloc.tardi);
}

TEST(AllocationJson, UnknownIdsAreRejected) {
    const auto inst = desk_instance(5);
    json j = {{"assign", {{"j1", "t9"}}}};
    EXPECT_NE(error_of([&] { allocation_from_json(inst, j); }).find("unknown train 't9'"),
              std::string::npos);
    j = {{"assign", {{"j42", "t1"}}}};
    EXPECT_NE(error_of([&] { allocation_from_json(inst, j); }).find("unknown freight"),
              std::string::npos);
}

TEST(ReportJson, GapIsNullWhenUndefined) {
    SolveReport r;
    r.lower_bound = 0.0;
    r.upper_bound = 3.0;
    r.gap = relative_gap(r.lower_bound, r.upper_bound);
    r.cpu_seconds = 1.26;
    const auto j = to_json(r);
    EXPECT_TRUE(j["gap"].is_null());
    EXPECT_DOUBLE_EQ(j["cpu_seconds"].get<double>(), 1.3);
    r.lower_bound = 2.0;
    r.gap = relative_gap(r.lower_bound, r.upper_bound);
    EXPECT_DOUBLE_EQ(to_json(r)["gap"].get<double>(), 0.5);
}

TEST(TraceCsv, HeaderAndRows) {
    const std::vector<TraceRow> rows{{0, 10.5, 12.0}, {1, 10.0, 11.25}};
    EXPECT_EQ(trace_csv(rows), "iteration,best_fitness,mean_fitness\n0,10.5,12\n1,10,11.25\n");
}

TEST(ViolationJson, NamesTrainsAndFamily) {
    const auto inst = testing::make_instance(
        1, {testing::make_train("a", Direction::Departing, {2}),
            testing::make_train("b", Direction::Departing, {2})},
        1.0);
    const Schedule s{{TrainTimes{{0}, {2}}, TrainTimes{{0.5}, {2.5}}}, 0.0};
    const auto j = violations_to_json(inst, validate_schedule(inst, s));
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["family"], to_string(ConstraintFamily::Headway));
    EXPECT_EQ(j[0]["segment"], 1);
}

}  // namespace
}  // namespace railsched
