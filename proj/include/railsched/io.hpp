#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "railsched/allocation.hpp"
#include "railsched/core.hpp"
#include "railsched/exact.hpp"
#include "railsched/heuristic.hpp"

namespace railsched {

using json = nlohmann::json;

/// Malformed input document. `what()` names the line and column for syntax
/// errors and the field path for schema errors.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return fmt::format("line {}, column {}", line, col);
}

inline const json& field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw InputError(fmt::format("{}: expected an object", where));
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw InputError(fmt::format("{}: missing field '{}'", where.empty() ? "<root>" : where, key));
    }
    return *it;
}

inline std::string join(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw InputError(fmt::format("{}: expected a number", where));
    return v.get<double>();
}

inline double number_field(const json& obj, const std::string& key, const std::string& where) {
    return number(field(obj, key, where), join(where, key));
}

inline double number_or(const json& obj, const std::string& key, const std::string& where,
                        double fallback) {
    return obj.contains(key) ? number_field(obj, key, where) : fallback;
}

inline std::string string_field(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_string()) throw InputError(fmt::format("{}: expected a string", join(where, key)));
    return v.get<std::string>();
}

inline std::string id_field(const json& obj, const std::string& where) {
    const auto& v = field(obj, "id", where);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw InputError(fmt::format("{}.id: expected a string or integer", where));
}

inline const json& array_field(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = field(obj, key, where);
    if (!v.is_array()) throw InputError(fmt::format("{}: expected an array", join(where, key)));
    return v;
}

inline std::vector<double> numbers(const json& obj, const std::string& key,
                                   const std::string& where) {
    const auto& arr = array_field(obj, key, where);
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        out.push_back(number(arr[i], fmt::format("{}[{}]", join(where, key), i)));
    }
    return out;
}

inline json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

/// Parses a JSON document; syntax errors become InputError with position.
inline json parse_json(const std::string& text, const std::string& source = "input") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(fmt::format("{}: {}: syntax error: {}", source,
                                     detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1),
                                     e.what()));
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("{}: cannot open file", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("{}: cannot write file", path));
    out << text;
}

// ---- Instance ----

inline json to_json(const Instance& inst) {
    json j;
    j["n"] = inst.segments();
    j["safety"] = inst.safety;
    j["big_m"] = inst.big_m;
    j["capacity_floor"] = inst.capacity_floor;
    if (inst.arrival_headway) j["arrival_headway"] = true;
    j["trains"] = json::array();
    for (const auto& t : inst.trains) {
        j["trains"].push_back({{"id", t.id},
                               {"direction", to_string(t.direction)},
                               {"priority", t.priority},
                               {"capacity", t.capacity},
                               {"min_run", t.min_run},
                               {"load", t.load},
                               {"unload", t.unload},
                               {"dwell", t.dwell}});
    }
    j["freights"] = json::array();
    for (const auto& f : inst.freights) {
        j["freights"].push_back({{"id", f.id},
                                 {"priority", f.priority},
                                 {"weight", f.weight},
                                 {"due", f.due},
                                 {"release", f.release}});
    }
    return j;
}

/// Reads an instance document. Shape errors throw InputError; value-range
/// problems are left to validate_instance.
inline Instance instance_from_json(const json& j) {
    using namespace detail;
    Instance inst;
    const auto& nv = field(j, "n", "");
    if (!nv.is_number_integer() || nv.get<long long>() < 1) {
        throw InputError("n: expected a positive integer");
    }
    inst.corridor.segments = nv.get<std::size_t>();
    inst.safety = numbers(j, "safety", "");
    inst.capacity_floor = number_or(j, "capacity_floor", "", 0.6);
    if (j.contains("arrival_headway")) {
        if (!j["arrival_headway"].is_boolean()) {
            throw InputError("arrival_headway: expected true or false");
        }
        inst.arrival_headway = j["arrival_headway"].get<bool>();
    }
    const auto& trains = array_field(j, "trains", "");
    for (std::size_t i = 0; i < trains.size(); ++i) {
        const std::string where = fmt::format("trains[{}]", i);
        Train t;
        t.id = id_field(trains[i], where);
        const std::string dir = string_field(trains[i], "direction", where);
        if (dir == "dep") {
            t.direction = Direction::Departing;
        } else if (dir == "ret") {
            t.direction = Direction::Returning;
        } else {
            throw InputError(fmt::format("{}.direction: expected \"dep\" or \"ret\", found \"{}\"",
                                         where, dir));
        }
        t.priority = number_field(trains[i], "priority", where);
        t.capacity = number_or(trains[i], "capacity", where, 0.0);
        t.min_run = numbers(trains[i], "min_run", where);
        t.load = numbers(trains[i], "load", where);
        t.unload = numbers(trains[i], "unload", where);
        t.dwell = numbers(trains[i], "dwell", where);
        inst.trains.push_back(std::move(t));
    }
    if (j.contains("freights")) {
        const auto& freights = array_field(j, "freights", "");
        for (std::size_t i = 0; i < freights.size(); ++i) {
            const std::string where = fmt::format("freights[{}]", i);
            Freight f;
            f.id = id_field(freights[i], where);
            f.priority = number_field(freights[i], "priority", where);
            f.weight = number_field(freights[i], "weight", where);
            f.due = number_or(freights[i], "due", where, 10.0);
            f.release = number_or(freights[i], "release", where, 0.0);
            inst.freights.push_back(std::move(f));
        }
    }
    if (j.contains("big_m")) {
        inst.big_m = number_field(j, "big_m", "");
    } else {
        inst.big_m = std::ceil(required_big_m(inst));
    }
    return inst;
}

// ---- Schedule ----

inline json to_json(const Instance& inst, const Schedule& s) {
    json j;
    j["objective"] = s.objective;
    j["trains"] = json::array();
    for (std::size_t t = 0; t < s.trains.size(); ++t) {
        j["trains"].push_back(
            {{"id", inst.trains.at(t).id}, {"dep", s.trains[t].dep}, {"arr", s.trains[t].arr}});
    }
    return j;
}

/// Reads a schedule and lines it up with the instance's train order.
inline Schedule schedule_from_json(const Instance& inst, const json& j,
                                   const std::string& where = "") {
    using namespace detail;
    Schedule s;
    s.objective = number_or(j, "objective", where, 0.0);
    s.trains.resize(inst.trains.size());
    std::vector<char> seen(inst.trains.size(), 0);
    const auto& trains = array_field(j, "trains", where);
    for (std::size_t i = 0; i < trains.size(); ++i) {
        const std::string w = fmt::format("{}[{}]", join(where, "trains"), i);
        const std::string id = id_field(trains[i], w);
        const auto t = inst.train_index(id);
        if (!t) throw InputError(fmt::format("{}.id: unknown train '{}'", w, id));
        if (seen[*t]) throw InputError(fmt::format("{}.id: train '{}' listed twice", w, id));
        seen[*t] = 1;
        s.trains[*t].dep = numbers(trains[i], "dep", w);
        s.trains[*t].arr = numbers(trains[i], "arr", w);
        if (s.trains[*t].dep.size() != inst.segments() ||
            s.trains[*t].arr.size() != inst.segments()) {
            throw InputError(fmt::format("{}: expected {} departures and arrivals", w,
                                         inst.segments()));
        }
    }
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        if (!seen[t]) {
            throw InputError(fmt::format("{}: train '{}' has no event times",
                                         join(where, "trains"), inst.trains[t].id));
        }
    }
    return s;
}

// ---- Allocation ----

inline json to_json(const Instance& inst, const Allocation& a) {
    json j;
    j["assign"] = json::object();
    j["wr"] = json::object();
    j["tardi"] = json::object();
    j["relax"] = json::object();
    for (std::size_t f = 0; f < inst.freights.size(); ++f) {
        const auto& id = inst.freights[f].id;
        j["assign"][id] = a.assign[f] ? json(inst.trains.at(*a.assign[f]).id) : json(nullptr);
        j["wr"][id] = detail::optional_number(a.wr[f]);
        j["tardi"][id] = detail::optional_number(a.tardi[f]);
    }
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        j["relax"][inst.trains[t].id] = static_cast<bool>(a.relax[t]);
    }
    return j;
}

inline Allocation allocation_from_json(const Instance& inst, const json& j,
                                       const std::string& where = "") {
    using namespace detail;
    Allocation a = Allocation::empty(inst);
    const auto& assign = field(j, "assign", where);
    if (!assign.is_object()) throw InputError(fmt::format("{}: expected an object", join(where, "assign")));
    for (std::size_t f = 0; f < inst.freights.size(); ++f) {
        const auto& id = inst.freights[f].id;
        const std::string w = join(join(where, "assign"), id);
        if (!assign.contains(id) || assign[id].is_null()) continue;
        if (!assign[id].is_string()) throw InputError(fmt::format("{}: expected a train id or null", w));
        const auto t = inst.train_index(assign[id].get<std::string>());
        if (!t) throw InputError(fmt::format("{}: unknown train '{}'", w, assign[id].get<std::string>()));
        a.assign[f] = *t;
    }
    for (auto it = assign.begin(); it != assign.end(); ++it) {
        bool known = false;
        for (const auto& f : inst.freights) known = known || f.id == it.key();
        if (!known) throw InputError(fmt::format("{}: unknown freight", join(join(where, "assign"), it.key())));
    }
    if (j.contains("relax")) {
        const auto& relax = j["relax"];
        for (std::size_t t = 0; t < inst.trains.size(); ++t) {
            const auto& id = inst.trains[t].id;
            if (!relax.contains(id)) continue;
            if (!relax[id].is_boolean()) {
                throw InputError(fmt::format("{}: expected true or false", join(join(where, "relax"), id)));
            }
            a.relax[t] = relax[id].get<bool>();
        }
    }
    for (const char* key : {"wr", "tardi"}) {
        if (!j.contains(key)) continue;
        const auto& m = j[key];
        auto& dst = std::string(key) == "wr" ? a.wr : a.tardi;
        for (std::size_t f = 0; f < inst.freights.size(); ++f) {
            const auto& id = inst.freights[f].id;
            if (!m.contains(id) || m[id].is_null()) continue;
            dst[f] = number(m[id], join(join(where, key), id));
        }
    }
    return a;
}

// ---- Solution and reports ----

inline json to_json(const Instance& inst, const Solution& s) {
    json j;
    auto ids = [&](const std::vector<std::size_t>& seq) {
        json arr = json::array();
        for (std::size_t t : seq) arr.push_back(inst.trains.at(t).id);
        return arr;
    };
    j["seq_dep"] = ids(s.seq_dep);
    j["seq_ret"] = ids(s.seq_ret);
    j["fitness"] = s.fitness;
    j["earliest"] = json::object();
    for (std::size_t t = 0; t < s.earliest.size(); ++t) j["earliest"][inst.trains[t].id] = s.earliest[t];
    j["schedule"] = to_json(inst, s.sched);
    j["allocation"] = to_json(inst, s.alloc);
    return j;
}

inline json to_json(const SolveReport& r) {
    return {{"status", to_string(r.status)},
            {"objective_kind", to_string(r.kind)},
            {"lower_bound", r.lower_bound},
            {"upper_bound", r.upper_bound},
            {"gap", detail::finite_or_null(r.gap)},
            {"nodes_explored", r.nodes_explored},
            {"cpu_seconds", std::round(r.cpu_seconds * 10.0) / 10.0}};
}

inline std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::string out = "iteration,best_fitness,mean_fitness\n";
    for (const auto& row : trace) out += fmt::format("{},{},{}\n", row.iteration, row.best, row.mean);
    return out;
}

inline json violations_to_json(const Instance& inst, const std::vector<Violation>& vs) {
    json arr = json::array();
    for (const auto& v : vs) {
        json e = {{"family", to_string(v.family)},
                  {"train", inst.trains.at(v.train).id},
                  {"segment", v.segment},
                  {"slack", v.slack}};
        if (v.other) e["other"] = inst.trains.at(*v.other).id;
        arr.push_back(std::move(e));
    }
    return arr;
}

inline json allocation_violations_to_json(const Instance& inst,
                                          const std::vector<AllocationViolation>& vs) {
    json arr = json::array();
    for (const auto& v : vs) {
        json e = {{"kind", to_string(v.kind)}, {"slack", v.slack}};
        if (v.freight && *v.freight < inst.freights.size()) e["freight"] = inst.freights[*v.freight].id;
        if (v.train && *v.train < inst.trains.size()) e["train"] = inst.trains[*v.train].id;
        arr.push_back(std::move(e));
    }
    return arr;
}

}  // namespace railsched
