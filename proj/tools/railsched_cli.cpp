// railsched command-line front end.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or malformed input,
// 3 exact search stopped on its budget.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "railsched/railsched.hpp"

namespace {

using namespace railsched;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;
constexpr int kBudget = 3;

struct Globals {
    std::uint64_t seed = 1;
    double budget_seconds = 60.0;
    std::size_t budget_nodes = 50'000'000;
    std::string objective = "travel";
    std::size_t population = 30;
    double rho = 0.2;
    double alpha = 0.4;
    std::size_t iterations = 200;
    bool no_opt = false;
    std::string format;

    HeuristicParams heuristic() const {
        HeuristicParams p;
        p.seed = seed;
        p.population = population;
        p.rho = rho;
        p.alpha = alpha;
        p.iterations = iterations;
        p.opt_enabled = !no_opt;
        return p;
    }
    SearchBudget budget() const { return {budget_nodes, budget_seconds}; }
};

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
    } else {
        write_file(path, text);
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json load_json(const std::string& path) { return parse_json(read_file(path), path); }

/// Reads and checks an instance; defects are reported as malformed input.
Instance load_instance(const std::string& path) {
    Instance inst;
    try {
        inst = instance_from_json(load_json(path));
    } catch (const InputError& e) {
        const std::string msg = e.what();
        throw InputError(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
    }
    const auto defects = validate_instance(inst);
    if (!defects.empty()) {
        std::string msg = fmt::format("{}: invalid instance", path);
        for (const auto& d : defects) {
            msg += fmt::format("\n  {}: {} ({})", d.where, d.message, to_string(d.kind));
        }
        throw InputError(msg);
    }
    return inst;
}

Schedule load_schedule(const Instance& inst, const std::string& path) {
    try {
        return schedule_from_json(inst, load_json(path));
    } catch (const InputError& e) {
        const std::string msg = e.what();
        throw InputError(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
    }
}

Allocation load_allocation(const Instance& inst, const std::string& path) {
    try {
        return allocation_from_json(inst, load_json(path));
    } catch (const InputError& e) {
        const std::string msg = e.what();
        throw InputError(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-track corridor train scheduling and freight allocation"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--budget-seconds", g.budget_seconds, "Exact search time limit (s)");
    app.add_option("--budget-nodes", g.budget_nodes, "Exact search node limit");
    app.add_option("--objective", g.objective, "departure, arrival or travel")
        ->check(CLI::IsMember({"departure", "arrival", "travel"}));
    app.add_option("--population", g.population, "Heuristic population size");
    app.add_option("--rho", g.rho, "Elite fraction of the population");
    app.add_option("--alpha", g.alpha, "Correction strength in (0,1)");
    app.add_option("--iterations", g.iterations, "Heuristic iterations");
    app.add_flag("--no-opt", g.no_opt, "Disable the adjacent-swap pass");
    app.add_option("--format", g.format, "Output format for gantt: svg or text");

    // generate
    auto* gen = app.add_subcommand("generate", "Write a random instance")->fallthrough();
    std::size_t gen_segments = 3, gen_dep = 3, gen_ret = 2, gen_freights = 5;
    std::string gen_out;
    gen->add_option("--segments", gen_segments)->check(CLI::PositiveNumber);
    gen->add_option("--departing", gen_dep);
    gen->add_option("--returning", gen_ret);
    gen->add_option("--freights", gen_freights);
    gen->add_option("-o,--output", gen_out, "Instance file (default stdout)");

    // solve-exact
    auto* ex = app.add_subcommand("solve-exact", "Branch and bound over precedence decisions")
                   ->fallthrough();
    std::string ex_in, ex_sched, ex_report;
    ex->add_option("-i,--instance", ex_in)->required();
    ex->add_option("--schedule-out", ex_sched, "Schedule file (default stdout)");
    ex->add_option("--report-out", ex_report, "Report file (default stderr)");

    // solve-heuristic
    auto* he = app.add_subcommand("solve-heuristic", "Population heuristic with allocation")
                   ->fallthrough();
    std::string he_in, he_sol, he_trace;
    double he_weight = 1.0;
    he->add_option("-i,--instance", he_in)->required();
    he->add_option("--solution-out", he_sol, "Solution file (default stdout)");
    he->add_option("--trace-out", he_trace, "Convergence trace CSV");
    he->add_option("--allocation-weight", he_weight, "Weight of the allocation objective");

    // allocate
    auto* al = app.add_subcommand("allocate", "Exact freight allocation for a schedule")
                   ->fallthrough();
    std::string al_in, al_sched, al_out;
    al->add_option("-i,--instance", al_in)->required();
    al->add_option("-s,--schedule", al_sched)->required();
    al->add_option("-o,--output", al_out, "Allocation file (default stdout)");

    // validate
    auto* va = app.add_subcommand("validate", "Check a schedule (and allocation)")->fallthrough();
    std::string va_in, va_sched, va_alloc;
    va->add_option("-i,--instance", va_in)->required();
    va->add_option("-s,--schedule", va_sched)->required();
    va->add_option("-a,--allocation", va_alloc);

    // gantt
    auto* ga = app.add_subcommand("gantt", "Render a schedule chart")->fallthrough();
    std::string ga_in, ga_sched, ga_out, ga_chart = "time";
    ga->add_option("-i,--instance", ga_in)->required();
    ga->add_option("-s,--schedule", ga_sched)->required();
    ga->add_option("-o,--output", ga_out, "Chart file (default stdout)");
    ga->add_option("--chart", ga_chart, "time or location")
        ->check(CLI::IsMember({"time", "location"}));

    // bench
    auto* be = app.add_subcommand("bench", "Exact versus heuristic comparison")->fallthrough();
    BenchConfig bench;
    std::string be_dir = ".";
    be->add_option("--sizes", bench.sizes)->delimiter(',');
    be->add_option("--seeds", bench.seeds)->delimiter(',');
    be->add_option("--segments", bench.segments)->check(CLI::PositiveNumber);
    be->add_option("--freights", bench.freights);
    be->add_option("--jobs", bench.jobs)->check(CLI::PositiveNumber);
    be->add_option("--opt-trace-trains", bench.opt_trace_trains, "0 skips the OPT traces");
    be->add_option("--out-dir", be_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const ObjectiveKind kind = objective_from_string(g.objective);

        if (*gen) {
            const auto inst = generate(gen_segments, gen_dep, gen_ret, gen_freights, g.seed);
            emit(gen_out, dump(to_json(inst)));
            return kOk;
        }

        if (*ex) {
            const auto inst = load_instance(ex_in);
            const auto rep = solve_scheduling_exact(inst, kind, g.budget());
            emit(ex_sched, dump(to_json(inst, rep.schedule)));
            const std::string report = dump(to_json(rep));
            if (ex_report.empty()) {
                std::fputs(report.c_str(), stderr);
            } else {
                write_file(ex_report, report);
            }
            return rep.status == SolveStatus::Optimal ? kOk : kBudget;
        }

        if (*he) {
            const auto inst = load_instance(he_in);
            auto params = g.heuristic();
            params.allocation_weight = he_weight;
            const auto res = run_heuristic(inst, params);
            emit(he_sol, dump(to_json(inst, res.best)));
            if (!he_trace.empty()) write_file(he_trace, trace_csv(res.trace));
            return kOk;
        }

        if (*al) {
            const auto inst = load_instance(al_in);
            const auto sched = load_schedule(inst, al_sched);
            if (auto vs = validate_schedule(inst, sched); !vs.empty()) {
                std::cerr << al_sched << ": schedule is infeasible\n";
                for (const auto& v : vs) std::cerr << "  " << describe(inst, v) << "\n";
                return kInvalid;
            }
            const auto res = solve_allocation_exact(inst, sched);
            json j = to_json(inst, res.alloc);
            j["objective"] = res.objective;
            emit(al_out, dump(j));
            return kOk;
        }

        if (*va) {
            const auto inst = load_instance(va_in);
            const auto sched = load_schedule(inst, va_sched);
            const auto vs = validate_schedule(inst, sched);
            json report = {{"schedule", violations_to_json(inst, vs)}};
            bool clean = vs.empty();
            if (!va_alloc.empty()) {
                const auto alloc = load_allocation(inst, va_alloc);
                const auto avs = check_allocation(inst, sched, alloc);
                report["allocation"] = allocation_violations_to_json(inst, avs);
                clean = clean && avs.empty();
            }
            report["clean"] = clean;
            emit("", dump(report));
            return clean ? kOk : kInvalid;
        }

        if (*ga) {
            const auto inst = load_instance(ga_in);
            const auto sched = load_schedule(inst, ga_sched);
            std::string fmt_name = g.format;
            if (fmt_name.empty()) {
                fmt_name = std::filesystem::path(ga_out).extension() == ".txt" ? "text" : "svg";
            }
            const ChartFormat format = chart_format_from_string(fmt_name);
            try {
                emit(ga_out, ga_chart == "time" ? render_train_time(inst, sched, format)
                                                : render_train_location(inst, sched, format));
            } catch (const InfeasibleScheduleError& e) {
                std::cerr << e.what();
                return kInvalid;
            }
            return kOk;
        }

        if (*be) {
            bench.heuristic = g.heuristic();
            bench.exact_budget = g.budget();
            const auto res = bench_compare(bench);
            const std::filesystem::path dir(be_dir);
            std::filesystem::create_directories(dir);
            write_file((dir / "bench.csv").string(), bench_csv(res.rows));
            write_file((dir / "bench.txt").string(), bench_table(res.rows));
            if (!res.trace_opt.empty()) {
                write_file((dir / "trace_opt.csv").string(), trace_csv(res.trace_opt));
                write_file((dir / "trace_no_opt.csv").string(), trace_csv(res.trace_no_opt));
            }
            std::cout << bench_table(res.rows);
            return kOk;
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
