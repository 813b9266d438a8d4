#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "railsched/core.hpp"
#include "railsched/validate.hpp"

namespace railsched {

enum class ChartFormat : std::uint8_t { Svg, Text };

inline ChartFormat chart_format_from_string(const std::string& s) {
    if (s == "svg") return ChartFormat::Svg;
    if (s == "text" || s == "txt") return ChartFormat::Text;
    throw std::invalid_argument("unknown chart format '" + s + "'");
}

/// Thrown when asked to draw a schedule that breaks a constraint.
class InfeasibleScheduleError : public std::runtime_error {
public:
    InfeasibleScheduleError(std::string report, std::vector<Violation> violations)
        : std::runtime_error("refusing to render an infeasible schedule:\n" + report),
          violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Wait beyond the required stop that counts as an interruption.
inline constexpr double kInterruptionThreshold = 1e-6;

namespace detail {

inline void require_feasible(const Instance& inst, const Schedule& sched) {
    auto vs = validate_schedule(inst, sched);
    if (vs.empty()) return;
    std::string report;
    for (const auto& v : vs) report += describe(inst, v) + "\n";
    throw InfeasibleScheduleError(report, std::move(vs));
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline double schedule_end(const Schedule& s) {
    double end = 0.0;
    for (const auto& t : s.trains) {
        for (double v : t.arr) end = std::max(end, v);
    }
    return end;
}

// Colors per role; the class names are the stable interface.
inline constexpr const char* kStyle =
    ".traverse-dep{fill:#3366cc}.traverse-ret{fill:#dc3912}"
    ".unload-dep{fill:#9ecae1}.load-dep{fill:#6baed6}.dwell-dep{fill:#c6dbef}"
    ".unload-ret{fill:#fdae6b}.load-ret{fill:#fd8d3c}.dwell-ret{fill:#fdd0a2}"
    ".interruption{fill:none;stroke:#e6b800;stroke-width:2}"
    ".segment-divider{stroke:#2ca02c;stroke-width:1}"
    ".axis{stroke:#444;stroke-width:1}.label{font:12px monospace;fill:#222}"
    ".time{font:10px monospace;fill:#222}"
    ".arrow-dep-departure,.arrow-dep-arrival{stroke:#3366cc;fill:#3366cc;stroke-width:2}"
    ".arrow-ret-departure,.arrow-ret-arrival{stroke:#dc3912;fill:#dc3912;stroke-width:2}";

}  // namespace detail

/// Geometry of the train-time chart. An event at time t is drawn at
/// x = origin + t * time_scale; both values are written on the root element.
struct TimeChartLayout {
    double time_scale = 20.0;
    double origin = 120.0;
    double row_height = 30.0;
    double bar_height = 16.0;
    double top = 40.0;
};

/// One row per train with a bar per traversal, the required stop at each
/// intermediate station split into unload, load and dwell, a divider at
/// every segment boundary and an ellipse around every excess wait.
inline std::string render_train_time(const Instance& inst, const Schedule& sched, ChartFormat format,
                                     const TimeChartLayout& layout = {}) {
    detail::require_feasible(inst, sched);
    const std::size_t n = inst.segments();

    if (format == ChartFormat::Text) {
        std::string out = fmt::format("{:<10} {:<4} {:>3} {:>9} {:>9} {:>9}  {}\n", "train", "dir",
                                      "pd", "dep", "arr", "wait", "note");
        for (std::size_t t = 0; t < inst.trains.size(); ++t) {
            const auto& tr = inst.trains[t];
            const auto& tt = sched.trains[t];
            for (std::size_t k = 0; k < n; ++k) {
                std::string wait = "-";
                std::string note;
                if (k + 1 < n) {
                    const double w = tt.dep[k + 1] - tt.arr[k];
                    wait = fmt::format("{:.1f}", w);
                    if (w > tr.stop_time(k + 1) + kInterruptionThreshold) note = "interrupted";
                }
                out += fmt::format("{:<10} {:<4} {:>3} {:>9.1f} {:>9.1f} {:>9}  {}\n", tr.id,
                                   to_string(tr.direction), k + 1, tt.dep[k], tt.arr[k], wait, note);
            }
        }
        return out;
    }

    const double end = detail::schedule_end(sched);
    const double width = layout.origin + (std::ceil(end) + 1.0) * layout.time_scale + 20.0;
    const double height = layout.top + static_cast<double>(inst.trains.size()) * layout.row_height + 40.0;
    auto x = [&](double t) { return layout.origin + t * layout.time_scale; };

    std::string svg = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" "
        "height=\"{:.0f}\" data-time-scale=\"{:.6f}\" data-time-origin=\"{:.6f}\">\n"
        "<style>{}</style>\n",
        width, height, layout.time_scale, layout.origin, detail::kStyle);

    // Time axis with a tick per hour.
    const double axis_y = layout.top + static_cast<double>(inst.trains.size()) * layout.row_height;
    svg += fmt::format("<line class=\"axis\" x1=\"{:.6f}\" y1=\"{:.6f}\" x2=\"{:.6f}\" y2=\"{:.6f}\"/>\n",
                       x(0.0), axis_y, x(std::ceil(end)), axis_y);
    for (int h = 0; h <= static_cast<int>(std::ceil(end)); ++h) {
        svg += fmt::format("<text class=\"label\" x=\"{:.6f}\" y=\"{:.6f}\">{}</text>\n", x(h),
                           axis_y + 16.0, h);
    }

    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        const auto& tr = inst.trains[t];
        const auto& tt = sched.trains[t];
        const std::string dir = to_string(tr.direction);
        const std::string id = detail::xml_escape(tr.id);
        const double y = layout.top + static_cast<double>(t) * layout.row_height;
        const double yb = y + (layout.row_height - layout.bar_height) / 2.0;
        svg += fmt::format("<g class=\"train\" data-train=\"{}\" data-direction=\"{}\">\n", id, dir);
        svg += fmt::format("<text class=\"label\" x=\"4\" y=\"{:.6f}\">{} ({})</text>\n",
                           yb + layout.bar_height - 3.0, id, dir);
        for (std::size_t k = 0; k < n; ++k) {
            svg += fmt::format(
                "<rect class=\"traverse-{}\" data-segment=\"{}\" x=\"{:.6f}\" y=\"{:.6f}\" "
                "width=\"{:.6f}\" height=\"{:.6f}\"/>\n",
                dir, physical_segment(tr.direction, k + 1, n), x(tt.dep[k]), yb,
                (tt.arr[k] - tt.dep[k]) * layout.time_scale, layout.bar_height);
            svg += fmt::format(
                "<line class=\"segment-divider\" x1=\"{:.6f}\" y1=\"{:.6f}\" x2=\"{:.6f}\" "
                "y2=\"{:.6f}\"/>\n",
                x(tt.arr[k]), y + 2.0, x(tt.arr[k]), y + layout.row_height - 2.0);
            if (k + 1 == n) continue;
            double at = tt.arr[k];
            const std::pair<const char*, double> parts[] = {{"unload", tr.unload[k + 1]},
                                                            {"load", tr.load[k + 1]},
                                                            {"dwell", tr.dwell[k + 1]}};
            for (const auto& [role, span] : parts) {
                if (span <= 0.0) continue;
                svg += fmt::format(
                    "<rect class=\"{}-{}\" data-station=\"{}\" x=\"{:.6f}\" y=\"{:.6f}\" "
                    "width=\"{:.6f}\" height=\"{:.6f}\"/>\n",
                    role, dir, k + 1, x(at), yb, span * layout.time_scale, layout.bar_height);
                at += span;
            }
            const double wait = tt.dep[k + 1] - tt.arr[k];
            if (wait > tr.stop_time(k + 1) + kInterruptionThreshold) {
                const double cx = x((tt.arr[k] + tt.dep[k + 1]) / 2.0);
                svg += fmt::format(
                    "<ellipse class=\"interruption\" data-station=\"{}\" cx=\"{:.6f}\" "
                    "cy=\"{:.6f}\" rx=\"{:.6f}\" ry=\"{:.6f}\"/>\n",
                    k + 1, cx, y + layout.row_height / 2.0,
                    wait * layout.time_scale / 2.0 + 4.0, layout.row_height / 2.0);
            }
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

/// One band per physical segment, labelled with its name for both
/// directions, and per traversal a departure and an arrival arrow with the
/// event times written underneath.
inline std::string render_train_location(const Instance& inst, const Schedule& sched,
                                         ChartFormat format) {
    detail::require_feasible(inst, sched);
    const std::size_t n = inst.segments();
    auto band_name = [&](std::size_t seg) {
        return fmt::format("pd{} / pdr{}", seg, n + 1 - seg);
    };

    if (format == ChartFormat::Text) {
        std::string out;
        for (std::size_t seg = 1; seg <= n; ++seg) {
            out += fmt::format("segment {} ({})\n", seg, band_name(seg));
            for (std::size_t t = 0; t < inst.trains.size(); ++t) {
                const auto& tr = inst.trains[t];
                const std::size_t k = traversal_index(tr.direction, seg, n) - 1;
                out += fmt::format("  {:<10} {:<4} departs {:>9.1f}  arrives {:>9.1f}\n", tr.id,
                                   to_string(tr.direction), sched.trains[t].dep[k],
                                   sched.trains[t].arr[k]);
            }
        }
        return out;
    }

    constexpr double band = 160.0, left = 110.0, top = 40.0, row = 44.0;
    const double width = left + static_cast<double>(n) * band + 20.0;
    const double height = top + static_cast<double>(inst.trains.size()) * row + 20.0;
    std::string svg = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" "
        "height=\"{:.0f}\">\n<style>{}</style>\n",
        width, height, detail::kStyle);
    for (std::size_t seg = 1; seg <= n; ++seg) {
        const double x0 = left + static_cast<double>(seg - 1) * band;
        svg += fmt::format(
            "<g class=\"band\" data-segment=\"{}\"><line class=\"segment-divider\" x1=\"{:.6f}\" "
            "y1=\"{:.6f}\" x2=\"{:.6f}\" y2=\"{:.6f}\"/><text class=\"label\" x=\"{:.6f}\" "
            "y=\"{:.6f}\">{}</text></g>\n",
            seg, x0, top - 20.0, x0, height - 10.0, x0 + 8.0, top - 24.0, band_name(seg));
    }
    for (std::size_t t = 0; t < inst.trains.size(); ++t) {
        const auto& tr = inst.trains[t];
        const std::string dir = to_string(tr.direction);
        const std::string id = detail::xml_escape(tr.id);
        const double y = top + static_cast<double>(t) * row + 14.0;
        svg += fmt::format("<g class=\"train\" data-train=\"{}\" data-direction=\"{}\">\n", id, dir);
        svg += fmt::format("<text class=\"label\" x=\"4\" y=\"{:.6f}\">{} ({})</text>\n", y + 4.0,
                           id, dir);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t seg = physical_segment(tr.direction, k + 1, n);
            const double x0 = left + static_cast<double>(seg - 1) * band + 12.0;
            const double x1 = x0 + band - 24.0;
            const bool forward = tr.direction == Direction::Departing;
            const double from = forward ? x0 : x1;
            const double to = forward ? x1 : x0;
            const double tip = forward ? 6.0 : -6.0;
            svg += fmt::format(
                "<path class=\"arrow-{}-departure\" data-segment=\"{}\" d=\"M{:.6f},{:.6f} "
                "L{:.6f},{:.6f} L{:.6f},{:.6f} Z\"/>\n",
                dir, seg, from, y - 6.0, from, y + 6.0, from + tip, y);
            svg += fmt::format(
                "<path class=\"arrow-{}-arrival\" data-segment=\"{}\" d=\"M{:.6f},{:.6f} "
                "L{:.6f},{:.6f} M{:.6f},{:.6f} L{:.6f},{:.6f} L{:.6f},{:.6f}\"/>\n",
                dir, seg, from + tip, y, to, y, to - tip, y - 5.0, to, y, to - tip, y + 5.0);
            svg += fmt::format(
                "<text class=\"time\" data-event=\"departure\" x=\"{:.6f}\" y=\"{:.6f}\">{:.1f}"
                "</text>\n",
                forward ? from : from - 24.0, y + 18.0, sched.trains[t].dep[k]);
            svg += fmt::format(
                "<text class=\"time\" data-event=\"arrival\" x=\"{:.6f}\" y=\"{:.6f}\">{:.1f}"
                "</text>\n",
                forward ? to - 24.0 : to, y + 18.0, sched.trains[t].arr[k]);
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace railsched
