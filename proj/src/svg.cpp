#include "dynres/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dynres::svg {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += ch;
        }
    }
    return out;
}

void open_svg(std::string& out, double width, double height, const std::string& title) {
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
           num(height) + "\" font-family=\"sans-serif\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + num(width / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" fill=\"#222\">" +
           escape(title) + "</text>\n";
}

// A readable round step for ~5 axis ticks.
double tick_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= mult * mag) return mult * mag;
    }
    return 10.0 * mag;
}

} // namespace

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::pair<std::string, double>>& bars) {
    const double width = 640, height = 400;
    const double left = 80, right = 24, top = 48, bottom = 56;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::string out;
    open_svg(out, width, height, title);

    double max_v = 0.0;
    std::size_t min_idx = 0;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        max_v = std::max(max_v, bars[i].second);
        if (bars[i].second < bars[min_idx].second) min_idx = i;
    }
    if (max_v <= 0.0) max_v = 1.0;
    const double y_max = max_v * 1.1;

    // Axes and ticks.
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(top + plot_h) + "\" stroke=\"#444\"/>\n";
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" +
           num(left + plot_w) + "\" y2=\"" + num(top + plot_h) + "\" stroke=\"#444\"/>\n";
    const double step = tick_step(y_max);
    for (double v = 0.0; v <= y_max + 1e-9; v += step) {
        const double y = top + plot_h - plot_h * v / y_max;
        out += "<line x1=\"" + num(left - 4) + "\" y1=\"" + num(y) + "\" x2=\"" +
               num(left) + "\" y2=\"" + num(y) + "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) +
               "\" text-anchor=\"end\" font-size=\"11\" fill=\"#444\">" + num(v) +
               "</text>\n";
    }
    out += "<text x=\"18\" y=\"" + num(top + plot_h / 2) +
           "\" font-size=\"12\" fill=\"#444\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           num(top + plot_h / 2) + ")\">" + escape(y_label) + "</text>\n";

    if (!bars.empty()) {
        const double slot = plot_w / double(bars.size());
        const double bar_w = slot * 0.6;
        for (std::size_t i = 0; i < bars.size(); ++i) {
            const double h = plot_h * bars[i].second / y_max;
            const double x = left + slot * double(i) + (slot - bar_w) / 2;
            const double y = top + plot_h - h;
            const char* fill = i == min_idx ? "#2f7d32" : "#4a7dbd";
            out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
                   num(bar_w) + "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
            out += "<text x=\"" + num(x + bar_w / 2) + "\" y=\"" + num(y - 6) +
                   "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#222\">" +
                   num(bars[i].second) + "</text>\n";
            out += "<text x=\"" + num(x + bar_w / 2) + "\" y=\"" +
                   num(top + plot_h + 18) +
                   "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\">" +
                   escape(bars[i].first) + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

std::string gantt(const std::string& title, const Schedule& schedule) {
    const char* lane_names[] = {"cpu", "npu", "user"};
    const char* lane_fills[] = {"#4a7dbd", "#c77c34", "#5e9e62"};

    bool lane_used[3] = {false, false, false};
    for (const ScheduleEvent& e : schedule.events) {
        lane_used[int(e.resource)] = true;
    }
    int lane_count = 0;
    int lane_row[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        if (lane_used[i]) lane_row[i] = lane_count++;
    }

    const double left = 80, right = 30, top = 48;
    const double lane_h = 44, lane_gap = 14;
    const double plot_w = 760;
    const double width = left + plot_w + right;
    const double plot_h = lane_count * lane_h + std::max(lane_count - 1, 0) * lane_gap;
    const double height = top + plot_h + 60;
    const double span = std::max(schedule.makespan_ms, 1e-9);

    std::string out;
    open_svg(out, width, height, title);

    for (int i = 0; i < 3; ++i) {
        if (!lane_used[i]) continue;
        const double y = top + lane_row[i] * (lane_h + lane_gap);
        out += "<text x=\"" + num(left - 10) + "\" y=\"" + num(y + lane_h / 2 + 4) +
               "\" text-anchor=\"end\" font-size=\"12\" fill=\"#222\">" +
               lane_names[i] + "</text>\n";
        out += "<rect x=\"" + num(left) + "\" y=\"" + num(y) + "\" width=\"" +
               num(plot_w) + "\" height=\"" + num(lane_h) +
               "\" fill=\"#f2f2f2\" stroke=\"#ddd\"/>\n";
    }

    for (const ScheduleEvent& e : schedule.events) {
        const double y = top + lane_row[int(e.resource)] * (lane_h + lane_gap);
        const double x = left + plot_w * e.start_ms / span;
        const double w = std::max(plot_w * (e.end_ms - e.start_ms) / span, 1.0);
        out += "<rect x=\"" + num(x) + "\" y=\"" + num(y + 6) + "\" width=\"" + num(w) +
               "\" height=\"" + num(lane_h - 12) + "\" fill=\"" +
               lane_fills[int(e.resource)] + "\" fill-opacity=\"0.85\"/>\n";
        if (w > 60) {
            out += "<text x=\"" + num(x + w / 2) + "\" y=\"" + num(y + lane_h / 2 + 4) +
                   "\" text-anchor=\"middle\" font-size=\"10\" fill=\"#fff\">" +
                   escape(e.stage) + "</text>\n";
        }
    }

    // Time axis.
    const double axis_y = top + plot_h + 12;
    out += "<line x1=\"" + num(left) + "\" y1=\"" + num(axis_y) + "\" x2=\"" +
           num(left + plot_w) + "\" y2=\"" + num(axis_y) + "\" stroke=\"#444\"/>\n";
    const double step = tick_step(span);
    for (double t = 0.0; t <= span + 1e-9; t += step) {
        const double x = left + plot_w * t / span;
        out += "<line x1=\"" + num(x) + "\" y1=\"" + num(axis_y) + "\" x2=\"" + num(x) +
               "\" y2=\"" + num(axis_y + 5) + "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(x) + "\" y=\"" + num(axis_y + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#444\">" + num(t) +
               "</text>\n";
    }
    out += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(axis_y + 34) +
           "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#444\">time (ms)</text>\n";
    out += "</svg>\n";
    return out;
}

} // namespace dynres::svg
