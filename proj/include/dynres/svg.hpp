#pragma once

#include "dynres/sched_sim.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dynres::svg {

// Vertical bar chart of (label, value) pairs; the smallest value is
// highlighted. Self-contained SVG document.
std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::pair<std::string, double>>& bars);

// Lane-per-resource Gantt view of a schedule.
std::string gantt(const std::string& title, const Schedule& schedule);

} // namespace dynres::svg
