#include "dynres/matchers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <utility>

namespace dynres {

namespace {

void require_valid_set(const CandidateSet& set) {
    if (set.ratios.empty()) {
        throw std::invalid_argument("candidate set is empty");
    }
    require_valid(set.cell);
    for (const GridRatio& g : set.ratios) require_valid(g);
}

// Total order over distinct (m,n): cell count descending, |m-n| ascending,
// m ascending.
bool before_descending(GridRatio a, GridRatio b) {
    if (a.cells() != b.cells()) return a.cells() > b.cells();
    const int da = std::abs(a.m - a.n);
    const int db = std::abs(b.m - b.n);
    if (da != db) return da < db;
    return a.m < b.m;
}

// The aspect-distance matcher scans its pool by cell count, then m.
bool before_internvl(GridRatio a, GridRatio b) {
    if (a.cells() != b.cells()) return a.cells() < b.cells();
    return a.m < b.m;
}

double alpha_band(double alpha, std::int64_t best_effective) {
    return alpha * double(best_effective);
}

// Distance-tie condition: original area must exceed half the tied grid's
// target area for the larger grid to win.
bool internvl_tie_prefers(ImageSize image, GridRatio grid, BaseCell cell) {
    return double(image.area()) >
           0.5 * double(cell.side) * double(cell.side) * double(grid.m) * double(grid.n);
}

// First candidate (in recorded order) with minimal waste; used when the
// relaxed scan accepted nothing.
std::size_t min_waste_index(const std::vector<MatchStep>& steps) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (steps[i].fit.wasted_area < steps[best].fit.wasted_area) best = i;
    }
    return best;
}

} // namespace

CandidateSet CandidateSet::from_list(std::vector<GridRatio> ratios, BaseCell cell) {
    CandidateSet set;
    set.ratios = std::move(ratios);
    set.cell = cell;
    set.rule = PoolRule::explicit_list;
    require_valid_set(set);
    std::set<std::pair<int, int>> seen;
    for (const GridRatio& g : set.ratios) {
        if (!seen.insert({g.m, g.n}).second) {
            throw std::invalid_argument("duplicate ratio " + std::to_string(g.m) +
                                        ":" + std::to_string(g.n) +
                                        " in candidate set");
        }
    }
    return set;
}

CandidateSet CandidateSet::grid_up_to(int max_m, int max_n, BaseCell cell) {
    if (max_m < 1 || max_n < 1) {
        throw std::invalid_argument("grid limits must be >= 1");
    }
    CandidateSet set;
    set.cell = cell;
    set.rule = PoolRule::grid_up_to;
    set.limit_m = max_m;
    set.limit_n = max_n;
    for (int m = 1; m <= max_m; ++m) {
        for (int n = 1; n <= max_n; ++n) set.ratios.push_back({m, n});
    }
    require_valid_set(set);
    return set;
}

CandidateSet CandidateSet::max_num(int limit, BaseCell cell) {
    if (limit < 1) {
        throw std::invalid_argument("max_num limit must be >= 1");
    }
    CandidateSet set;
    set.cell = cell;
    set.rule = PoolRule::max_num;
    set.max_num_limit = limit;
    for (int m = 1; m <= limit; ++m) {
        for (int n = 1; m * n <= limit; ++n) set.ratios.push_back({m, n});
    }
    require_valid_set(set);
    return set;
}

CandidateSet enumerate_candidates_descending(const CandidateSet& set) {
    require_valid_set(set);
    CandidateSet ordered = set;
    std::sort(ordered.ratios.begin(), ordered.ratios.end(), before_descending);
    return ordered;
}

CandidateSet enumerate_candidates_ascending(const CandidateSet& set) {
    CandidateSet ordered = enumerate_candidates_descending(set);
    std::reverse(ordered.ratios.begin(), ordered.ratios.end());
    return ordered;
}

MatchTrace match_relaxed(ImageSize image, const CandidateSet& set, RelaxedParams params) {
    require_valid(image);
    require_valid_set(set);
    if (!(params.alpha >= 0.0) || params.alpha >= 1.0) {
        throw std::invalid_argument("alpha must lie in [0,1), got " +
                                    std::to_string(params.alpha));
    }

    const CandidateSet ordered = params.order == ScanOrder::descending
                                     ? enumerate_candidates_descending(set)
                                     : enumerate_candidates_ascending(set);

    MatchTrace trace;
    trace.method = MatchMethod::relaxed;
    trace.image = image;
    trace.cell = set.cell;
    trace.alpha = params.alpha;
    trace.order = params.order;

    std::int64_t best_effective = 0;
    std::optional<std::int64_t> best_wasted;
    std::optional<GridRatio> selected;

    for (const GridRatio& grid : ordered.ratios) {
        MatchStep step;
        step.grid = grid;
        step.fit = score_fit(image, grid, set.cell);
        step.aspect_diff = std::abs(image.aspect() - grid.aspect());

        const double band = alpha_band(params.alpha, best_effective);
        const double gap = double(step.fit.effective_area - best_effective);
        if (gap > band) {
            step.rule_fired = AcceptRule::cond_improve;
        } else if (-gap < band &&
                   (!best_wasted || step.fit.wasted_area < *best_wasted)) {
            step.rule_fired = AcceptRule::cond_near_tie;
        }
        if (step.rule_fired != AcceptRule::none) {
            step.accepted = true;
            best_effective = step.fit.effective_area;
            best_wasted = step.fit.wasted_area;
            selected = grid;
        }
        step.best_effective = best_effective;
        step.best_wasted = best_wasted;
        trace.steps.push_back(step);
    }

    if (selected) {
        trace.selected = *selected;
    } else {
        // Every candidate scored zero effective area (degenerate thin image);
        // fall back to the least-wasteful candidate so a grid is always
        // produced, matching the classic matcher's behavior on these inputs.
        trace.selected = trace.steps[min_waste_index(trace.steps)].grid;
        trace.fallback_used = true;
    }
    return trace;
}

MatchTrace match_llava_next(ImageSize image, const CandidateSet& set) {
    require_valid(image);
    require_valid_set(set);

    const CandidateSet ordered = enumerate_candidates_descending(set);

    MatchTrace trace;
    trace.method = MatchMethod::llava_next;
    trace.image = image;
    trace.cell = set.cell;

    std::int64_t best_effective = 0;
    std::optional<std::int64_t> best_wasted;
    std::optional<GridRatio> selected;

    for (const GridRatio& grid : ordered.ratios) {
        MatchStep step;
        step.grid = grid;
        step.fit = score_fit(image, grid, set.cell);
        step.aspect_diff = std::abs(image.aspect() - grid.aspect());

        if (step.fit.effective_area > best_effective) {
            step.rule_fired = AcceptRule::cond_improve;
        } else if (step.fit.effective_area == best_effective &&
                   (!best_wasted || step.fit.wasted_area < *best_wasted)) {
            step.rule_fired = AcceptRule::cond_near_tie;
        }
        if (step.rule_fired != AcceptRule::none) {
            step.accepted = true;
            best_effective = step.fit.effective_area;
            best_wasted = step.fit.wasted_area;
            selected = grid;
        }
        step.best_effective = best_effective;
        step.best_wasted = best_wasted;
        trace.steps.push_back(step);
    }

    // The first step always accepts (any effective area ties the zero
    // sentinel and beats unset waste), so a selection always exists.
    trace.selected = *selected;
    return trace;
}

MatchTrace match_internvl(ImageSize image, int max_num, BaseCell cell) {
    require_valid(image);
    CandidateSet pool = CandidateSet::max_num(max_num, cell);
    std::sort(pool.ratios.begin(), pool.ratios.end(), before_internvl);

    MatchTrace trace;
    trace.method = MatchMethod::internvl;
    trace.image = image;
    trace.cell = cell;
    trace.max_num = max_num;

    double best_diff = 0.0;
    bool have_best = false;
    std::int64_t best_effective = 0;
    std::optional<std::int64_t> best_wasted;
    std::optional<GridRatio> selected;

    for (const GridRatio& grid : pool.ratios) {
        MatchStep step;
        step.grid = grid;
        step.fit = score_fit(image, grid, cell);
        step.aspect_diff = std::abs(image.aspect() - grid.aspect());

        if (!have_best || step.aspect_diff < best_diff) {
            step.rule_fired = AcceptRule::cond_improve;
            best_diff = step.aspect_diff;
            have_best = true;
        } else if (step.aspect_diff == best_diff &&
                   internvl_tie_prefers(image, grid, cell)) {
            step.rule_fired = AcceptRule::cond_near_tie;
        }
        if (step.rule_fired != AcceptRule::none) {
            step.accepted = true;
            best_effective = step.fit.effective_area;
            best_wasted = step.fit.wasted_area;
            selected = grid;
        }
        step.best_effective = best_effective;
        step.best_wasted = best_wasted;
        trace.steps.push_back(step);
    }

    trace.selected = *selected; // first step always improves on "no best yet"
    return trace;
}

namespace {

ReplayResult mismatch(std::size_t step, std::string detail) {
    return {false, step, std::move(detail)};
}

std::string grid_str(GridRatio g) {
    return std::to_string(g.m) + ":" + std::to_string(g.n);
}

} // namespace

ReplayResult replay_trace(const MatchTrace& trace, ImageSize image) {
    if (trace.image != image) {
        return mismatch(0, "trace was recorded for a different image");
    }
    if (trace.steps.empty()) {
        return mismatch(0, "trace has no steps");
    }
    if (trace.method == MatchMethod::relaxed &&
        (!(trace.alpha >= 0.0) || trace.alpha >= 1.0)) {
        return mismatch(0, "trace alpha outside [0,1)");
    }

    std::int64_t best_effective = 0;
    std::optional<std::int64_t> best_wasted;
    double best_diff = 0.0;
    bool have_best = false;
    std::optional<GridRatio> selected;

    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const MatchStep& step = trace.steps[i];

        const FitScore fit = score_fit(image, step.grid, trace.cell);
        if (fit != step.fit) {
            return mismatch(i, "recorded fit for " + grid_str(step.grid) +
                                   " does not match recomputation");
        }
        const double diff = std::abs(image.aspect() - step.grid.aspect());
        if (diff != step.aspect_diff) {
            return mismatch(i, "recorded aspect distance does not match");
        }

        AcceptRule rule = AcceptRule::none;
        switch (trace.method) {
        case MatchMethod::relaxed: {
            const double band = alpha_band(trace.alpha, best_effective);
            const double gap = double(fit.effective_area - best_effective);
            if (gap > band) {
                rule = AcceptRule::cond_improve;
            } else if (-gap < band &&
                       (!best_wasted || fit.wasted_area < *best_wasted)) {
                rule = AcceptRule::cond_near_tie;
            }
            break;
        }
        case MatchMethod::llava_next: {
            if (fit.effective_area > best_effective) {
                rule = AcceptRule::cond_improve;
            } else if (fit.effective_area == best_effective &&
                       (!best_wasted || fit.wasted_area < *best_wasted)) {
                rule = AcceptRule::cond_near_tie;
            }
            break;
        }
        case MatchMethod::internvl: {
            if (!have_best || diff < best_diff) {
                rule = AcceptRule::cond_improve;
            } else if (diff == best_diff &&
                       internvl_tie_prefers(image, step.grid, trace.cell)) {
                rule = AcceptRule::cond_near_tie;
            }
            break;
        }
        }

        const bool accepted = rule != AcceptRule::none;
        if (accepted != step.accepted) {
            return mismatch(i, std::string("accepted flag should be ") +
                                   (accepted ? "true" : "false") + " at " +
                                   grid_str(step.grid));
        }
        if (rule != step.rule_fired) {
            return mismatch(i, "rule_fired does not match at " + grid_str(step.grid));
        }
        if (accepted) {
            best_effective = fit.effective_area;
            best_wasted = fit.wasted_area;
            selected = step.grid;
            if (trace.method == MatchMethod::internvl &&
                rule == AcceptRule::cond_improve) {
                best_diff = diff;
                have_best = true;
            }
        }
        if (step.best_effective != best_effective) {
            return mismatch(i, "running best_effective does not match");
        }
        if (step.best_wasted != best_wasted) {
            return mismatch(i, "running best_wasted does not match");
        }
    }

    const std::size_t selection_stage = trace.steps.size();
    if (selected) {
        if (trace.fallback_used) {
            return mismatch(selection_stage,
                            "fallback flag set although a step was accepted");
        }
        if (trace.selected != *selected) {
            return mismatch(selection_stage,
                            "selected grid should be " + grid_str(*selected));
        }
    } else {
        if (trace.method != MatchMethod::relaxed) {
            return mismatch(selection_stage,
                            "matcher cannot finish without an accepted step");
        }
        if (!trace.fallback_used) {
            return mismatch(selection_stage,
                            "no step accepted but fallback flag not set");
        }
        const GridRatio expect = trace.steps[min_waste_index(trace.steps)].grid;
        if (trace.selected != expect) {
            return mismatch(selection_stage,
                            "fallback selection should be " + grid_str(expect));
        }
    }
    return {};
}

} // namespace dynres
