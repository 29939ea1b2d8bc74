#pragma once

#include "dynres/geometry.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dynres {

// How a candidate pool was generated; kept on the set (and copied into
// traces) so a trace alone identifies the run.
enum class PoolRule { explicit_list, grid_up_to, max_num };

struct CandidateSet {
    std::vector<GridRatio> ratios;
    BaseCell cell;
    PoolRule rule = PoolRule::explicit_list;
    int limit_m = 0;      // grid_up_to only
    int limit_n = 0;      // grid_up_to only
    int max_num_limit = 0; // max_num only: every ratio satisfies m*n <= limit

    // Explicit list; rejects duplicates and invalid ratios.
    static CandidateSet from_list(std::vector<GridRatio> ratios, BaseCell cell = {});
    // All grids 1:1 .. max_m:max_n.
    static CandidateSet grid_up_to(int max_m, int max_n, BaseCell cell = {});
    // All grids with m*n <= limit.
    static CandidateSet max_num(int limit, BaseCell cell = {});
};

// Reorder the pool by cell count descending; ties by |m-n| ascending, then m
// ascending. Ascending is the exact reverse. Both are total orders over
// distinct (m,n), hence deterministic.
CandidateSet enumerate_candidates_descending(const CandidateSet& set);
CandidateSet enumerate_candidates_ascending(const CandidateSet& set);

enum class ScanOrder { descending, ascending };

struct RelaxedParams {
    double alpha = 0.1;                       // in [0,1)
    ScanOrder order = ScanOrder::descending;  // ascending only for analysis modes
};

enum class MatchMethod { relaxed, llava_next, internvl };

// Which acceptance condition fired at a step: a clear improvement of the
// effective area, or a near-tie that reduced waste (for the aspect-distance
// matcher: a distance tie resolved toward the larger grid).
enum class AcceptRule { cond_improve, cond_near_tie, none };

struct MatchStep {
    GridRatio grid;
    FitScore fit;
    bool accepted = false;
    AcceptRule rule_fired = AcceptRule::none;
    // Threshold state after this step. Only accepted steps may change it.
    std::int64_t best_effective = 0;
    std::optional<std::int64_t> best_wasted; // empty = +infinity sentinel
    double aspect_diff = 0.0;                // |W/H - m/n|, the internvl criterion
};

struct MatchTrace {
    MatchMethod method = MatchMethod::relaxed;
    ImageSize image;
    BaseCell cell;
    double alpha = 0.0;                      // relaxed only
    int max_num = 0;                         // internvl only
    ScanOrder order = ScanOrder::descending; // relaxed only; others are fixed
    std::vector<MatchStep> steps;            // in scan order
    GridRatio selected;
    // True when no step was accepted (possible only for the relaxed matcher
    // on degenerate inputs where every candidate scores zero effective area);
    // `selected` is then the first candidate in scan order with minimal waste.
    bool fallback_used = false;
};

// Relaxed threshold matching: scan the ordered candidates, accept a grid when
// it clearly improves the effective area, or when it is within the alpha band
// of the best and strictly reduces waste; each accept moves both thresholds.
MatchTrace match_relaxed(ImageSize image, const CandidateSet& set,
                         RelaxedParams params = {});

// Classic best-fit scan: maximize effective area, then minimize waste;
// remaining ties keep the earliest candidate in descending order.
MatchTrace match_llava_next(ImageSize image, const CandidateSet& set);

// Aspect-distance matching over the pool {m*n <= max_num}, scanned by cell
// count ascending then m ascending: minimize |W/H - m/n|; an exact distance
// tie moves to the tied grid only when the original image area exceeds half
// of that grid's target area. The selected grid is meant for direct resizing
// (stretch), not fit-and-pad.
MatchTrace match_internvl(ImageSize image, int max_num, BaseCell cell = {});

struct ReplayResult {
    bool ok = true;
    // First divergent step index (== steps.size() for selection-stage
    // mismatches) and a human-readable reason; meaningful when !ok.
    std::size_t divergent_step = 0;
    std::string detail;
    explicit operator bool() const { return ok; }
};

// Independently recompute every fit and re-apply the matcher's update rule
// over the recorded candidate sequence; report the first divergence between
// the recomputation and the recorded flags, rules, thresholds, or selection.
ReplayResult replay_trace(const MatchTrace& trace, ImageSize image);
inline ReplayResult replay_trace(const MatchTrace& trace) {
    return replay_trace(trace, trace.image);
}

} // namespace dynres
