#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynres/matchers.hpp"

#include <random>
#include <stdexcept>
#include <vector>

using namespace dynres;

namespace {

std::vector<std::pair<int, int>> pairs(const CandidateSet& set) {
    std::vector<std::pair<int, int>> out;
    for (const GridRatio& g : set.ratios) out.emplace_back(g.m, g.n);
    return out;
}

} // namespace

TEST_CASE("descending enumeration orders by cells, then squareness, then m") {
    const CandidateSet ordered =
        enumerate_candidates_descending(CandidateSet::grid_up_to(3, 3));
    const std::vector<std::pair<int, int>> want = {
        {3, 3}, {2, 3}, {3, 2}, {2, 2}, {1, 3}, {3, 1}, {1, 2}, {2, 1}, {1, 1}};
    CHECK(pairs(ordered) == want);
}

TEST_CASE("ascending enumeration is the exact reverse") {
    const CandidateSet pool = CandidateSet::grid_up_to(3, 3);
    auto desc = pairs(enumerate_candidates_descending(pool));
    auto asc = pairs(enumerate_candidates_ascending(pool));
    std::reverse(desc.begin(), desc.end());
    CHECK(asc == desc);
}

TEST_CASE("explicit pools are reordered the same way") {
    const CandidateSet pool = CandidateSet::from_list({{2, 1}, {1, 2}});
    CHECK(pairs(enumerate_candidates_descending(pool)) ==
          std::vector<std::pair<int, int>>{{1, 2}, {2, 1}});
}

TEST_CASE("pool constructors validate their inputs") {
    CHECK_THROWS_AS(CandidateSet::from_list({}), std::invalid_argument);
    CHECK_THROWS_AS(CandidateSet::from_list({{1, 1}, {1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(CandidateSet::from_list({{0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(CandidateSet::grid_up_to(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(CandidateSet::max_num(0), std::invalid_argument);
}

TEST_CASE("max_num pools hold exactly the grids within the cell budget") {
    const CandidateSet pool = CandidateSet::max_num(6);
    CHECK(pool.ratios.size() == 14); // sum over m of floor(6/m)
    for (const GridRatio& g : pool.ratios) CHECK(g.cells() <= 6);
    CHECK(pool.rule == PoolRule::max_num);
    CHECK(pool.max_num_limit == 6);

    const CandidateSet grid = CandidateSet::grid_up_to(3, 3);
    CHECK(grid.ratios.size() == 9);
    CHECK(grid.rule == PoolRule::grid_up_to);
}

TEST_CASE("relaxed matcher selections on pinned shapes") {
    const CandidateSet grid33 = CandidateSet::grid_up_to(3, 3);
    CHECK(match_relaxed({394, 390}, grid33).selected == GridRatio{1, 1});
    CHECK(match_relaxed({380, 393}, grid33).selected == GridRatio{1, 1});
    CHECK(match_relaxed({500, 102}, grid33).selected == GridRatio{2, 1});
    CHECK(match_relaxed({380, 76}, CandidateSet::max_num(6)).selected ==
          GridRatio{1, 1});
}

TEST_CASE("relaxed scan walks the near-tie chain down to one cell") {
    // 394x390 is nearly square and smaller than a cell, so every grid covers
    // it after upscaling; the near-tie rule keeps trading equal coverage for
    // less padding until 1:1 wins. Only 3:2 is rejected: it ties 2:3 on both
    // coverage and waste, and ties must strictly reduce waste.
    const MatchTrace trace = match_relaxed({394, 390}, CandidateSet::grid_up_to(3, 3));
    REQUIRE(trace.steps.size() == 9);
    const std::vector<bool> accepted = {true, true, false, true, true,
                                        true, true, true,  true};
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        CAPTURE(i);
        CHECK(trace.steps[i].accepted == accepted[i]);
    }
    CHECK(trace.steps[0].rule_fired == AcceptRule::cond_improve);
    CHECK(trace.steps[1].rule_fired == AcceptRule::cond_near_tie);
    CHECK(trace.selected == GridRatio{1, 1});
    CHECK_FALSE(trace.fallback_used);
}

TEST_CASE("relaxed trace carries its full configuration") {
    const MatchTrace trace =
        match_relaxed({500, 102}, CandidateSet::grid_up_to(3, 3), {0.25});
    CHECK(trace.method == MatchMethod::relaxed);
    CHECK(trace.image == ImageSize{500, 102});
    CHECK(trace.cell == BaseCell{384});
    CHECK(trace.alpha == 0.25);
    CHECK(trace.order == ScanOrder::descending);
    CHECK(trace.steps.size() == 9);
}

TEST_CASE("alpha domain is [0,1)") {
    const CandidateSet pool = CandidateSet::grid_up_to(2, 2);
    CHECK_THROWS_AS(match_relaxed({100, 100}, pool, {-0.1}), std::invalid_argument);
    CHECK_THROWS_AS(match_relaxed({100, 100}, pool, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(match_relaxed({100, 100}, pool, {1.5}), std::invalid_argument);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(match_relaxed({100, 100}, pool, {nan}), std::invalid_argument);
    CHECK_NOTHROW(match_relaxed({100, 100}, pool, {0.0}));
    CHECK_NOTHROW(match_relaxed({100, 100}, pool, {0.999}));
}

TEST_CASE("classic matcher selections on pinned shapes") {
    const CandidateSet grid33 = CandidateSet::grid_up_to(3, 3);
    CHECK(match_llava_next({394, 390}, grid33).selected == GridRatio{2, 2});
    CHECK(match_llava_next({380, 393}, grid33).selected == GridRatio{1, 2});
    CHECK(match_llava_next({384, 384}, grid33).selected == GridRatio{1, 1});
}

TEST_CASE("aspect-distance matcher selections on pinned shapes") {
    CHECK(match_internvl({380, 76}, 6).selected == GridRatio{5, 1});
    CHECK(match_internvl({500, 102}, 9).selected == GridRatio{5, 1});
    CHECK(match_internvl({384, 384}, 9).selected == GridRatio{1, 1});
}

TEST_CASE("aspect-distance ties move to larger grids only past half coverage") {
    // 1:1, 2:2 and 3:3 are exact aspect ties for a square image. The tie
    // threshold compares the image area against half the *candidate's*
    // target area: 0.5 * 384^2 * 4 = 294912 and 0.5 * 384^2 * 9 = 663552.
    CHECK(match_internvl({384, 384}, 9).selected == GridRatio{1, 1});
    CHECK(match_internvl({800, 800}, 9).selected == GridRatio{2, 2});
    CHECK(match_internvl({1000, 1000}, 9).selected == GridRatio{3, 3});

    // The rejected tie at 2:2 for the small square must be recorded as such.
    const MatchTrace trace = match_internvl({384, 384}, 9);
    bool saw_rejected_tie = false;
    for (const MatchStep& s : trace.steps) {
        if (s.grid == GridRatio{2, 2}) {
            CHECK_FALSE(s.accepted);
            saw_rejected_tie = true;
        }
    }
    CHECK(saw_rejected_tie);
}

TEST_CASE("degenerate thin images fall back to the least-wasteful grid") {
    // 1x2000 scales to a zero-width slice in every grid: nothing is ever
    // accepted and the fallback picks the single cell, which is also what
    // the classic matcher selects.
    const CandidateSet grid33 = CandidateSet::grid_up_to(3, 3);
    const MatchTrace trace = match_relaxed({1, 2000}, grid33);
    for (const MatchStep& s : trace.steps) {
        CHECK_FALSE(s.accepted);
        CHECK(s.fit.effective_area == 0);
    }
    CHECK(trace.fallback_used);
    CHECK(trace.selected == GridRatio{1, 1});
    CHECK(match_llava_next({1, 2000}, grid33).selected == trace.selected);
    CHECK(replay_trace(trace));
}

TEST_CASE("every matcher's trace replays cleanly") {
    const CandidateSet grid33 = CandidateSet::grid_up_to(3, 3);
    const ImageSize shapes[] = {{394, 390}, {380, 76}, {380, 393}, {500, 102},
                                {384, 384}, {1, 2000}, {4096, 17}};
    for (const ImageSize& image : shapes) {
        CAPTURE(image.width);
        CAPTURE(image.height);
        const ReplayResult relaxed = replay_trace(match_relaxed(image, grid33));
        CHECK_MESSAGE(relaxed.ok, relaxed.detail);
        const ReplayResult classic = replay_trace(match_llava_next(image, grid33));
        CHECK_MESSAGE(classic.ok, classic.detail);
        const ReplayResult aspect = replay_trace(match_internvl(image, 9));
        CHECK_MESSAGE(aspect.ok, aspect.detail);
    }
}

TEST_CASE("replay pinpoints a tampered step") {
    MatchTrace trace = match_relaxed({394, 390}, CandidateSet::grid_up_to(3, 3));

    SUBCASE("flipped accept flag") {
        trace.steps[2].accepted = true;
        trace.steps[2].rule_fired = AcceptRule::cond_near_tie;
        const ReplayResult r = replay_trace(trace);
        REQUIRE_FALSE(r.ok);
        CHECK(r.divergent_step == 2);
    }
    SUBCASE("corrupted fit score") {
        trace.steps[4].fit.effective_area += 1;
        const ReplayResult r = replay_trace(trace);
        REQUIRE_FALSE(r.ok);
        CHECK(r.divergent_step == 4);
    }
    SUBCASE("corrupted running threshold") {
        trace.steps[7].best_effective += 1;
        const ReplayResult r = replay_trace(trace);
        REQUIRE_FALSE(r.ok);
        CHECK(r.divergent_step == 7);
    }
    SUBCASE("wrong final selection") {
        trace.selected = {3, 3};
        const ReplayResult r = replay_trace(trace);
        REQUIRE_FALSE(r.ok);
        CHECK(r.divergent_step == trace.steps.size());
    }
    SUBCASE("fallback flag forged") {
        trace.fallback_used = true;
        const ReplayResult r = replay_trace(trace);
        REQUIRE_FALSE(r.ok);
        CHECK(r.divergent_step == trace.steps.size());
    }
    SUBCASE("different image") {
        const ReplayResult r = replay_trace(trace, {395, 390});
        CHECK_FALSE(r.ok);
    }
}

TEST_CASE("replay validates traces from the other matchers too") {
    MatchTrace classic = match_llava_next({394, 390}, CandidateSet::grid_up_to(3, 3));
    classic.steps[1].accepted = !classic.steps[1].accepted;
    CHECK_FALSE(replay_trace(classic).ok);

    MatchTrace aspect = match_internvl({500, 102}, 9);
    aspect.selected = {9, 1};
    const ReplayResult r = replay_trace(aspect);
    REQUIRE_FALSE(r.ok);
    CHECK(r.divergent_step == aspect.steps.size());
}

TEST_CASE("zero-alpha ascending scan agrees with the classic matcher") {
    // With no tolerance band the relaxed rule only accepts strict coverage
    // improvements; scanning small grids first then makes it pick the same
    // grid as the classic best-fit scan. Randomized cross-check.
    const CandidateSet grid33 = CandidateSet::grid_up_to(3, 3);
    std::mt19937_64 rng(20260817);
    std::uniform_int_distribution<std::int64_t> side(1, 4096);
    for (int i = 0; i < 2000; ++i) {
        const ImageSize image{side(rng), side(rng)};
        CAPTURE(image.width);
        CAPTURE(image.height);
        const MatchTrace ours = match_relaxed(image, grid33, {0.0, ScanOrder::ascending});
        const MatchTrace classic = match_llava_next(image, grid33);
        REQUIRE(ours.selected == classic.selected);
    }
}

TEST_CASE("widening the tolerance can only shrink or keep the selected grid") {
    // On the pinned shapes a larger alpha trades coverage for fewer cells.
    const CandidateSet grid33 = CandidateSet::grid_up_to(3, 3);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> side(1, 2048);
    for (int i = 0; i < 500; ++i) {
        const ImageSize image{side(rng), side(rng)};
        const auto tight = match_relaxed(image, grid33, {0.0}).selected.cells();
        const auto loose = match_relaxed(image, grid33, {0.1}).selected.cells();
        CAPTURE(image.width);
        CAPTURE(image.height);
        CHECK(loose <= tight);
    }
}

TEST_CASE("matching is deterministic across repeated runs") {
    const CandidateSet pool = CandidateSet::max_num(9);
    const MatchTrace a = match_relaxed({1234, 567}, pool);
    const MatchTrace b = match_relaxed({1234, 567}, pool);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        CHECK(a.steps[i].grid == b.steps[i].grid);
        CHECK(a.steps[i].fit == b.steps[i].fit);
        CHECK(a.steps[i].accepted == b.steps[i].accepted);
        CHECK(a.steps[i].best_effective == b.steps[i].best_effective);
        CHECK(a.steps[i].best_wasted == b.steps[i].best_wasted);
    }
    CHECK(a.selected == b.selected);
}

TEST_CASE("custom cell sides flow through the matchers") {
    const CandidateSet pool = CandidateSet::grid_up_to(2, 2, BaseCell{100});
    const MatchTrace trace = match_relaxed({100, 100}, pool);
    CHECK(trace.cell == BaseCell{100});
    CHECK(trace.selected == GridRatio{1, 1});
    CHECK(replay_trace(trace));

    const MatchTrace aspect = match_internvl({500, 100}, 6, BaseCell{100});
    CHECK(aspect.selected == GridRatio{5, 1});
    CHECK(replay_trace(aspect));
}
