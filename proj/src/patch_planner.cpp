#include "dynres/patch_planner.hpp"

#include <stdexcept>
#include <string>

namespace dynres {

ResolutionPlan build_plan(ImageSize original, GridRatio grid, BaseCell cell,
                          ResizeMode mode, bool include_thumbnail) {
    const FitScore fit = score_fit(original, grid, cell); // validates inputs

    ResolutionPlan plan;
    plan.original = original;
    plan.grid = grid;
    plan.cell = cell;
    plan.target = target_size(grid, cell);
    plan.scale = fit.scale;
    plan.resize_mode = mode;

    if (mode == ResizeMode::fit_and_pad) {
        plan.resized = {fit.scaled_width, fit.scaled_height};
        const std::int64_t pad_w = plan.target.width - plan.resized.width;
        const std::int64_t pad_h = plan.target.height - plan.resized.height;
        plan.pad.left = pad_w / 2;
        plan.pad.right = pad_w - plan.pad.left;
        plan.pad.top = pad_h / 2;
        plan.pad.bottom = pad_h - plan.pad.top;
    } else {
        plan.resized = plan.target;
    }

    plan.local_patches.reserve(std::size_t(grid.cells()));
    for (int r = 0; r < grid.n; ++r) {
        for (int c = 0; c < grid.m; ++c) {
            plan.local_patches.push_back(
                {c * cell.side, r * cell.side, cell.side, cell.side});
        }
    }
    if (include_thumbnail) {
        plan.thumbnail = ImageSize{cell.side, cell.side};
    }
    return plan;
}

TokenBudget token_budget(GridRatio grid, const TokenRates& rates) {
    require_valid(grid);
    if (rates.tokens_per_patch_raw <= 0 || rates.tokens_per_patch_downsampled <= 0) {
        throw std::invalid_argument("token rates must be positive");
    }
    TokenBudget budget;
    budget.tokens_per_patch_raw = rates.tokens_per_patch_raw;
    budget.tokens_per_patch_downsampled = rates.tokens_per_patch_downsampled;
    budget.patch_count = grid.cells() + (rates.include_thumbnail ? 1 : 0);
    budget.total_raw = budget.patch_count * rates.tokens_per_patch_raw;
    budget.total_downsampled = budget.patch_count * rates.tokens_per_patch_downsampled;
    return budget;
}

namespace {

nlohmann::json size_json(ImageSize s) {
    return {{"width", s.width}, {"height", s.height}};
}

ImageSize size_from_json(const nlohmann::json& j) {
    return {j.at("width").get<std::int64_t>(), j.at("height").get<std::int64_t>()};
}

} // namespace

nlohmann::json to_json(const ResolutionPlan& plan) {
    nlohmann::json j{
        {"original", size_json(plan.original)},
        {"grid", {{"m", plan.grid.m}, {"n", plan.grid.n}}},
        {"cell_side", plan.cell.side},
        {"target", size_json(plan.target)},
        {"scale", plan.scale},
        {"resized", size_json(plan.resized)},
        {"pad",
         {{"left", plan.pad.left},
          {"top", plan.pad.top},
          {"right", plan.pad.right},
          {"bottom", plan.pad.bottom}}},
        {"resize_mode",
         plan.resize_mode == ResizeMode::fit_and_pad ? "fit_and_pad" : "stretch"},
    };
    auto& patches = j["local_patches"] = nlohmann::json::array();
    for (const PatchRect& p : plan.local_patches) {
        patches.push_back({{"x", p.x}, {"y", p.y}, {"w", p.w}, {"h", p.h}});
    }
    j["thumbnail"] = plan.thumbnail ? size_json(*plan.thumbnail) : nlohmann::json();
    return j;
}

nlohmann::json to_json(const TokenBudget& budget) {
    return {
        {"tokens_per_patch_raw", budget.tokens_per_patch_raw},
        {"tokens_per_patch_downsampled", budget.tokens_per_patch_downsampled},
        {"patch_count", budget.patch_count},
        {"total_raw", budget.total_raw},
        {"total_downsampled", budget.total_downsampled},
    };
}

ResolutionPlan plan_from_json(const nlohmann::json& j) {
    ResolutionPlan plan;
    plan.original = size_from_json(j.at("original"));
    plan.grid = {j.at("grid").at("m").get<int>(), j.at("grid").at("n").get<int>()};
    plan.cell = BaseCell{j.at("cell_side").get<std::int64_t>()};
    plan.target = size_from_json(j.at("target"));
    plan.scale = j.at("scale").get<double>();
    plan.resized = size_from_json(j.at("resized"));
    const auto& pad = j.at("pad");
    plan.pad = {pad.at("left").get<std::int64_t>(), pad.at("top").get<std::int64_t>(),
                pad.at("right").get<std::int64_t>(),
                pad.at("bottom").get<std::int64_t>()};
    const std::string mode = j.at("resize_mode").get<std::string>();
    if (mode == "fit_and_pad") {
        plan.resize_mode = ResizeMode::fit_and_pad;
    } else if (mode == "stretch") {
        plan.resize_mode = ResizeMode::stretch;
    } else {
        throw std::invalid_argument("unknown resize_mode \"" + mode + "\"");
    }
    for (const auto& p : j.at("local_patches")) {
        plan.local_patches.push_back(
            {p.at("x").get<std::int64_t>(), p.at("y").get<std::int64_t>(),
             p.at("w").get<std::int64_t>(), p.at("h").get<std::int64_t>()});
    }
    if (j.contains("thumbnail") && !j.at("thumbnail").is_null()) {
        plan.thumbnail = size_from_json(j.at("thumbnail"));
    }
    return plan;
}

} // namespace dynres
