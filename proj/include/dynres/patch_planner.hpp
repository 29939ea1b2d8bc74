#pragma once

#include "dynres/geometry.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace dynres {

enum class ResizeMode { fit_and_pad, stretch };

struct PadMargins {
    std::int64_t left = 0;
    std::int64_t top = 0;
    std::int64_t right = 0;
    std::int64_t bottom = 0;
    bool operator==(const PadMargins&) const = default;
};

// One tile in target coordinates.
struct PatchRect {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t w = 0;
    std::int64_t h = 0;
    bool operator==(const PatchRect&) const = default;
};

// Complete recipe for turning an image into encoder inputs: resize (either
// aspect-preserving with centered padding, or a direct stretch), cut the
// target into side x side local patches row-major, and optionally append the
// whole-image thumbnail as the final global patch.
struct ResolutionPlan {
    ImageSize original;
    GridRatio grid;
    BaseCell cell;
    ImageSize target;   // side*m x side*n
    double scale = 0.0; // proportional fit scale (informational under stretch)
    ImageSize resized;  // dimensions placed on the canvas before padding
    PadMargins pad;
    ResizeMode resize_mode = ResizeMode::fit_and_pad;
    std::vector<PatchRect> local_patches;     // row-major, exactly m*n tiles
    std::optional<ImageSize> thumbnail;       // side x side global patch
    bool operator==(const ResolutionPlan&) const = default;
};

struct TokenRates {
    std::int64_t tokens_per_patch_raw = 729;
    std::int64_t tokens_per_patch_downsampled = 196;
    bool include_thumbnail = true;
};

struct TokenBudget {
    std::int64_t tokens_per_patch_raw = 0;
    std::int64_t tokens_per_patch_downsampled = 0;
    std::int64_t patch_count = 0; // m*n locals, +1 when the thumbnail is kept
    std::int64_t total_raw = 0;
    std::int64_t total_downsampled = 0;
    bool operator==(const TokenBudget&) const = default;
};

// Padding splits evenly; an odd remainder goes to the right/bottom edge.
ResolutionPlan build_plan(ImageSize original, GridRatio grid, BaseCell cell = {},
                          ResizeMode mode = ResizeMode::fit_and_pad,
                          bool include_thumbnail = true);

TokenBudget token_budget(GridRatio grid, const TokenRates& rates = {});

nlohmann::json to_json(const ResolutionPlan& plan);
nlohmann::json to_json(const TokenBudget& budget);
ResolutionPlan plan_from_json(const nlohmann::json& j);

} // namespace dynres
