#pragma once

#include <cstdint>

namespace dynres {

// Pixel dimensions of a source image. Operations require both sides > 0.
struct ImageSize {
    std::int64_t width = 0;
    std::int64_t height = 0;

    constexpr std::int64_t area() const { return width * height; }
    constexpr double aspect() const { return double(width) / double(height); }
    bool operator==(const ImageSize&) const = default;
};

// Tiling grid: m columns by n rows of base cells.
struct GridRatio {
    int m = 1;
    int n = 1;

    constexpr std::int64_t cells() const { return std::int64_t(m) * n; }
    constexpr double aspect() const { return double(m) / double(n); }
    bool operator==(const GridRatio&) const = default;
};

// Square base cell the target canvas is built from.
struct BaseCell {
    std::int64_t side = 384;
    bool operator==(const BaseCell&) const = default;
};

constexpr ImageSize target_size(GridRatio grid, BaseCell cell) {
    return {cell.side * grid.m, cell.side * grid.n};
}

// Outcome of proportionally fitting an image into a grid canvas.
// effective_area counts source pixels still represented after the fit, capped
// at the source area so upscaling never counts synthesized pixels.
// wasted_area is the rest of the canvas. scaled_width/height are the fitted
// dimensions before padding (truncated, not rounded).
struct FitScore {
    std::int64_t effective_area = 0;
    std::int64_t wasted_area = 0;
    double scale = 0.0;
    std::int64_t scaled_width = 0;
    std::int64_t scaled_height = 0;
    bool operator==(const FitScore&) const = default;
};

// Throw std::invalid_argument on non-positive dimensions.
void require_valid(ImageSize image);
void require_valid(GridRatio grid);
void require_valid(BaseCell cell);

// Score how well `image` fits into the canvas of `grid` x `cell`.
// The scale is a single double-precision ratio; truncation of the scaled
// dimensions is the only rounding step, so results are bit-reproducible.
FitScore score_fit(ImageSize image, GridRatio grid, BaseCell cell = {});

} // namespace dynres
