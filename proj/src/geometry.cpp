#include "dynres/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dynres {

void require_valid(ImageSize image) {
    if (image.width <= 0 || image.height <= 0) {
        throw std::invalid_argument("image dimensions must be positive, got " +
                                    std::to_string(image.width) + "x" +
                                    std::to_string(image.height));
    }
}

void require_valid(GridRatio grid) {
    if (grid.m <= 0 || grid.n <= 0) {
        throw std::invalid_argument("grid ratio must be positive, got " +
                                    std::to_string(grid.m) + ":" +
                                    std::to_string(grid.n));
    }
}

void require_valid(BaseCell cell) {
    if (cell.side <= 0) {
        throw std::invalid_argument("base cell side must be positive, got " +
                                    std::to_string(cell.side));
    }
}

FitScore score_fit(ImageSize image, GridRatio grid, BaseCell cell) {
    require_valid(image);
    require_valid(grid);
    require_valid(cell);

    const ImageSize target = target_size(grid, cell);
    const double scale = std::min(double(target.width) / double(image.width),
                                  double(target.height) / double(image.height));
    // Truncate, don't round: the deployed preprocessing floors both sides.
    const auto scaled_w = std::int64_t(double(image.width) * scale);
    const auto scaled_h = std::int64_t(double(image.height) * scale);
    const std::int64_t visible = std::min(scaled_w * scaled_h, image.area());

    return {visible, target.area() - visible, scale, scaled_w, scaled_h};
}

} // namespace dynres
