#pragma once

#include <cstdint>
#include <vector>

namespace dynres {

// Dense rows x cols grid of feature vectors, row-major, features contiguous.
struct TokenGrid {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::int64_t dim = 0;
    std::vector<double> data; // rows * cols * dim entries

    const double* token(std::int64_t r, std::int64_t c) const {
        return data.data() + std::size_t((r * cols + c) * dim);
    }
    double* token(std::int64_t r, std::int64_t c) {
        return data.data() + std::size_t((r * cols + c) * dim);
    }
};

// Zero-initialized grid of the given shape; throws on non-positive dims.
TokenGrid make_grid(std::int64_t rows, std::int64_t cols, std::int64_t dim);
// Deterministic pseudo-random grid with features in [-1, 1).
TokenGrid seeded_grid(std::int64_t rows, std::int64_t cols, std::int64_t dim,
                      std::uint64_t seed);

enum class PadRule { zero_pad_right_bottom };

// 2x2 token fusion: each output token is a linear map of the concatenation of
// a 2x2 input block (row-major block order); missing tokens past the right or
// bottom edge contribute zero vectors. Output shape is the ceil-halved input
// shape. The fusion factor is fixed at 2.
struct DownsampleSpec {
    int factor = 2;
    PadRule pad_rule = PadRule::zero_pad_right_bottom;
    std::int64_t in_dim = 0;
    std::int64_t out_dim = 0;
    std::vector<double> weight; // out_dim rows x (4 * in_dim) columns, row-major
    std::vector<double> bias;   // out_dim entries

    // Identity-like fuse: out_dim == dim, each output feature averages that
    // feature across the four block positions; zero bias.
    static DownsampleSpec averaging(std::int64_t dim);
    // Deterministic pseudo-random weights/bias in [-1, 1).
    static DownsampleSpec seeded(std::int64_t in_dim, std::int64_t out_dim,
                                 std::uint64_t seed);
};

TokenGrid downsample(const TokenGrid& grid, const DownsampleSpec& spec);

// Brute-force reference: materializes every 2x2 concatenation explicitly and
// applies the linear map to the assembled vector. Kept deliberately separate
// from downsample() as the second route for equivalence checks.
TokenGrid downsample_reference(const TokenGrid& grid, const DownsampleSpec& spec);

} // namespace dynres
