#include "dynres/downsampler.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace dynres {

namespace {

void require_shape(std::int64_t rows, std::int64_t cols, std::int64_t dim) {
    if (rows <= 0 || cols <= 0 || dim <= 0) {
        throw std::invalid_argument("token grid shape must be positive, got " +
                                    std::to_string(rows) + "x" + std::to_string(cols) +
                                    " dim " + std::to_string(dim));
    }
}

void require_consistent(const TokenGrid& grid) {
    require_shape(grid.rows, grid.cols, grid.dim);
    const auto expected = std::size_t(grid.rows * grid.cols * grid.dim);
    if (grid.data.size() != expected) {
        throw std::invalid_argument("token grid data has " +
                                    std::to_string(grid.data.size()) +
                                    " entries, expected " + std::to_string(expected));
    }
}

void require_compatible(const TokenGrid& grid, const DownsampleSpec& spec) {
    require_consistent(grid);
    if (spec.factor != 2) {
        throw std::invalid_argument("downsample factor is fixed at 2");
    }
    if (spec.in_dim != grid.dim) {
        throw std::invalid_argument("spec expects dim " + std::to_string(spec.in_dim) +
                                    ", grid has dim " + std::to_string(grid.dim));
    }
    if (spec.out_dim <= 0) {
        throw std::invalid_argument("output dim must be positive");
    }
    if (spec.weight.size() != std::size_t(spec.out_dim * 4 * spec.in_dim)) {
        throw std::invalid_argument("weight matrix must be out_dim x 4*in_dim");
    }
    if (spec.bias.size() != std::size_t(spec.out_dim)) {
        throw std::invalid_argument("bias must have out_dim entries");
    }
}

// Uniform in [-1, 1) from a pinned engine so seeded data is identical on
// every platform (avoids std::uniform_real_distribution, which is not).
class UnitRng {
public:
    explicit UnitRng(std::uint64_t seed) : engine_(seed) {}
    double next() {
        const double u = double(engine_() >> 11) * 0x1.0p-53; // [0, 1)
        return 2.0 * u - 1.0;
    }

private:
    std::mt19937_64 engine_;
};

constexpr std::int64_t ceil_half(std::int64_t v) { return (v + 1) / 2; }

} // namespace

TokenGrid make_grid(std::int64_t rows, std::int64_t cols, std::int64_t dim) {
    require_shape(rows, cols, dim);
    TokenGrid grid{rows, cols, dim, {}};
    grid.data.assign(std::size_t(rows * cols * dim), 0.0);
    return grid;
}

TokenGrid seeded_grid(std::int64_t rows, std::int64_t cols, std::int64_t dim,
                      std::uint64_t seed) {
    TokenGrid grid = make_grid(rows, cols, dim);
    UnitRng rng(seed);
    for (double& v : grid.data) v = rng.next();
    return grid;
}

DownsampleSpec DownsampleSpec::averaging(std::int64_t dim) {
    if (dim <= 0) throw std::invalid_argument("dim must be positive");
    DownsampleSpec spec;
    spec.in_dim = dim;
    spec.out_dim = dim;
    spec.weight.assign(std::size_t(dim * 4 * dim), 0.0);
    spec.bias.assign(std::size_t(dim), 0.0);
    for (std::int64_t o = 0; o < dim; ++o) {
        for (int q = 0; q < 4; ++q) {
            spec.weight[std::size_t(o * 4 * dim + q * dim + o)] = 0.25;
        }
    }
    return spec;
}

DownsampleSpec DownsampleSpec::seeded(std::int64_t in_dim, std::int64_t out_dim,
                                      std::uint64_t seed) {
    if (in_dim <= 0 || out_dim <= 0) {
        throw std::invalid_argument("dims must be positive");
    }
    DownsampleSpec spec;
    spec.in_dim = in_dim;
    spec.out_dim = out_dim;
    UnitRng rng(seed);
    spec.weight.resize(std::size_t(out_dim * 4 * in_dim));
    for (double& v : spec.weight) v = rng.next();
    spec.bias.resize(std::size_t(out_dim));
    for (double& v : spec.bias) v = rng.next();
    return spec;
}

TokenGrid downsample(const TokenGrid& grid, const DownsampleSpec& spec) {
    require_compatible(grid, spec);

    TokenGrid out = make_grid(ceil_half(grid.rows), ceil_half(grid.cols), spec.out_dim);
    const std::int64_t dim = grid.dim;

    for (std::int64_t r = 0; r < out.rows; ++r) {
        for (std::int64_t c = 0; c < out.cols; ++c) {
            double* dst = out.token(r, c);
            for (std::int64_t o = 0; o < spec.out_dim; ++o) {
                const double* w = spec.weight.data() + std::size_t(o * 4 * dim);
                double acc = spec.bias[std::size_t(o)];
                for (int q = 0; q < 4; ++q) {
                    const std::int64_t rr = 2 * r + q / 2;
                    const std::int64_t cc = 2 * c + q % 2;
                    if (rr >= grid.rows || cc >= grid.cols) continue; // zero pad
                    const double* src = grid.token(rr, cc);
                    for (std::int64_t k = 0; k < dim; ++k) {
                        acc += w[q * dim + k] * src[k];
                    }
                }
                dst[o] = acc;
            }
        }
    }
    return out;
}

TokenGrid downsample_reference(const TokenGrid& grid, const DownsampleSpec& spec) {
    require_compatible(grid, spec);

    TokenGrid out = make_grid(ceil_half(grid.rows), ceil_half(grid.cols), spec.out_dim);
    const std::int64_t dim = grid.dim;
    std::vector<double> concat(std::size_t(4 * dim));

    for (std::int64_t r = 0; r < out.rows; ++r) {
        for (std::int64_t c = 0; c < out.cols; ++c) {
            // Assemble the explicit 2x2 concatenation, zeros past the edges.
            std::fill(concat.begin(), concat.end(), 0.0);
            for (int q = 0; q < 4; ++q) {
                const std::int64_t rr = 2 * r + q / 2;
                const std::int64_t cc = 2 * c + q % 2;
                if (rr >= grid.rows || cc >= grid.cols) continue;
                const double* src = grid.token(rr, cc);
                std::copy(src, src + dim, concat.begin() + std::ptrdiff_t(q * dim));
            }
            double* dst = out.token(r, c);
            for (std::int64_t o = 0; o < spec.out_dim; ++o) {
                double acc = spec.bias[std::size_t(o)];
                for (std::int64_t j = 0; j < 4 * dim; ++j) {
                    acc += spec.weight[std::size_t(o * 4 * dim + j)] * concat[std::size_t(j)];
                }
                dst[o] = acc;
            }
        }
    }
    return out;
}

} // namespace dynres
