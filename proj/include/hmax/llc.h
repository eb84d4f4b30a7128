/**
 * @file llc.h
 * @brief S2 layer: template sampling and locality-constrained linear coding.
 *
 * Each 4x4 C1 window (flattened across all planes, plane-major) is conditioned
 * like an S1 patch, its k templates with the largest dot product are selected,
 * and the code solves the ridge problem min ||x - Dc||^2 + lambda ||c||^2 over
 * those k templates. There is no sum-to-one constraint on c.
 */
#pragma once

#include <hmax/conditioning.h>
#include <hmax/s1c1.h>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hmax {

inline constexpr int kTemplateSide = 4;

/// Where a template was cut from: index into the stack list handed to the sampler.
struct WindowOrigin {
    int stack = 0;
    int row = 0;
    int col = 0;
};

struct TemplateDictionary {
    int p = 0;
    int dim = 0;  ///< 16 * number of C1 planes
    std::uint64_t seed = 0;
    std::vector<double> weights;        ///< p * dim, template-major
    std::vector<WindowOrigin> origins;  ///< empty for dictionaries read from disk

    std::span<const double> at(int t) const {
        return {weights.data() + static_cast<std::size_t>(t) * dim, static_cast<std::size_t>(dim)};
    }
};

struct LLCParams {
    int k = 20;
    double lambda = 0.25;
    WhiteningParams whitening;

    void validate(int p) const;
};

/// Indices ascending; exact zeros are not stored.
struct SparseCode {
    std::vector<int> indices;
    std::vector<double> coefficients;
};

struct S2CodeMap {
    int rows = 0;
    int cols = 0;
    std::vector<SparseCode> cells;  ///< row-major

    const SparseCode& at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
};

/// 4x4 window at (row, col) flattened plane-major: index = plane*16 + dr*4 + dc.
std::vector<double> flatten_window(const C1Stack& stack, int row, int col);

/// Draws p windows uniformly over every valid 4x4 position of every stack and
/// fully whitens them. Constant windows are redrawn up to 100 times before
/// being kept as zero templates.
TemplateDictionary sample_templates(std::span<const C1Stack* const> stacks, int p, std::uint64_t seed);
TemplateDictionary sample_templates(std::span<const C1Stack> stacks, int p, std::uint64_t seed);

/// k largest dot products against `patch`, ties to the lower index, returned ascending.
std::vector<int> knn_select(std::span<const double> patch, const TemplateDictionary& dict, int k);

/// Solves (D^T D + lambda I) c = D^T x over the selected templates.
std::vector<double> solve_code(std::span<const double> patch, std::span<const int> basis,
                               const TemplateDictionary& dict, double lambda);

S2CodeMap s2_encode(const C1Stack& stack, const TemplateDictionary& dict, const LLCParams& params);

/// Layout: "HDIC", u32 version, u32 p, u32 dim, u64 seed, then p*dim float32.
/// Reading re-applies full whitening in double precision, so loaded templates
/// satisfy the zero-mean/unit-norm invariant to 1e-9 again.
void write_dictionary(const std::filesystem::path& path, const TemplateDictionary& dict);
TemplateDictionary read_dictionary(const std::filesystem::path& path);

}  // namespace hmax
