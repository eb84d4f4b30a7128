/**
 * @file spm.h
 * @brief C2 layer: spatial-pyramid max pooling of S2 codes.
 *
 * Full mode emits 52 values per template, template-major:
 *   [0, 10)   pyramid A signed max over {1x1, 3x3}
 *   [10, 31)  pyramid B positive bins over {1x1, 2x2, 4x4}
 *   [31, 52)  pyramid B negative bins, same region order
 * Regions run coarse to fine, row-major within a level.
 */
#pragma once

#include <hmax/llc.h>

#include <string>
#include <vector>

namespace hmax {

/// Half-open cell rectangle [row0, row1) x [col0, col1).
struct Region {
    int row0 = 0, row1 = 0, col0 = 0, col1 = 0;

    bool empty() const { return row0 >= row1 || col0 >= col1; }
    bool contains(int r, int c) const { return r >= row0 && r < row1 && c >= col0 && c < col1; }
    bool operator==(const Region&) const = default;
};

enum class SpmMode {
    kFull,          ///< 52 per template
    kGlobalMax,     ///< 1x1 signed max, 1 per template
    kSpm3,          ///< {1x1, 2x2, 4x4} signed max, 21 per template
    kSpm3Polarity,  ///< {1x1, 2x2, 4x4} with polarity bins, 42 per template
};

SpmMode parse_spm_mode(const std::string& name);
std::string to_string(SpmMode mode);

inline constexpr int kPyramidARegions = 10;
inline constexpr int kPyramidBRegions = 21;
inline constexpr int kFeaturesPerTemplate = kPyramidARegions + 2 * kPyramidBRegions;

int features_per_template(SpmMode mode);

/// n x n tiling with boundaries at round(i * dim / n); regions may be empty.
std::vector<Region> partition_regions(int grid_h, int grid_w, int n);

/// Pyramid A, template-major: 10 signed maxima per template.
std::vector<double> pool_pyramid_a(const S2CodeMap& codes, int p);

/// Pyramid B, template-major: 21 positive bins then 21 negative bins per template.
std::vector<double> pool_pyramid_b(const S2CodeMap& codes, int p);

std::vector<double> c2_features(const S2CodeMap& codes, int p, SpmMode mode = SpmMode::kFull);

}  // namespace hmax
