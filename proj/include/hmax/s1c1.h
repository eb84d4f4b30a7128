/**
 * @file s1c1.h
 * @brief First S-C stack: conditioned oriented filtering (S1) and local max pooling (C1).
 */
#pragma once

#include <hmax/conditioning.h>
#include <hmax/filterbank.h>
#include <hmax/image.h>

#include <filesystem>
#include <vector>

namespace hmax {

/// One nonnegative response plane per filter, valid-convolution sized.
struct S1Maps {
    int rows = 0;
    int cols = 0;
    std::vector<Plane> maps;
};

struct C1Stack {
    int rows = 0;
    int cols = 0;
    std::vector<Plane> planes;
    int pool_window = 12;
    int pool_stride = 6;

    int n_planes() const { return static_cast<int>(planes.size()); }
};

/// At each valid position, every channel window is conditioned, dotted with the
/// filter and rectified; S1 is the mean magnitude over the three channels, or
/// the intensity magnitude alone when greyscale_only is set.
S1Maps s1_convolve(const OpponentImage& img, const FilterBank& bank, const WhiteningParams& wp,
                   bool greyscale_only = false);

/// window x window max at offsets 0, stride, 2*stride, ...; partial windows dropped.
C1Stack c1_pool(const S1Maps& s1, int window = 12, int stride = 6);

/// Layout: "HC1S", u32 version, u32 n_planes, u32 rows, u32 cols, then planes
/// row-major as little-endian float32.
void write_c1_stack(const std::filesystem::path& path, const C1Stack& stack);
C1Stack read_c1_stack(const std::filesystem::path& path);

}  // namespace hmax
