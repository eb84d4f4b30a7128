/**
 * @file preprocess.h
 * @brief Dataset loading and the raster transforms applied before S1.
 *
 * Every image goes through resize_max_side, contrast_stretch and
 * to_opponent, in that order.
 */
#pragma once

#include <hmax/image.h>

#include <filesystem>
#include <string>
#include <vector>

namespace hmax {

struct LabeledImage {
    std::string id;  ///< file name, unique within its class
    RgbImage image;
};

struct SkipRecord {
    std::string path;
    std::string reason;
};

struct LabeledImageSet {
    std::vector<std::string> classes;               ///< sorted lexicographically
    std::vector<std::vector<LabeledImage>> images;  ///< images[c] belongs to classes[c]
    std::vector<SkipRecord> skipped;

    std::size_t total_images() const;
};

/// Reads `<root>/<class>/<image>`; undecodable files are skipped and recorded.
LabeledImageSet load_dataset(const std::filesystem::path& root);

/// Decodes an 8-bit PNG/JPEG (or anything else OpenCV reads). Throws on failure.
RgbImage read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);

/// Bilinear downscale so that the longer side equals max_side. Never upscales.
RgbImage resize_max_side(const RgbImage& image, int max_side);

/// Stretches V = max(R,G,B) onto [0, 1] and rescales each pixel's RGB by V'/V.
RgbImage contrast_stretch(const RgbImage& image);

/// intensity = (R+G+B)/3, RG = R-G, YB = (R+G)/2 - B.
/// With greyscale_only the two color planes are zero.
OpponentImage to_opponent(const RgbImage& image, bool greyscale_only = false);

}  // namespace hmax
