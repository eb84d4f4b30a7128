/**
 * @file synthetic.h
 * @brief Parametric shape-family dataset used in place of Caltech-101 for CI.
 */
#pragma once

#include <hmax/config.h>
#include <hmax/preprocess.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hmax {

/// Family names in class order; class i uses family i modulo the list size,
/// rotated by a further 15 degrees per wrap-around.
const std::vector<std::string>& synthetic_family_names();

/// Each image draws one shape of its class family with random position,
/// scale, rotation, polarity and colors over a noisy, unevenly lit background,
/// quantized to 8 bits. Class 0 is horizontal bars and class 1 vertical bars.
LabeledImageSet generate_synthetic_dataset(int n_classes, int per_class, int image_side, std::uint64_t seed);
LabeledImageSet generate_synthetic_dataset(const SyntheticSpec& spec);

/// Writes `<root>/<class>/<id>.png`.
void write_dataset(const std::filesystem::path& root, const LabeledImageSet& set);

}  // namespace hmax
