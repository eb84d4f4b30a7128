/**
 * @file image.h
 * @brief Raster containers shared by the pipeline stages.
 */
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hmax {

/// Row-major grid of doubles.
class Plane {
public:
    Plane() = default;
    Plane(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::span<double> row(int r) { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(int r) const { return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Plane&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Interleaved RGB raster with channel values normalized to [0, 1].
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height)
        : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 3, 0.0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }

    double& at(int y, int x, int ch) { return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + ch]; }
    double at(int y, int x, int ch) const { return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + ch]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const RgbImage&) const = default;

    /// Builds an image from 8-bit interleaved RGB triples.
    static RgbImage FromBytes(int width, int height, std::span<const unsigned char> rgb);
    /// Rounds channels back to 8-bit interleaved RGB.
    std::vector<unsigned char> ToBytes() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

enum OpponentChannel { kIntensity = 0, kRedGreen = 1, kYellowBlue = 2 };

/// Intensity, red-green and yellow-blue planes of equal size.
struct OpponentImage {
    int width = 0;
    int height = 0;
    std::array<Plane, 3> channels;
};

}  // namespace hmax
