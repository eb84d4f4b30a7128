/**
 * @file preprocess.cpp
 * @brief Dataset loading, resizing, contrast stretch and opponent conversion.
 */

#include <hmax/preprocess.h>
#include <hmax/error.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>

namespace fs = std::filesystem;

namespace hmax {

std::size_t LabeledImageSet::total_images() const {
    std::size_t n = 0;
    for (const auto& c : images) n += c.size();
    return n;
}

RgbImage read_image(const fs::path& path) {
    cv::Mat bgr;
    try {
        bgr = cv::imread(path.string(), cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
    } catch (const cv::Exception& e) {
        throw Error("cannot decode " + path.string() + ": " + e.what());
    }
    if (bgr.empty() || bgr.depth() != CV_8U) throw Error("cannot decode " + path.string());
    RgbImage img(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            img.at(y, x, 0) = row[x][2] / 255.0;
            img.at(y, x, 1) = row[x][1] / 255.0;
            img.at(y, x, 2) = row[x][0] / 255.0;
        }
    }
    return img;
}

void write_png(const fs::path& path, const RgbImage& image) {
    const auto bytes = image.ToBytes();
    cv::Mat bgr(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width(); ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * image.width() + x) * 3;
            row[x] = cv::Vec3b(bytes[i + 2], bytes[i + 1], bytes[i]);
        }
    }
    if (!cv::imwrite(path.string(), bgr)) throw Error("cannot write " + path.string());
}

LabeledImageSet load_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error("dataset directory not found: " + root.string());

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && entry.path().filename().string().front() != '.')
            class_dirs.push_back(entry.path());
    }
    std::sort(class_dirs.begin(), class_dirs.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    if (class_dirs.empty()) throw Error("dataset has no class folders: " + root.string());

    LabeledImageSet set;
    for (const auto& dir : class_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().filename().string().front() != '.')
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());

        std::vector<LabeledImage> images;
        for (const auto& file : files) {
            try {
                images.push_back({file.filename().string(), read_image(file)});
            } catch (const Error& e) {
                std::cerr << "warning: skipping " << file.string() << "\n";
                set.skipped.push_back({file.string(), e.what()});
            }
        }
        const std::string name = dir.filename().string();
        if (images.empty()) throw Error("class has no images: " + name);
        set.classes.push_back(name);
        set.images.push_back(std::move(images));
    }
    return set;
}

RgbImage resize_max_side(const RgbImage& image, int max_side) {
    if (max_side < 32) throw Error("max_side must be >= 32");
    if (image.empty()) throw Error("empty raster");
    const int w = image.width();
    const int h = image.height();
    const int longest = std::max(w, h);
    if (longest <= max_side) return image;

    const double scale = static_cast<double>(max_side) / longest;
    const int nw = w >= h ? max_side : std::max(1, static_cast<int>(std::lround(w * scale)));
    const int nh = h > w ? max_side : std::max(1, static_cast<int>(std::lround(h * scale)));
    const double sx = static_cast<double>(w) / nw;
    const double sy = static_cast<double>(h) / nh;

    RgbImage out(nw, nh);
    for (int y = 0; y < nh; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, h - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double ty = fy - y0;
        for (int x = 0; x < nw; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, w - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double tx = fx - x0;
            for (int ch = 0; ch < 3; ++ch) {
                const double top = image.at(y0, x0, ch) * (1 - tx) + image.at(y0, x1, ch) * tx;
                const double bottom = image.at(y1, x0, ch) * (1 - tx) + image.at(y1, x1, ch) * tx;
                out.at(y, x, ch) = top * (1 - ty) + bottom * ty;
            }
        }
    }
    return out;
}

RgbImage contrast_stretch(const RgbImage& image) {
    if (image.empty()) throw Error("empty raster");
    const auto& d = image.data();
    const std::size_t n = d.size() / 3;

    double vmin = INFINITY;
    double vmax = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::max({d[3 * i], d[3 * i + 1], d[3 * i + 2]});
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (!(vmax > vmin)) return image;

    RgbImage out = image;
    auto& o = out.data();
    const double range = vmax - vmin;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::max({d[3 * i], d[3 * i + 1], d[3 * i + 2]});
        if (v <= 0.0) continue;
        const double gain = ((v - vmin) / range) / v;
        for (int ch = 0; ch < 3; ++ch) o[3 * i + ch] = d[3 * i + ch] * gain;
    }
    return out;
}

OpponentImage to_opponent(const RgbImage& image, bool greyscale_only) {
    if (image.empty()) throw Error("empty raster");
    OpponentImage out;
    out.width = image.width();
    out.height = image.height();
    for (auto& p : out.channels) p = Plane(out.height, out.width);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const double r = image.at(y, x, 0);
            const double g = image.at(y, x, 1);
            const double b = image.at(y, x, 2);
            out.channels[kIntensity](y, x) = (r + g + b) / 3.0;
            if (!greyscale_only) {
                out.channels[kRedGreen](y, x) = r - g;
                out.channels[kYellowBlue](y, x) = (r + g) / 2.0 - b;
            }
        }
    }
    return out;
}

}  // namespace hmax
