#include <hmax/image.h>
#include <hmax/error.h>

#include <algorithm>
#include <cmath>

namespace hmax {

RgbImage RgbImage::FromBytes(int width, int height, std::span<const unsigned char> rgb) {
    if (width <= 0 || height <= 0) throw Error("empty raster");
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw Error("raster size mismatch");
    RgbImage img(width, height);
    std::transform(rgb.begin(), rgb.end(), img.data_.begin(),
                   [](unsigned char v) { return v / 255.0; });
    return img;
}

std::vector<unsigned char> RgbImage::ToBytes() const {
    std::vector<unsigned char> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](double v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    });
    return out;
}

}  // namespace hmax
