#include <hmax/synthetic.h>
#include <hmax/error.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>

namespace hmax {

namespace {

// Shapes live in a unit frame: object coordinates u, v in [-1, 1], v up.
using Shape = std::function<bool(double u, double v)>;

bool bar(double u, double v, double cu, double cv, double half_len, double half_width) {
    return std::abs(u - cu) <= half_len && std::abs(v - cv) <= half_width;
}

bool disc(double u, double v, double cu, double cv, double radius) {
    return (u - cu) * (u - cu) + (v - cv) * (v - cv) <= radius * radius;
}

// A class is a fixed arrangement of parts in the object frame.
struct Part {
    Shape inside;
    double du = 0.0, dv = 0.0;
};

struct Family {
    std::string name;
    std::vector<Part> parts;
};

bool hbar(double u, double v) { return bar(u, v, 0, 0, 0.38, 0.09); }
bool vbar(double u, double v) { return bar(v, u, 0, 0, 0.38, 0.09); }
bool dot(double u, double v) { return disc(u, v, 0, 0, 0.22); }
bool ring(double u, double v) { const double r = std::hypot(u, v); return r <= 0.26 && r >= 0.15; }
bool plus(double u, double v) { return bar(u, v, 0, 0, 0.26, 0.07) || bar(v, u, 0, 0, 0.26, 0.07); }
bool tri(double u, double v) { return v >= -0.22 && v <= 0.28 && std::abs(u) <= (0.28 - v) * 0.6; }
bool square(double u, double v) {
    const double m = std::max(std::abs(u), std::abs(v));
    return m <= 0.24 && m >= 0.15;
}

const std::vector<Family>& families() {
    static const std::vector<Family> list = {
        {"horizontal-bars", {{hbar, 0, 0.3}, {hbar, 0, -0.3}}},
        {"vertical-bars", {{vbar, -0.3, 0}, {vbar, 0.3, 0}}},
        {"dot-over-bar", {{dot, 0, 0.4}, {hbar, 0, -0.4}}},
        {"bar-over-dot", {{hbar, 0, 0.4}, {dot, 0, -0.4}}},
        {"ring-left-of-bar", {{ring, -0.4, 0}, {vbar, 0.4, 0}}},
        {"bar-left-of-ring", {{vbar, -0.4, 0}, {ring, 0.4, 0}}},
        {"plus-over-triangle", {{plus, 0, 0.4}, {tri, 0, -0.4}}},
        {"triangle-over-plus", {{tri, 0, 0.4}, {plus, 0, -0.4}}},
        {"square-diagonal", {{square, -0.35, 0.35}, {dot, 0.35, -0.35}}},
        {"square-antidiagonal", {{dot, -0.35, 0.35}, {square, 0.35, -0.35}}},
        {"ring-triple", {{ring, -0.45, -0.3}, {ring, 0.45, -0.3}, {ring, 0, 0.4}}},
        {"plus-pair", {{plus, -0.4, 0}, {plus, 0.4, 0}}},
    };
    return list;
}

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

struct Stamp {
    Shape inside;
    double cx, cy, scale, cos_r, sin_r;
    std::array<double, 3> delta;  // added to the background where covered
};

Shape random_clutter(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int kind = static_cast<int>(unit(rng) * 3.0);
    if (kind == 0) return [](double u, double v) { return bar(u, v, 0, 0, 0.9, 0.15); };
    if (kind == 1) return [](double u, double v) { return disc(u, v, 0, 0, 0.5); };
    return [](double u, double v) { const double r = std::hypot(u, v); return r <= 0.7 && r >= 0.45; };
}

Stamp make_stamp(Shape inside, double cx, double cy, double scale, double rot, double contrast,
                 std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double polarity = unit(rng) < 0.5 ? -1.0 : 1.0;
    Stamp st{std::move(inside), cx, cy, scale, std::cos(rot), std::sin(rot), {}};
    for (double& d : st.delta) d = polarity * contrast + 0.15 * (unit(rng) - 0.5);
    return st;
}

double coverage(const Stamp& st, int x, int y) {
    constexpr int kSuper = 3;
    if (std::abs(x + 0.5 - st.cx) > 1.5 * st.scale + 2 || std::abs(st.cy - y - 0.5) > 1.5 * st.scale + 2) return 0.0;
    int hits = 0;
    for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
            const double px = x + (sx + 0.5) / kSuper - st.cx;
            const double py = st.cy - (y + (sy + 0.5) / kSuper);
            const double u = (st.cos_r * px + st.sin_r * py) / st.scale;
            const double v = (-st.sin_r * px + st.cos_r * py) / st.scale;
            if (st.inside(u, v)) ++hits;
        }
    }
    return static_cast<double>(hits) / (kSuper * kSuper);
}

RgbImage render(const Family& family, double extra_rotation, int side, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    constexpr double kDeg = std::numbers::pi / 180.0;

    const double bg_level = 0.2 + 0.6 * unit(rng);
    std::array<double, 3> bg_tint;
    for (double& t : bg_tint) t = 0.08 * (unit(rng) - 0.5);
    const double grad_angle = 2.0 * std::numbers::pi * unit(rng);
    const double grad_strength = 0.2 * unit(rng);
    const double noise_sigma = unit(rng) < 0.7 ? 0.004 * unit(rng) : 0.01 + 0.03 * unit(rng);

    // Clutter first, then the class object on top.
    std::vector<Stamp> stamps;
    const int n_clutter = static_cast<int>(unit(rng) * 4.0);
    for (int i = 0; i < n_clutter; ++i) {
        stamps.push_back(make_stamp(random_clutter(rng), side * unit(rng), side * unit(rng),
                                    side * (0.05 + 0.07 * unit(rng)), 2.0 * std::numbers::pi * unit(rng),
                                    0.05 + 0.15 * unit(rng), rng));
    }
    const double ocx = side * (0.5 + 0.2 * (unit(rng) - 0.5));
    const double ocy = side * (0.5 + 0.2 * (unit(rng) - 0.5));
    const double oscale = side * (0.3 + 0.1 * unit(rng));
    const double orot = extra_rotation + (unit(rng) - 0.5) * 20.0 * kDeg;
    const Stamp object = make_stamp(nullptr, 0, 0, 0, orot, 0.1 + 0.25 * unit(rng), rng);
    for (const Part& part : family.parts) {
        // Part offsets rotate with the object; v points up, rows grow down.
        const double px = object.cos_r * part.du - object.sin_r * part.dv;
        const double py = object.sin_r * part.du + object.cos_r * part.dv;
        Stamp st = object;
        st.inside = part.inside;
        st.cx = ocx + oscale * px;
        st.cy = ocy - oscale * py;
        st.scale = oscale;
        stamps.push_back(std::move(st));
    }

    RgbImage img(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double nx = (x - side / 2.0) / side;
            const double ny = (y - side / 2.0) / side;
            const double light = grad_strength * (std::cos(grad_angle) * nx + std::sin(grad_angle) * ny);
            std::array<double, 3> px;
            for (int ch = 0; ch < 3; ++ch) px[ch] = bg_level + bg_tint[ch] + light;
            for (const Stamp& st : stamps) {
                const double cov = coverage(st, x, y);
                if (cov == 0.0) continue;
                for (int ch = 0; ch < 3; ++ch) {
                    const double target = bg_level + bg_tint[ch] + light + st.delta[ch];
                    px[ch] += cov * (target - px[ch]);
                }
            }
            for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = quantize(px[ch] + noise_sigma * noise(rng));
        }
    }
    return img;
}

}  // namespace

const std::vector<std::string>& synthetic_family_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& f : families()) out.push_back(f.name);
        return out;
    }();
    return names;
}

LabeledImageSet generate_synthetic_dataset(int n_classes, int per_class, int image_side, std::uint64_t seed) {
    if (n_classes < 2) throw Error("synthetic dataset needs at least 2 classes");
    if (per_class < 1) throw Error("per_class must be positive");
    if (image_side < 16) throw Error("image_side must be >= 16");

    const auto& fams = families();
    LabeledImageSet set;
    std::mt19937_64 rng(seed);
    for (int c = 0; c < n_classes; ++c) {
        const auto& fam = fams[static_cast<std::size_t>(c) % fams.size()];
        const int wrap = c / static_cast<int>(fams.size());
        const double extra = wrap * 15.0 * std::numbers::pi / 180.0;

        char name[96];
        std::snprintf(name, sizeof name, "%02d-%s%s", c, fam.name.c_str(), wrap ? ("-r" + std::to_string(wrap)).c_str() : "");
        set.classes.emplace_back(name);
        std::vector<LabeledImage> images;
        for (int i = 0; i < per_class; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "img%04d.png", i);
            images.push_back({id, render(fam, extra, image_side, rng)});
        }
        set.images.push_back(std::move(images));
    }
    return set;
}

LabeledImageSet generate_synthetic_dataset(const SyntheticSpec& spec) {
    return generate_synthetic_dataset(spec.n_classes, spec.per_class, spec.image_side, spec.seed);
}

void write_dataset(const std::filesystem::path& root, const LabeledImageSet& set) {
    for (std::size_t c = 0; c < set.classes.size(); ++c) {
        const auto dir = root / set.classes[c];
        std::filesystem::create_directories(dir);
        for (const auto& img : set.images[c]) write_png(dir / img.id, img.image);
    }
}

}  // namespace hmax
