#include <hmax/filterbank.h>
#include <hmax/conditioning.h>
#include <hmax/error.h>

#include <cmath>
#include <numbers>

namespace hmax {

namespace {

void check_shape(int size, double sigma) {
    if (size < 3 || size % 2 == 0) throw Error("kernel size must be odd and >= 3");
    if (!(sigma > 0.0)) throw Error("sigma must be positive");
}

// Samples f(x, y) on the integer grid centred on the kernel, y pointing up.
template <typename F>
std::vector<double> sample(int size, F&& f) {
    const int half = size / 2;
    std::vector<double> w(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            w[static_cast<std::size_t>(r) * size + c] = f(static_cast<double>(c - half),
                                                          static_cast<double>(half - r));
        }
    }
    return w;
}

void finish(std::vector<double>& w, int size) {
    const std::size_t center = static_cast<std::size_t>(size / 2) * size + size / 2;
    bool any_off_center = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i != center && w[i] != 0.0) any_off_center = true;
    }
    if (!any_off_center) throw Error("degenerate kernel");
    full_whiten_unit_inplace(w);
}

}  // namespace

Filter make_edge_filter(double orientation_deg, int size, double sigma) {
    check_shape(size, sigma);
    if (!(orientation_deg >= 0.0 && orientation_deg < 180.0)) throw Error("orientation must lie in [0, 180)");

    const double normal = (orientation_deg + 90.0) * std::numbers::pi / 180.0;
    const double nx = std::cos(normal);
    const double ny = std::sin(normal);
    const double s2 = sigma * sigma;
    auto w = sample(size, [&](double x, double y) {
        const double along = nx * x + ny * y;
        return -along / s2 * std::exp(-(x * x + y * y) / (2.0 * s2));
    });
    finish(w, size);
    return {size, std::move(w), FilterKind::kEdge, orientation_deg};
}

Filter make_spot_filter(int size, double sigma) {
    check_shape(size, sigma);
    const double s2 = sigma * sigma;
    // Negated Laplacian of Gaussian: positive centre, negative surround.
    auto w = sample(size, [&](double x, double y) {
        const double r2 = x * x + y * y;
        return (2.0 * s2 - r2) / (s2 * s2) * std::exp(-r2 / (2.0 * s2));
    });
    finish(w, size);
    return {size, std::move(w), FilterKind::kSpot, 0.0};
}

FilterBank build_filter_bank(int n_orientations, bool include_spot, int size, double sigma) {
    if (n_orientations < 1) throw Error("need at least one orientation");
    FilterBank bank;
    bank.n_orientations = n_orientations;
    bank.has_spot = include_spot;
    for (int i = 0; i < n_orientations; ++i) {
        bank.filters.push_back(make_edge_filter(i * (180.0 / n_orientations), size, sigma));
    }
    if (include_spot) bank.filters.push_back(make_spot_filter(size, sigma));
    return bank;
}

}  // namespace hmax
