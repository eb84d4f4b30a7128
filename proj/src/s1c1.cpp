#include <hmax/s1c1.h>
#include <hmax/binary_io.h>
#include <hmax/error.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace hmax {

S1Maps s1_convolve(const OpponentImage& img, const FilterBank& bank, const WhiteningParams& wp,
                   bool greyscale_only) {
    wp.validate();
    if (bank.filters.empty()) throw Error("empty filter bank");
    const int k = bank.kernel_size();
    if (img.height < k || img.width < k) throw Error("image too small for S1");

    S1Maps out;
    out.rows = img.height - k + 1;
    out.cols = img.width - k + 1;
    out.maps.assign(bank.filters.size(), Plane(out.rows, out.cols));

    const int n_channels = greyscale_only ? 1 : 3;
    const std::size_t window = static_cast<std::size_t>(k) * k;
    const std::size_t n_filters = bank.filters.size();

    // Weights interleaved as [tap][filter] so one pass over the window feeds
    // every filter; each filter still accumulates its taps in order.
    std::vector<double> taps(window * n_filters);
    for (std::size_t f = 0; f < n_filters; ++f) {
        for (std::size_t i = 0; i < window; ++i) taps[i * n_filters + f] = bank.filters[f].weights[i];
    }

    std::vector<double> raw(window);
    std::vector<double> cond(window);
    std::vector<double> dots(n_filters);
    std::vector<double> acc(n_filters);

    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int ch = 0; ch < n_channels; ++ch) {
                const Plane& plane = img.channels[ch];
                for (int i = 0; i < k; ++i) {
                    const auto src = plane.row(r + i).subspan(c, k);
                    std::copy(src.begin(), src.end(), raw.begin() + static_cast<std::ptrdiff_t>(i) * k);
                }
                if (condition_patch(raw, wp, cond) <= kZeroNormEpsilon) continue;
                std::fill(dots.begin(), dots.end(), 0.0);
                for (std::size_t i = 0; i < window; ++i) {
                    const double x = cond[i];
                    const double* t = taps.data() + i * n_filters;
                    for (std::size_t f = 0; f < n_filters; ++f) dots[f] += t[f] * x;
                }
                for (std::size_t f = 0; f < n_filters; ++f) acc[f] += std::abs(dots[f]);
            }
            for (std::size_t f = 0; f < n_filters; ++f) out.maps[f](r, c) = acc[f] / n_channels;
        }
    }
    return out;
}

C1Stack c1_pool(const S1Maps& s1, int window, int stride) {
    if (window < 1 || stride < 1) throw Error("pool window and stride must be positive");
    if (s1.rows < window || s1.cols < window) throw Error("S1 too small for C1 pooling");

    C1Stack out;
    out.rows = (s1.rows - window) / stride + 1;
    out.cols = (s1.cols - window) / stride + 1;
    out.pool_window = window;
    out.pool_stride = stride;
    out.planes.reserve(s1.maps.size());
    for (const Plane& src : s1.maps) {
        Plane dst(out.rows, out.cols);
        for (int i = 0; i < out.rows; ++i) {
            for (int j = 0; j < out.cols; ++j) {
                double m = src(i * stride, j * stride);
                for (int u = 0; u < window; ++u) {
                    const auto row = src.row(i * stride + u).subspan(static_cast<std::size_t>(j) * stride, window);
                    m = std::max(m, *std::max_element(row.begin(), row.end()));
                }
                dst(i, j) = m;
            }
        }
        out.planes.push_back(std::move(dst));
    }
    return out;
}

namespace {
constexpr std::string_view kC1Magic = "HC1S";
constexpr std::uint32_t kC1Version = 1;
}  // namespace

void write_c1_stack(const std::filesystem::path& path, const C1Stack& stack) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    io::write_magic(os, kC1Magic);
    io::write_u32(os, kC1Version);
    io::write_u32(os, static_cast<std::uint32_t>(stack.planes.size()));
    io::write_u32(os, static_cast<std::uint32_t>(stack.rows));
    io::write_u32(os, static_cast<std::uint32_t>(stack.cols));
    for (const Plane& p : stack.planes) {
        for (double v : p.data()) io::write_f32(os, static_cast<float>(v));
    }
}

C1Stack read_c1_stack(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    io::expect_magic(is, kC1Magic, "C1 stack");
    if (io::read_u32(is) != kC1Version) throw Error("unsupported C1 stack version");
    const auto n = io::read_u32(is);
    const auto rows = io::read_u32(is);
    const auto cols = io::read_u32(is);
    if (n > 4096 || rows > 65536 || cols > 65536) throw Error("corrupt C1 stack header");

    C1Stack stack;
    stack.rows = static_cast<int>(rows);
    stack.cols = static_cast<int>(cols);
    for (std::uint32_t f = 0; f < n; ++f) {
        Plane p(stack.rows, stack.cols);
        for (double& v : p.data()) v = io::read_f32(is);
        stack.planes.push_back(std::move(p));
    }
    return stack;
}

}  // namespace hmax
