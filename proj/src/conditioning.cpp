#include <hmax/conditioning.h>
#include <hmax/error.h>

#include <cmath>
#include <numeric>

namespace hmax {

void WhiteningParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
    if (!(beta >= 0.0)) throw Error("beta must be nonnegative");
}

PatchStats patch_stats(std::span<const double> x) {
    if (x.empty()) throw Error("empty patch");
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

std::vector<double> partial_whiten(std::span<const double> patch, const WhiteningParams& params) {
    params.validate();
    const auto [mean, stddev] = patch_stats(patch);
    std::vector<double> out(patch.begin(), patch.end());
    if (params.mode == WhiteningMode::kBypass) return out;

    const double denom = stddev + params.beta;
    if (denom == 0.0) throw Error("division by zero in whitening");
    const double shift = params.alpha * mean;
    for (double& v : out) v = (v - shift) / denom;
    return out;
}

std::vector<double> unit_normalize(std::span<const double> patch) {
    std::vector<double> out(patch.begin(), patch.end());
    const double norm = std::sqrt(std::inner_product(out.begin(), out.end(), out.begin(), 0.0));
    if (norm > kZeroNormEpsilon) {
        for (double& v : out) v /= norm;
    } else {
        std::fill(out.begin(), out.end(), 0.0);
    }
    return out;
}

void full_whiten_unit_inplace(std::span<double> vec) {
    if (vec.empty()) return;
    const double mean = std::accumulate(vec.begin(), vec.end(), 0.0) / static_cast<double>(vec.size());
    double ss = 0.0;
    for (double& v : vec) {
        v -= mean;
        ss += v * v;
    }
    const double norm = std::sqrt(ss);
    if (norm > kZeroNormEpsilon) {
        for (double& v : vec) v /= norm;
    } else {
        std::fill(vec.begin(), vec.end(), 0.0);
    }
}

std::vector<double> full_whiten_unit(std::span<const double> vec) {
    if (vec.size() < 2) throw Error("full_whiten_unit needs at least 2 elements");
    std::vector<double> out(vec.begin(), vec.end());
    full_whiten_unit_inplace(out);
    return out;
}

namespace {

// Four-way split reductions; the scalar loops above stay the reference path.
double sum4(const double* x, std::size_t n) {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a += x[i];
        b += x[i + 1];
        c += x[i + 2];
        d += x[i + 3];
    }
    for (; i < n; ++i) a += x[i];
    return (a + b) + (c + d);
}

double sumsq4(const double* x, double shift, std::size_t n) {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double u = x[i] - shift, v = x[i + 1] - shift, w = x[i + 2] - shift, z = x[i + 3] - shift;
        a += u * u;
        b += v * v;
        c += w * w;
        d += z * z;
    }
    for (; i < n; ++i) a += (x[i] - shift) * (x[i] - shift);
    return (a + b) + (c + d);
}

}  // namespace

double condition_patch(std::span<const double> patch, const WhiteningParams& params,
                       std::span<double> out) {
    const std::size_t n = patch.size();
    if (n == 0) throw Error("empty patch");
    double shift = 0.0;
    double scale = 1.0;
    if (params.mode == WhiteningMode::kPartial) {
        const double mean = sum4(patch.data(), n) / static_cast<double>(n);
        const double stddev = std::sqrt(sumsq4(patch.data(), mean, n) / static_cast<double>(n));
        shift = params.alpha * mean;
        // sigma + beta == 0 only rescales; unit normalization removes it anyway.
        if (stddev + params.beta > 0.0) scale = 1.0 / (stddev + params.beta);
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = (patch[i] - shift) * scale;
    const double norm = std::sqrt(sumsq4(out.data(), 0.0, n));
    if (norm > kZeroNormEpsilon) {
        const double inv = 1.0 / norm;
        for (std::size_t i = 0; i < n; ++i) out[i] *= inv;
    } else {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
    }
    return norm;
}

}  // namespace hmax
