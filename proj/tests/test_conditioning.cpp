#include <doctest.h>

#include <hmax/conditioning.h>
#include <hmax/error.h>

#include "oracles.h"

#include <cmath>
#include <numeric>
#include <random>

using namespace hmax;

namespace {

std::vector<double> random_patch(std::mt19937_64& rng, std::size_t n, double lo = -2.0, double hi = 5.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> x(n);
    for (double& v : x) v = u(rng);
    return x;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double norm_of(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

// Eq-style scalar evaluation without unit normalization.
std::vector<double> whiten_ref(const std::vector<double>& x, double alpha, double beta) {
    const double n = static_cast<double>(x.size());
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double sigma = std::sqrt(ss / n);
    std::vector<double> y;
    for (double v : x) y.push_back((v - alpha * mu) / (sigma + beta));
    return y;
}

}  // namespace

TEST_CASE("partial_whiten examples") {
    SUBCASE("constant patch keeps the unremoved share of the mean") {
        const std::vector<double> x = {5, 5, 5, 5};
        const auto y = partial_whiten(x, {0.98, 3.0});
        for (double v : y) CHECK(v == doctest::Approx((5.0 - 4.9) / 3.0).epsilon(1e-12));
    }
    SUBCASE("full standardization of [2, 0]") {
        const std::vector<double> x = {2, 0};
        const auto y = partial_whiten(x, {1.0, 0.0});
        CHECK(y[0] == doctest::Approx(1.0));
        CHECK(y[1] == doctest::Approx(-1.0));
    }
    SUBCASE("16 random values against a scalar loop") {
        std::mt19937_64 rng(16);
        const auto x = random_patch(rng, 16);
        const auto y = partial_whiten(x, {0.98, 3.0});
        const auto ref = whiten_ref(x, 0.98, 3.0);
        for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(y[i] - ref[i]) <= 1e-12);
    }
    SUBCASE("constant patch with no saturation is an error") {
        const std::vector<double> x = {2, 2, 2};
        CHECK_THROWS_WITH_AS(partial_whiten(x, {0.5, 0.0}), "division by zero in whitening", Error);
    }
}

TEST_CASE("patch_stats uses the population deviation") {
    const std::vector<double> x = {2, 4, 4, 4, 5, 5, 7, 9};
    const auto s = patch_stats(x);
    CHECK(s.mean == doctest::Approx(5.0));
    CHECK(s.stddev == doctest::Approx(2.0));
}

TEST_CASE("unit_normalize") {
    const std::vector<double> a = {3, 4};
    const auto u = unit_normalize(a);
    CHECK(u[0] == doctest::Approx(0.6));
    CHECK(u[1] == doctest::Approx(0.8));

    const std::vector<double> z = {0, 0, 0};
    CHECK(unit_normalize(z) == z);

    const std::vector<double> tiny = {1e-14, 0};
    CHECK(unit_normalize(tiny) == std::vector<double>{0, 0});

    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto x = random_patch(rng, 1 + t);
        const auto y = unit_normalize(x);
        CHECK(std::abs(norm_of(y) - 1.0) < 1e-9);
        const auto again = unit_normalize(y);
        std::vector<double> scaled = x;
        for (double& v : scaled) v *= 17.5;
        const auto ys = unit_normalize(scaled);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(again[i] - y[i]) < 1e-9);
            CHECK(std::abs(ys[i] - y[i]) < 1e-9);
        }
    }
}

TEST_CASE("full_whiten_unit") {
    const std::vector<double> a = {1, 3};
    const auto y = full_whiten_unit(a);
    CHECK(y[0] == doctest::Approx(-1 / std::sqrt(2.0)));
    CHECK(y[1] == doctest::Approx(1 / std::sqrt(2.0)));

    const std::vector<double> c = {7, 7, 7};
    CHECK(full_whiten_unit(c) == std::vector<double>{0, 0, 0});

    std::mt19937_64 rng(176);
    for (std::size_t n : {121u, 176u, 192u}) {
        const auto x = random_patch(rng, n);
        const auto w = full_whiten_unit(x);
        CHECK(std::abs(mean_of(w)) < 1e-9);
        CHECK(std::abs(norm_of(w) - 1.0) < 1e-9);
        const auto w2 = full_whiten_unit(w);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(w2[i] - w[i]) < 1e-6);
    }

    const std::vector<double> one = {4};
    CHECK_THROWS_AS(full_whiten_unit(one), Error);
}

TEST_CASE("output mean identity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ua(0.0, 1.0), ub(0.0, 5.0);
    for (int t = 0; t < 500; ++t) {
        const auto x = random_patch(rng, 2 + t % 40);
        const double alpha = ua(rng), beta = ub(rng) + (t % 2 ? 0.0 : 0.1);
        const auto s = patch_stats(x);
        const auto y = partial_whiten(x, {alpha, beta});
        CHECK(std::abs(mean_of(y) - (1 - alpha) * s.mean / (s.stddev + beta)) < 1e-9);
        const auto full = partial_whiten(x, {1.0, beta});
        CHECK(std::abs(mean_of(full)) < 1e-9);
    }
}

TEST_CASE("adding a constant only commutes with full whitening") {
    std::mt19937_64 rng(4);
    const auto x = random_patch(rng, 25);
    auto shifted = x;
    for (double& v : shifted) v += 3.0;
    const auto a = partial_whiten(x, {1.0, 3.0});
    const auto b = partial_whiten(shifted, {1.0, 3.0});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);

    // With alpha < 1 the difference is the DC residue (1 - alpha) * c / (sigma + beta).
    const double alpha = 0.9;
    const auto c = partial_whiten(x, {alpha, 3.0});
    const auto d = partial_whiten(shifted, {alpha, 3.0});
    const double expected = (1 - alpha) * 3.0 / (patch_stats(x).stddev + 3.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(d[i] - c[i] == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("condition_patch agrees with whiten then normalize") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.0, 1.0), ub(0.0, 4.0);
    for (int t = 0; t < 300; ++t) {
        const auto x = random_patch(rng, 1 + t % 200, -1.0, 1.0);
        const WhiteningParams wp{ua(rng), ub(rng) + 0.01};
        std::vector<double> out(x.size());
        const double norm = condition_patch(x, wp, out);
        const auto ref = oracle::condition(x, wp.alpha, wp.beta);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(out[i] - ref[i]) < 1e-12);
        CHECK(norm == doctest::Approx(norm_of(partial_whiten(x, wp))).epsilon(1e-10));
    }
}

TEST_CASE("condition_patch edge cases") {
    std::vector<double> out(4);
    const std::vector<double> c = {2, 2, 2, 2};

    SUBCASE("constant patch, alpha 1 gives the zero vector") {
        condition_patch(c, {1.0, 0.0}, out);
        for (double v : out) CHECK(v == 0.0);
    }
    SUBCASE("constant patch, no saturation, alpha below 1 normalizes without dividing") {
        condition_patch(c, {0.5, 0.0}, out);
        for (double v : out) CHECK(v == doctest::Approx(0.5));
    }
    SUBCASE("bypass only normalizes") {
        const std::vector<double> x = {3, 4, 0, 0};
        condition_patch(x, {0.98, 3.0, WhiteningMode::kBypass}, out);
        CHECK(out[0] == doctest::Approx(0.6));
        CHECK(out[1] == doctest::Approx(0.8));
    }
    SUBCASE("alpha 0 with the divide equals bypass up to rounding") {
        std::mt19937_64 rng(6);
        const auto x = random_patch(rng, 4);
        std::vector<double> other(4);
        condition_patch(x, {0.0, 3.0}, out);
        condition_patch(x, {0.0, 3.0, WhiteningMode::kBypass}, other);
        for (int i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(other[i]).epsilon(1e-12));
    }
}

TEST_CASE("whitening parameter validation") {
    CHECK_NOTHROW((WhiteningParams{0.0, 0.0}.validate()));
    CHECK_THROWS_AS((WhiteningParams{1.5, 3.0}.validate()), Error);
    CHECK_THROWS_AS((WhiteningParams{0.5, -1.0}.validate()), Error);
}
