#include <doctest.h>

#include <hmax/error.h>
#include <hmax/s1c1.h>

#include "oracles.h"
#include "test_util.h"

#include <cmath>
#include <fstream>
#include <random>

using namespace hmax;

namespace {

OpponentImage grey_image(const Plane& intensity) {
    OpponentImage img;
    img.height = intensity.rows();
    img.width = intensity.cols();
    img.channels = {intensity, Plane(img.height, img.width), Plane(img.height, img.width)};
    return img;
}

S1Maps single_plane(const Plane& p) {
    S1Maps s;
    s.rows = p.rows();
    s.cols = p.cols();
    s.maps = {p};
    return s;
}

Plane random_plane(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 3.0);
    Plane p(rows, cols);
    for (double& v : p.data()) v = u(rng);
    return p;
}

const FilterBank& default_bank() {
    static const FilterBank bank = build_filter_bank(12, false, 11, 2.75);
    return bank;
}

}  // namespace

TEST_CASE("S1 on a constant image is zero") {
    const auto img = grey_image(Plane(20, 20, 0.6));
    for (double alpha : {0.0, 0.98, 1.0}) {
        const auto s1 = s1_convolve(img, default_bank(), {alpha, 3.0});
        for (const auto& m : s1.maps)
            for (double v : m.data()) CHECK(std::abs(v) < 1e-12);
    }
}

TEST_CASE("S1 plane size is the valid-convolution size") {
    std::mt19937_64 rng(1);
    const auto s1 = s1_convolve(grey_image(random_plane(15, 15, rng)), default_bank(), {}, true);
    CHECK(s1.rows == 5);
    CHECK(s1.cols == 5);
    REQUIRE(s1.maps.size() == 12);
    CHECK(s1.maps[0].rows() == 5);
    CHECK(s1.maps[0].cols() == 5);

    const auto wide = s1_convolve(oracle::random_opponent(12, 30, rng), default_bank(), {});
    CHECK(wide.rows == 2);
    CHECK(wide.cols == 20);

    CHECK_THROWS_WITH_AS(s1_convolve(oracle::random_opponent(10, 30, rng), default_bank(), {}),
                         "image too small for S1", Error);
}

TEST_CASE("a vertical step edge peaks in the horizontal-gradient plane") {
    // Left half bright, right half dark. The 90 degree filter differentiates along x.
    Plane p(21, 31);
    for (int r = 0; r < 21; ++r)
        for (int c = 0; c < 31; ++c) p(r, c) = c < 15 ? 0.9 : 0.1;
    const auto s1 = s1_convolve(grey_image(p), default_bank(), {});
    // Output column j is centred on input column j + 5; the edge sits between input columns 14 and 15.
    for (int r = 0; r < s1.rows; ++r)
        for (int j : {9, 10}) {
            const double target = s1.maps[6](r, j);
            for (std::size_t f = 0; f < s1.maps.size(); ++f)
                if (f != 6) CHECK(s1.maps[f](r, j) < target);
        }
}

TEST_CASE("S1 matches the nested-loop oracle") {
    std::mt19937_64 rng(2);
    const auto bank = build_filter_bank(4, true, 7, 1.75);
    for (double alpha : {0.0, 0.98, 1.0}) {
        const auto img = oracle::random_opponent(19, 23, rng);
        for (bool grey : {false, true}) {
            const auto got = s1_convolve(img, bank, {alpha, 3.0}, grey);
            const auto ref = oracle::s1(img, bank, alpha, 3.0, grey);
            REQUIRE(got.rows == ref.rows);
            REQUIRE(got.cols == ref.cols);
            for (std::size_t f = 0; f < ref.maps.size(); ++f)
                for (std::size_t i = 0; i < ref.maps[f].data().size(); ++i)
                    CHECK(std::abs(got.maps[f].data()[i] - ref.maps[f].data()[i]) <= 1e-10);
        }
    }
}

TEST_CASE("S1 is nonnegative") {
    std::mt19937_64 rng(3);
    const auto s1 = s1_convolve(oracle::random_opponent(24, 24, rng), default_bank(), {});
    for (const auto& m : s1.maps)
        for (double v : m.data()) CHECK(v >= 0.0);
}

TEST_CASE("S1 with full whitening ignores a global affine intensity change") {
    std::mt19937_64 rng(4);
    const auto img = oracle::random_opponent(20, 22, rng);
    auto changed = img;
    for (auto& ch : changed.channels)
        for (double& v : ch.data()) v = 2.5 * v + 0.7;
    const auto a = s1_convolve(img, default_bank(), {1.0, 3.0});
    const auto b = s1_convolve(changed, default_bank(), {1.0, 3.0});
    for (std::size_t f = 0; f < a.maps.size(); ++f)
        for (std::size_t i = 0; i < a.maps[f].data().size(); ++i)
            CHECK(std::abs(a.maps[f].data()[i] - b.maps[f].data()[i]) < 1e-9);
}

TEST_CASE("c1_pool examples") {
    SUBCASE("constant plane stays constant") {
        const auto c1 = c1_pool(single_plane(Plane(30, 30, 1.0)));
        CHECK(c1.rows == 4);
        CHECK(c1.cols == 4);
        for (double v : c1.planes[0].data()) CHECK(v == 1.0);
    }
    SUBCASE("single spike localizes") {
        Plane p(24, 24, 0.0);
        p(0, 0) = 9.0;
        const auto c1 = c1_pool(single_plane(p));
        REQUIRE(c1.rows == 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(c1.planes[0](i, j) == (i == 0 && j == 0 ? 9.0 : 0.0));
    }
    SUBCASE("40x40 random plane against the nested-loop oracle") {
        std::mt19937_64 rng(5);
        const auto p = random_plane(40, 40, rng);
        const auto c1 = c1_pool(single_plane(p));
        CHECK(c1.rows == 5);
        CHECK(c1.planes[0] == oracle::max_pool(p, 12, 6));
    }
    SUBCASE("trailing partial windows are dropped") {
        std::mt19937_64 rng(6);
        const auto p = random_plane(17, 29, rng);
        const auto c1 = c1_pool(single_plane(p));
        CHECK(c1.rows == 1);
        CHECK(c1.cols == 3);
        CHECK(c1.planes[0] == oracle::max_pool(p, 12, 6));
    }
    SUBCASE("too small for pooling") {
        CHECK_THROWS_WITH_AS(c1_pool(single_plane(Plane(11, 30))), "S1 too small for C1 pooling", Error);
    }
}

TEST_CASE("c1_pool properties") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        const auto p = random_plane(12 + t * 3, 30 - t, rng);
        const auto c1 = c1_pool(single_plane(p));
        Plane doubled = p, squared = p;
        for (double& v : doubled.data()) v *= 2.0;
        for (double& v : squared.data()) v *= v;
        const auto c1d = c1_pool(single_plane(doubled));
        const auto c1s = c1_pool(single_plane(squared));
        for (int i = 0; i < c1.rows; ++i)
            for (int j = 0; j < c1.cols; ++j) {
                const double m = c1.planes[0](i, j);
                CHECK(c1d.planes[0](i, j) == 2.0 * m);
                CHECK(c1s.planes[0](i, j) == m * m);
                bool attained = false;
                for (int u = 0; u < 12; ++u)
                    for (int v = 0; v < 12; ++v) attained |= p(i * 6 + u, j * 6 + v) == m;
                CHECK(attained);
            }
    }
}

TEST_CASE("C1 stack file round trip") {
    testutil::TempDir dir("c1");
    std::mt19937_64 rng(8);
    const auto stack = oracle::random_stack(3, 5, 7, rng);
    write_c1_stack(dir / "a.c1", stack);
    const auto back = read_c1_stack(dir / "a.c1");
    CHECK(back.rows == 5);
    CHECK(back.cols == 7);
    REQUIRE(back.n_planes() == 3);
    for (int f = 0; f < 3; ++f)
        for (std::size_t i = 0; i < stack.planes[f].data().size(); ++i)
            CHECK(back.planes[f].data()[i] == static_cast<double>(static_cast<float>(stack.planes[f].data()[i])));
    std::ofstream(dir / "bad.c1") << "XXXX";
    CHECK_THROWS_AS(read_c1_stack(dir / "bad.c1"), Error);
}
