#include "ecgpaper/error.hpp"
#include "ecgpaper/geometry.hpp"
#include "ecgpaper/rng.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

using namespace ecgpaper;

namespace {

Quad random_quad(Rng& rng, double w, double h, double jitter) {
    Quad q = Quad::image_corners(static_cast<int>(w), static_cast<int>(h));
    for (Point& p : q.pts) p = p + Point{rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter)};
    return q;
}

} // namespace

TEST(Quad, ImageCornersAreClockwiseOnScreen) {
    const Quad q = Quad::image_corners(100, 50);
    EXPECT_EQ(q[2], (Point{99, 49}));
    EXPECT_DOUBLE_EQ(q.signed_area(), 99.0 * 49.0);
    EXPECT_TRUE(q.is_convex_clockwise());
    Quad ccw{{q[0], q[3], q[2], q[1]}};
    EXPECT_FALSE(ccw.is_convex_clockwise());
}

TEST(Quad, CornerRmse) {
    Quad a = Quad::image_corners(10, 10);
    Quad b = a;
    for (Point& p : b.pts) p = p + Point{3, 4};
    EXPECT_DOUBLE_EQ(corner_rmse(a, b), 5.0);
}

TEST(Homography, TranslationAndRotation) {
    const auto t = Homography::translation(10, 5);
    EXPECT_EQ(t.apply(Point{1, 2}), (Point{11, 7}));
    const auto r = Homography::rotation_about({5, 5}, std::numbers::pi / 2);
    const Point p = r.apply(Point{6, 5});
    EXPECT_NEAR(p.x, 5.0, 1e-12);
    EXPECT_NEAR(p.y, 6.0, 1e-12);
    EXPECT_EQ(Homography::rotation_about({3, 3}, 0.0), Homography::identity());
}

TEST(Homography, InverseAndComposition) {
    const Homography h({1.1, 0.05, 3, -0.02, 0.9, 7, 1e-4, -2e-4, 1});
    const Homography id = h * h.inverse();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(id(r, c), r == c ? 1.0 : 0.0, 1e-12);
    }
    const Point p{12, -4};
    const Point q = (h * Homography::translation(1, 2)).apply(p);
    const Point q2 = h.apply(Point{13, -2});
    EXPECT_NEAR(q.x, q2.x, 1e-9);
    EXPECT_NEAR(q.y, q2.y, 1e-9);
}

TEST(Homography, SingularInverseThrows) {
    const Homography s({1, 2, 3, 2, 4, 6, 0, 0, 1});
    EXPECT_FALSE(s.is_invertible());
    try {
        (void)s.inverse();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingularHomography);
    }
}

TEST(SolveHomography, SameQuadGivesIdentity) {
    const Quad q{{Point{3, 4}, Point{200, 10}, Point{190, 150}, Point{-5, 140}}};
    const Homography h = solve_homography(q, q);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(h(r, c), r == c ? 1.0 : 0.0, 1e-10);
    }
}

TEST(SolveHomography, PureTranslation) {
    const Quad src = Quad::image_corners(640, 480);
    Quad dst = src;
    for (Point& p : dst.pts) p = p + Point{10, 5};
    const Homography h = solve_homography(src, dst);
    EXPECT_NEAR(h(0, 2), 10.0, 1e-8);
    EXPECT_NEAR(h(1, 2), 5.0, 1e-8);
    EXPECT_NEAR(h(0, 0), 1.0, 1e-10);
    EXPECT_NEAR(h(2, 0), 0.0, 1e-12);
}

TEST(SolveHomography, MapsCornersWithTinyResidual) {
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
        const Quad src = random_quad(rng, 2000, 800, 150);
        const Quad dst = random_quad(rng, 2000, 800, 150);
        const Homography h = solve_homography(src, dst);
        for (std::size_t k = 0; k < 4; ++k) ASSERT_LT(distance(h.apply(src[k]), dst[k]), 1e-8);
    }
}

TEST(SolveHomography, RecoversInverseOfKnownTransform) {
    // dst = H0^-1 * src, so solving src -> dst must give H0^-1 (and an LU
    // solve of the same correspondences must agree).
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const Homography h0({1 + rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-40, 40),
                             rng.uniform(-0.1, 0.1), 1 + rng.uniform(-0.1, 0.1), rng.uniform(-40, 40),
                             rng.uniform(-1e-4, 1e-4), rng.uniform(-1e-4, 1e-4), 1});
        const Quad dst = random_quad(rng, 1500, 700, 100);
        const Quad src = h0.apply(dst);
        const Homography h = solve_homography(src, dst);
        ASSERT_LT(oracle::max_entry_error(h.entries(), h0.inverse().entries()), 1e-6);
        ASSERT_LT(oracle::max_entry_error(h.entries(), oracle::homography_lu(src, dst)), 1e-6);
        ASSERT_LT(homography_distance(h, h0.inverse()), 1e-6);
    }
}

TEST(SolveHomography, CollinearPointsAreSingular) {
    const Quad src{{Point{0, 0}, Point{1, 1}, Point{2, 2}, Point{3, 3}}};
    const Quad dst = Quad::image_corners(10, 10);
    try {
        (void)solve_homography(src, dst);
        FAIL() << "expected SingularSystem";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SingularSystem);
    }
}

TEST(HomographyDistance, ScaleAndSignInvariant) {
    const Homography a({2, 0.1, 3, 0, 1, 4, 0, 0, 1});
    const Homography b({-4, -0.2, -6, 0, -2, -8, 0, 0, -2});
    EXPECT_LT(homography_distance(a, b), 1e-15);
    EXPECT_GT(homography_distance(a, Homography::identity()), 0.1);
}
