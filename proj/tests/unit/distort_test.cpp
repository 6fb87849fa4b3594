#include "ecgpaper/distort.hpp"
#include "ecgpaper/error.hpp"
#include "ecgpaper/render.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <cmath>

#include <gtest/gtest.h>

using namespace ecgpaper;

namespace {

PaperImage flat_paper(int w, int h, Rgb c = {200, 180, 160}) {
    return PaperImage{Image(w, h, c), 8.0, Quad::image_corners(w, h)};
}

PaperImage small_render() {
    GridConfig cfg;
    cfg.px_per_mm = 4;
    return render_record(synthesize_record("t", 1, 250, 10.0), cfg);
}

} // namespace

TEST(CatmullRom, HandEvaluatedMidpoint) {
    // Basis at t = 0.5 is (-1/16, 9/16, 9/16, -1/16).
    const Point p = catmull_rom({0, 0}, {0, 1}, {1, 1}, {1, 0}, 0.5);
    EXPECT_DOUBLE_EQ(p.x, 0.5);
    EXPECT_DOUBLE_EQ(p.y, 1.125);
}

TEST(CatmullRom, MatchesHermiteFormAndInterpolatesKnots) {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        Point p[4];
        for (auto& q : p) q = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
        const double t = rng.uniform();
        const Point a = catmull_rom(p[0], p[1], p[2], p[3], t);
        const Point b = oracle::hermite_catmull_rom(p[0], p[1], p[2], p[3], t);
        ASSERT_NEAR(a.x, b.x, 1e-9);
        ASSERT_NEAR(a.y, b.y, 1e-9);
        EXPECT_EQ(catmull_rom(p[0], p[1], p[2], p[3], 0.0), p[1]);
        const Point end = catmull_rom(p[0], p[1], p[2], p[3], 1.0);
        EXPECT_NEAR(end.x, p[2].x, 1e-12);
        EXPECT_NEAR(end.y, p[2].y, 1e-12);
    }
}

TEST(CatmullRom, ClosedSplineVisitsEveryControlPoint) {
    const std::vector<Point> ctrl{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {-5, 5}};
    const auto pts = closed_catmull_rom(ctrl, 8);
    ASSERT_EQ(pts.size(), 40u);
    for (std::size_t i = 0; i < ctrl.size(); ++i) EXPECT_EQ(pts[i * 8], ctrl[i]);
    EXPECT_THROW((void)closed_catmull_rom(std::vector<Point>(3), 8), Error);
}

TEST(Shadow, ControlPointsDeterministicAndInBounds) {
    const Bounds b{10, 20, 300, 200};
    const auto a = shadow_control_points(5, 7, b);
    EXPECT_EQ(a, shadow_control_points(5, 7, b));
    EXPECT_NE(a, shadow_control_points(6, 7, b));
    ASSERT_EQ(a.size(), 7u);
    for (Point p : a) {
        EXPECT_GE(p.x, b.x0);
        EXPECT_LE(p.x, b.x1);
        EXPECT_GE(p.y, b.y0);
        EXPECT_LE(p.y, b.y1);
    }
    try {
        (void)shadow_polygon(5, 3, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidArgument);
    }
}

TEST(Shadow, DarkensInsideAndFeathersOutside) {
    const PaperImage img = flat_paper(100, 100);
    const std::vector<Point> square{{30, 30}, {70, 30}, {70, 70}, {30, 70}};
    const PaperImage out = apply_shadow(img, square, 0.5, 10);
    EXPECT_EQ(out.raster.at(50, 50), (Rgb{100, 90, 80}));
    EXPECT_EQ(out.raster.at(90, 50), img.raster.at(90, 50));
    EXPECT_EQ(out.raster.at(5, 5), img.raster.at(5, 5));
    // 5 px outside the right edge: factor 1 - 0.5 * (1 - 5/10) = 0.75
    EXPECT_EQ(out.raster.at(75, 50), (Rgb{150, 135, 120}));
    int prev = 0;
    for (int x = 71; x <= 81; ++x) {
        const int v = out.raster.at(x, 50).r;
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_EQ(out.corners, img.corners);
}

TEST(Shadow, DegeneratePolygonRejected) {
    const PaperImage img = flat_paper(20, 20);
    const std::vector<Point> line{{1, 1}, {5, 5}, {9, 9}};
    try {
        (void)apply_shadow(img, line, 0.3, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DegeneratePolygon);
    }
}

TEST(Perspective, ZeroJitterIsIdentityAndCornersStayInDisc) {
    EXPECT_EQ(random_homography(1, 0.0, 400, 300), Homography::identity());
    for (std::uint64_t s = 0; s < 50; ++s) {
        const Homography h = random_homography(s, 0.1, 400, 300);
        const Quad src = Quad::image_corners(400, 300);
        const Quad dst = h.apply(src);
        EXPECT_TRUE(dst.is_convex_clockwise());
        for (std::size_t k = 0; k < 4; ++k) EXPECT_LE(distance(src[k], dst[k]), 30.0 + 1e-6);
    }
    EXPECT_EQ(random_homography(9, 0.1, 400, 300), random_homography(9, 0.1, 400, 300));
}

TEST(Warp, IdentityIsBitExactAndIntegerShiftMovesPixels) {
    const Image src = fixture::noise_image(40, 30, 2);
    EXPECT_EQ(warp_raster(src, Homography::identity(), 40, 30, {}), src);
    const Image shifted = warp_raster(src, Homography::translation(3, 2), 40, 30, {1, 2, 3});
    EXPECT_EQ(shifted.at(3, 2), src.at(0, 0));
    EXPECT_EQ(shifted.at(39, 29), src.at(36, 27));
    EXPECT_EQ(shifted.at(1, 1), (Rgb{1, 2, 3}));
}

TEST(Warp, CornersFollowHomography) {
    const PaperImage img = flat_paper(50, 40);
    const Homography h = Homography::translation(5, 7);
    const auto [out, corners] = warp(img, h, 60, 60, {});
    EXPECT_EQ(corners, h.apply(img.corners));
    EXPECT_EQ(out.corners, corners);
}

TEST(Elastic, FieldScaledToAlphaAndHashStable) {
    const auto f = elastic_field(64, 48, 5.0, 4.0, 11);
    EXPECT_NEAR(f.max_magnitude(), 5.0, 1e-9);
    EXPECT_EQ(field_hash(f), field_hash(elastic_field(64, 48, 5.0, 4.0, 11)));
    EXPECT_NE(field_hash(f), field_hash(elastic_field(64, 48, 5.0, 4.0, 12)));
    EXPECT_EQ(field_hash(f).size(), 16u);
    const PaperImage img = small_render();
    EXPECT_EQ(elastic_deform(img, 0.0, 4.0, 3).raster, img.raster);
    EXPECT_NE(elastic_deform(img, 4.0, 4.0, 3).raster, img.raster);
}

TEST(Photometric, IdentityAndFormula) {
    const PaperImage img = flat_paper(4, 4, {100, 128, 200});
    EXPECT_EQ(photometric(img, 0.0, 1.0).raster, img.raster);
    // 2 * (100 - 128) + 128 + 25.5 = 97.5 -> 98; 2*(200-128)+128+25.5 > 255
    const PaperImage out = photometric(img, 0.1, 2.0);
    EXPECT_EQ(out.raster.at(0, 0), (Rgb{98, 154, 255}));
    EXPECT_THROW((void)photometric(img, 0.6, 1.0), Error);
}

TEST(Crease, DarkensOneSideWithLinearFalloff) {
    const PaperImage img = flat_paper(50, 50, {200, 200, 200});
    // Horizontal line through y = 20; normal (0, 1) points down.
    const PaperImage out = apply_crease(img, {0, 20}, 0.0, 0.5, 10.0);
    EXPECT_EQ(out.raster.at(10, 20).r, 100);
    EXPECT_EQ(out.raster.at(10, 25).r, 150);
    EXPECT_EQ(out.raster.at(10, 19).r, 200);
    EXPECT_EQ(out.raster.at(10, 30).r, 200);
    EXPECT_EQ(apply_crease(img, {0, 20}, 0.0, 0.0, 10.0).raster, img.raster);
}

TEST(Recipe, ZeroMagnitudeStepsLeaveImageUntouched) {
    const PaperImage img = small_render();
    DistortionRecipe r;
    r.seed = 5;
    r.steps = {ShadowStep{6, 0.0, 12, std::nullopt}, PerspectiveStep{0.0, std::nullopt}, RotateStep{0.0, std::nullopt},
               ElasticStep{0.0, 8.0, std::nullopt}, CreaseStep{0.0, 10.0, std::nullopt, std::nullopt}, PhotometricStep{}};
    const RecipeResult res = apply_recipe(img, r);
    EXPECT_EQ(res.image.raster, img.raster);
    EXPECT_EQ(res.corners, img.corners);
}

TEST(Recipe, ReplayOfRealisedRecipeIsBitIdentical) {
    const PaperImage img = small_render();
    DistortionRecipe r;
    r.seed = 77;
    r.margin = 0.1;
    r.steps = {ShadowStep{}, PerspectiveStep{}, RotateStep{}, ElasticStep{3.0, 6.0, std::nullopt}, CreaseStep{},
               PhotometricStep{0.05, 1.1}};
    const RecipeResult first = apply_recipe(img, r);
    EXPECT_NE(first.realised, r);
    const RecipeResult again = apply_recipe(img, first.realised);
    EXPECT_EQ(again.image.raster, first.image.raster);
    EXPECT_EQ(again.corners, first.corners);
    EXPECT_EQ(again.realised, first.realised);
    EXPECT_EQ(apply_recipe(img, r).image.raster, first.image.raster);
}

TEST(Recipe, TamperedElasticHashIsRejected) {
    const PaperImage img = small_render();
    DistortionRecipe r;
    r.steps = {ElasticStep{2.0, 5.0, std::string("0000000000000000")}};
    EXPECT_THROW((void)apply_recipe(img, r), Error);
}

TEST(Recipe, CornersAreComposedGeometricTransforms) {
    const PaperImage img = small_render();
    DistortionRecipe r;
    r.seed = 3;
    r.margin = 0.1;
    r.steps = {PerspectiveStep{0.08, std::nullopt}, RotateStep{4.0, std::nullopt}, ShadowStep{}};
    const RecipeResult res = apply_recipe(img, r);
    ASSERT_EQ(res.geometric.size(), 3u); // margin shift, perspective, rotation
    Homography total;
    for (const Homography& h : res.geometric) total = h * total;
    const Quad expect = total.apply(img.corners);
    EXPECT_LT(corner_rmse(expect, res.corners), 1e-9);
    EXPECT_EQ(res.image.width(), img.width() + 2 * *res.realised.margin_px);
}
