#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace ecgpaper {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
};

double distance(Point a, Point b);
double cross(Point o, Point a, Point b);

/// Corner quadrilateral in TL, TR, BR, BL order (pixel-centre coordinates,
/// y pointing down).
struct Quad {
    std::array<Point, 4> pts{};

    /// Corners of a width x height raster: (0,0), (W-1,0), (W-1,H-1), (0,H-1).
    static Quad image_corners(int width, int height);

    Point& operator[](std::size_t i) { return pts[i]; }
    const Point& operator[](std::size_t i) const { return pts[i]; }

    /// Shoelace area; positive when the vertices run clockwise on screen.
    double signed_area() const;
    bool is_convex_clockwise() const;
    Point centroid() const;

    friend bool operator==(const Quad&, const Quad&) = default;
};

double corner_rmse(const Quad& a, const Quad& b);

/// 3x3 projective transform, row-major, normalised so that h[2][2] == 1
/// whenever it is nonzero (otherwise to unit Frobenius norm).
class Homography {
public:
    Homography();
    explicit Homography(const std::array<double, 9>& row_major);

    static Homography identity() { return Homography(); }
    static Homography translation(double dx, double dy);
    static Homography rotation_about(Point centre, double radians);

    double operator()(int row, int col) const { return h_[static_cast<std::size_t>(row * 3 + col)]; }
    const std::array<double, 9>& entries() const { return h_; }

    Point apply(Point p) const;
    Quad apply(const Quad& q) const;

    double determinant() const;
    bool is_invertible() const;
    /// Throws Error(SingularHomography) when |det| <= 1e-12.
    Homography inverse() const;

    /// Composition: (a * b)(p) == a(b(p)).
    friend Homography operator*(const Homography& a, const Homography& b);
    friend bool operator==(const Homography&, const Homography&) = default;

private:
    std::array<double, 9> h_;
};

/// Largest entry difference after both matrices are scaled to unit Frobenius
/// norm with a common sign, relative to that norm.
double homography_distance(const Homography& a, const Homography& b);

/// Exact four-point normalised DLT: the returned H maps src[i] onto dst[i].
/// Throws Error(SingularSystem) for degenerate correspondences.
Homography solve_homography(const Quad& src, const Quad& dst);

} // namespace ecgpaper
