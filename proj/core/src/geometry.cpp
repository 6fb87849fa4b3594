#include "ecgpaper/geometry.hpp"

#include "ecgpaper/error.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace ecgpaper {

double distance(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

Quad Quad::image_corners(int width, int height) {
    const double w = width - 1;
    const double h = height - 1;
    return Quad{{Point{0, 0}, Point{w, 0}, Point{w, h}, Point{0, h}}};
}

double Quad::signed_area() const {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const Point& a = pts[i];
        const Point& b = pts[(i + 1) % 4];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

bool Quad::is_convex_clockwise() const {
    for (std::size_t i = 0; i < 4; ++i) {
        if (cross(pts[i], pts[(i + 1) % 4], pts[(i + 2) % 4]) <= 0.0) return false;
    }
    return true;
}

Point Quad::centroid() const {
    return 0.25 * (pts[0] + pts[1] + pts[2] + pts[3]);
}

double corner_rmse(const Quad& a, const Quad& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double d = distance(a[i], b[i]);
        s += d * d;
    }
    return std::sqrt(s / 4.0);
}

namespace {

std::array<double, 9> normalised(std::array<double, 9> h) {
    double scale = h[8];
    if (scale == 0.0) {
        double f = 0.0;
        for (double v : h) f += v * v;
        scale = std::sqrt(f);
    }
    if (scale != 0.0 && scale != 1.0) {
        for (double& v : h) v /= scale;
    }
    return h;
}

} // namespace

Homography::Homography() : h_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& row_major) : h_(normalised(row_major)) {}

Homography Homography::translation(double dx, double dy) {
    return Homography({1, 0, dx, 0, 1, dy, 0, 0, 1});
}

Homography Homography::rotation_about(Point c, double radians) {
    if (radians == 0.0) return Homography();
    const double cs = std::cos(radians);
    const double sn = std::sin(radians);
    return Homography({cs, -sn, c.x - cs * c.x + sn * c.y, sn, cs, c.y - sn * c.x - cs * c.y, 0, 0, 1});
}

Point Homography::apply(Point p) const {
    const double x = h_[0] * p.x + h_[1] * p.y + h_[2];
    const double y = h_[3] * p.x + h_[4] * p.y + h_[5];
    const double w = h_[6] * p.x + h_[7] * p.y + h_[8];
    if (w == 1.0) return {x, y};
    return {x / w, y / w};
}

Quad Homography::apply(const Quad& q) const {
    Quad out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = apply(q[i]);
    return out;
}

double Homography::determinant() const {
    const auto& m = h_;
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

bool Homography::is_invertible() const {
    const double d = determinant();
    return std::isfinite(d) && std::abs(d) > 1e-12;
}

Homography Homography::inverse() const {
    if (!is_invertible()) throw Error(Errc::SingularHomography, "determinant is (near) zero");
    const auto& m = h_;
    const double d = determinant();
    std::array<double, 9> inv{
        (m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d, (m[1] * m[5] - m[2] * m[4]) / d,
        (m[5] * m[6] - m[3] * m[8]) / d, (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
        (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d, (m[0] * m[4] - m[1] * m[3]) / d,
    };
    return Homography(inv);
}

Homography operator*(const Homography& a, const Homography& b) {
    std::array<double, 9> c{};
    for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += a(r, j) * b(j, k);
            c[static_cast<std::size_t>(r * 3 + k)] = s;
        }
    }
    return Homography(c);
}

double homography_distance(const Homography& a, const Homography& b) {
    auto unit = [](const Homography& h) {
        std::array<double, 9> e = h.entries();
        double f = 0.0;
        for (double v : e) f += v * v;
        f = std::sqrt(f);
        // sign convention: the largest-magnitude entry is positive
        const auto it = std::max_element(e.begin(), e.end(),
                                         [](double x, double y) { return std::abs(x) < std::abs(y); });
        if (*it < 0) f = -f;
        for (double& v : e) v /= f;
        return e;
    };
    const auto ua = unit(a);
    const auto ub = unit(b);
    double worst = 0.0;
    for (std::size_t i = 0; i < 9; ++i) worst = std::max(worst, std::abs(ua[i] - ub[i]));
    return worst;
}

namespace {

// Similarity taking the points to centroid 0 and mean distance sqrt(2).
Eigen::Matrix3d normalising_transform(const Quad& q) {
    const Point c = q.centroid();
    double mean = 0.0;
    for (const Point& p : q.pts) mean += distance(p, c);
    mean /= 4.0;
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw Error(Errc::SingularSystem, "quad collapses to a point");
    }
    const double s = std::sqrt(2.0) / mean;
    Eigen::Matrix3d t;
    t << s, 0, -s * c.x, 0, s, -s * c.y, 0, 0, 1;
    return t;
}

} // namespace

Homography solve_homography(const Quad& src, const Quad& dst) {
    const Eigen::Matrix3d ts = normalising_transform(src);
    const Eigen::Matrix3d td = normalising_transform(dst);

    Eigen::Matrix<double, 9, 9> a = Eigen::Matrix<double, 9, 9>::Zero();
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector3d p = ts * Eigen::Vector3d(src[static_cast<std::size_t>(i)].x, src[static_cast<std::size_t>(i)].y, 1.0);
        const Eigen::Vector3d q = td * Eigen::Vector3d(dst[static_cast<std::size_t>(i)].x, dst[static_cast<std::size_t>(i)].y, 1.0);
        const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }

    Eigen::JacobiSVD<Eigen::Matrix<double, 9, 9>> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // Eight constraints must be independent: the eighth singular value bounds
    // how far the configuration is from collinear.
    if (!(sv(7) > 1e-10 * sv(0))) {
        throw Error(Errc::SingularSystem, "correspondences are degenerate (collinear points)");
    }
    const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    const Eigen::Matrix3d full = td.inverse() * hn * ts;

    std::array<double, 9> e{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) e[static_cast<std::size_t>(r * 3 + c)] = full(r, c);
    Homography result(e);
    if (!result.is_invertible()) throw Error(Errc::SingularSystem, "solution is not invertible");
    return result;
}

} // namespace ecgpaper
