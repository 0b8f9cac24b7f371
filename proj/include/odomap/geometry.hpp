#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace odomap {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Points2 = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

using Vec2d = Vec2<double>;
using Points2d = Points2<double>;

/// Wraps an angle to (-pi, pi]. The upper endpoint is kept so every
/// equivalence class has exactly one representative.
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
    if (!std::isfinite(a)) {
        throw std::invalid_argument("wrap_angle: non-finite angle");
    }
    constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar r = std::fmod(a, two_pi);
    if (r > std::numbers::pi_v<Scalar>) {
        r -= two_pi;
    } else if (r <= -std::numbers::pi_v<Scalar>) {
        r += two_pi;
    }
    return r;
}

/// Planar pose: position in meters, heading in radians wrapped to (-pi, pi].
template <typename Scalar>
struct Pose2 {
    Scalar x = 0;
    Scalar y = 0;
    Scalar phi = 0;

    Pose2() = default;
    Pose2(Scalar x_, Scalar y_, Scalar phi_) : x(x_), y(y_), phi(wrap_angle(phi_)) {}

    Vec2<Scalar> position() const { return Vec2<Scalar>(x, y); }
    Eigen::Rotation2D<Scalar> rotation() const { return Eigen::Rotation2D<Scalar>(phi); }
};

/// Relative pose measurement expressed in the source frame.
template <typename Scalar>
struct RelPose2 {
    Scalar dx = 0;
    Scalar dy = 0;
    Scalar dphi = 0;

    RelPose2() = default;
    RelPose2(Scalar dx_, Scalar dy_, Scalar dphi_) : dx(dx_), dy(dy_), dphi(wrap_angle(dphi_)) {}

    Vec2<Scalar> translation() const { return Vec2<Scalar>(dx, dy); }
    Eigen::Matrix<Scalar, 3, 1> vector() const { return {dx, dy, dphi}; }
};

using Pose2d = Pose2<double>;
using RelPose2d = RelPose2<double>;

/// Relative measurement from pose a to pose b: the translation rotated into
/// a's frame plus the wrapped heading difference.
template <typename Scalar>
RelPose2<Scalar> pose_diff(const Pose2<Scalar>& a, const Pose2<Scalar>& b) {
    const Vec2<Scalar> d = a.rotation().inverse() * (b.position() - a.position());
    return RelPose2<Scalar>(d.x(), d.y(), wrap_angle(b.phi - a.phi));
}

/// Compounds a relative measurement onto a pose; inverse of pose_diff.
template <typename Scalar>
Pose2<Scalar> pose_apply(const Pose2<Scalar>& a, const RelPose2<Scalar>& rel) {
    const Vec2<Scalar> p = a.position() + a.rotation() * rel.translation();
    return Pose2<Scalar>(p.x(), p.y(), wrap_angle(a.phi + rel.dphi));
}

/// Perpendicular distance from pt to the supporting line through a and b.
template <typename Scalar>
Scalar point_line_distance(const Vec2<Scalar>& pt, const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
    const Vec2<Scalar> v = b - a;
    const Scalar len = v.norm();
    if (len <= Scalar(1e-12)) {
        throw std::invalid_argument("point_line_distance: degenerate segment");
    }
    const Vec2<Scalar> w = pt - a;
    return std::abs(v.x() * w.y() - v.y() * w.x()) / len;
}

/// Closed planar polygon stored as one vertex per column. The closing edge
/// from the last vertex back to the first is implicit.
template <typename Scalar>
class Polygon2 {
public:
    /// Empty polygon, only useful as an assignment target.
    Polygon2() = default;

    explicit Polygon2(Points2<Scalar> vertices) : vertices_(std::move(vertices)) {
        const Eigen::Index n = vertices_.cols();
        if (n < 3) {
            throw std::invalid_argument("Polygon2: needs at least 3 vertices");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index j = (i + 1) % n;
            if ((vertices_.col(j) - vertices_.col(i)).norm() <= Scalar(1e-9)) {
                throw std::invalid_argument("Polygon2: consecutive vertices coincide");
            }
        }
    }

    static Polygon2 from_vertices(const std::vector<Vec2<Scalar>>& pts) {
        Points2<Scalar> m(2, static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i];
        return Polygon2(std::move(m));
    }

    Eigen::Index size() const { return vertices_.cols(); }
    const Points2<Scalar>& vertices() const { return vertices_; }
    Vec2<Scalar> vertex(Eigen::Index i) const { return vertices_.col(i); }

    /// Shoelace area with orientation sign (positive for counterclockwise).
    Scalar signed_area() const {
        const Eigen::Index n = size();
        Scalar s = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto a = vertices_.col(i);
            const auto b = vertices_.col((i + 1) % n);
            s += a.x() * b.y() - b.x() * a.y();
        }
        return s / Scalar(2);
    }

    Scalar area() const { return std::abs(signed_area()); }

    Scalar perimeter() const {
        const Eigen::Index n = size();
        Scalar s = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            s += (vertices_.col((i + 1) % n) - vertices_.col(i)).norm();
        }
        return s;
    }

    /// Axis-aligned bounding box as (min, max) corners.
    std::pair<Vec2<Scalar>, Vec2<Scalar>> bounding_box() const {
        return {vertices_.rowwise().minCoeff(), vertices_.rowwise().maxCoeff()};
    }

    /// Copy with reversed vertex order (flips orientation).
    Polygon2 reversed() const {
        return Polygon2(vertices_.rowwise().reverse().eval());
    }

    /// Copy with counterclockwise orientation.
    Polygon2 counterclockwise() const {
        return signed_area() >= 0 ? *this : reversed();
    }

private:
    Points2<Scalar> vertices_;
};

using Polygon2d = Polygon2<double>;

namespace detail {

template <typename Scalar>
int orientation_sign(const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& c) {
    const Scalar cross = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    const Scalar eps = Scalar(1e-12);
    if (cross > eps) return 1;
    if (cross < -eps) return -1;
    return 0;
}

template <typename Scalar>
bool on_segment(const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& p) {
    return p.x() <= std::max(a.x(), b.x()) + Scalar(1e-12) &&
           p.x() >= std::min(a.x(), b.x()) - Scalar(1e-12) &&
           p.y() <= std::max(a.y(), b.y()) + Scalar(1e-12) &&
           p.y() >= std::min(a.y(), b.y()) - Scalar(1e-12);
}

template <typename Scalar>
bool segments_intersect(const Vec2<Scalar>& a, const Vec2<Scalar>& b,
                        const Vec2<Scalar>& c, const Vec2<Scalar>& d) {
    const int o1 = orientation_sign(a, b, c);
    const int o2 = orientation_sign(a, b, d);
    const int o3 = orientation_sign(c, d, a);
    const int o4 = orientation_sign(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

}  // namespace detail

/// True if no two non-adjacent boundary edges intersect.
template <typename Scalar>
bool polygon_is_simple(const Polygon2<Scalar>& poly) {
    const Eigen::Index n = poly.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2<Scalar> a = poly.vertex(i);
        const Vec2<Scalar> b = poly.vertex((i + 1) % n);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            // Skip the shared-endpoint neighbours of edge i.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Vec2<Scalar> c = poly.vertex(j);
            const Vec2<Scalar> d = poly.vertex((j + 1) % n);
            if (detail::segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

/// Absolute shoelace area. For self-intersecting polygons this is the
/// magnitude of the signed loop sum; callers that care should check
/// polygon_is_simple first.
template <typename Scalar>
Scalar polygon_area(const Polygon2<Scalar>& poly) {
    return poly.area();
}

}  // namespace odomap
