#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <span>
#include <string>
#include <vector>

#include "torchpilot/error.hpp"

namespace torchpilot {

template <typename T>
struct Point2 {
    T x{};
    T y{};

    friend constexpr bool operator==(const Point2&, const Point2&) = default;
    friend constexpr auto operator<=>(const Point2&, const Point2&) = default;
};

using PixelPoint = Point2<int>;
using PointD = Point2<double>;

/// Closed polygon with implicit closure (the first point is not repeated).
///
/// Traversal is counter-clockwise in the (x, y) frame the points are given in,
/// i.e. the signed shoelace area is non-negative. For pixel coordinates with y
/// pointing down this appears clockwise on screen.
template <typename T>
class BasicContour {
public:
    explicit BasicContour(std::vector<Point2<T>> points) : points_(std::move(points))
    {
        if (points_.size() < 3) {
            throw InvalidInput("contour needs at least 3 points, got " + std::to_string(points_.size()));
        }
    }

    const std::vector<Point2<T>>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    const Point2<T>& operator[](std::size_t i) const { return points_[i]; }

    friend bool operator==(const BasicContour&, const BasicContour&) = default;

private:
    std::vector<Point2<T>> points_;
};

using Contour = BasicContour<int>;
using ContourD = BasicContour<double>;

namespace detail {

template <typename T>
double cross(const Point2<T>& o, const Point2<T>& a, const Point2<T>& b)
{
    return (static_cast<double>(a.x) - o.x) * (static_cast<double>(b.y) - o.y) -
           (static_cast<double>(a.y) - o.y) * (static_cast<double>(b.x) - o.x);
}

} // namespace detail

/// Twice the signed shoelace area; positive for counter-clockwise traversal.
template <typename T>
double signed_area2(std::span<const Point2<T>> pts)
{
    double acc = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        acc += static_cast<double>(a.x) * b.y - static_cast<double>(b.x) * a.y;
    }
    return acc;
}

/// Absolute shoelace area of the closed polygon through `pts`.
template <typename T>
double polygon_area(std::span<const Point2<T>> pts)
{
    if (pts.size() < 3) {
        throw InvalidInput("polygon_area needs at least 3 points, got " + std::to_string(pts.size()));
    }
    return std::abs(signed_area2(pts)) * 0.5;
}

template <typename T>
double polygon_area(const BasicContour<T>& c)
{
    return polygon_area(std::span<const Point2<T>>(c.points()));
}

/// Convex hull by Andrew's monotone chain. Collinear points on hull edges are
/// dropped; the result is counter-clockwise starting from the lowest (x, y).
template <typename T>
BasicContour<T> convex_hull(std::span<const Point2<T>> input)
{
    std::vector<Point2<T>> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) {
        throw DegenerateHull("hull needs 3 distinct points");
    }

    std::vector<Point2<T>> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        const auto& p = pts[i];
        while (k >= lower && detail::cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    if (hull.size() < 3) {
        throw DegenerateHull("all points are collinear");
    }
    return BasicContour<T>(std::move(hull));
}

template <typename T>
BasicContour<T> convex_hull(const BasicContour<T>& c)
{
    return convex_hull(std::span<const Point2<T>>(c.points()));
}

/// Inside-or-on test against a counter-clockwise convex polygon.
template <typename T, typename U>
bool inside_convex(const BasicContour<T>& hull, const Point2<U>& p, double tol = 1e-9)
{
    const auto& h = hull.points();
    const PointD q{static_cast<double>(p.x), static_cast<double>(p.y)};
    for (std::size_t i = 0; i < h.size(); ++i) {
        const PointD a{static_cast<double>(h[i].x), static_cast<double>(h[i].y)};
        const auto& nb = h[(i + 1) % h.size()];
        const PointD b{static_cast<double>(nb.x), static_cast<double>(nb.y)};
        if (detail::cross(a, b, q) < -tol) return false;
    }
    return true;
}

/// Mean of the vertices.
template <typename T>
PointD vertex_mean(const BasicContour<T>& c)
{
    double sx = 0.0, sy = 0.0;
    for (const auto& p : c.points()) {
        sx += p.x;
        sy += p.y;
    }
    const auto n = static_cast<double>(c.size());
    return {sx / n, sy / n};
}

inline double distance(const PointD& a, const PointD& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace torchpilot
