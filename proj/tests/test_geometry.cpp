#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "torchpilot/geometry.hpp"

using namespace torchpilot;

namespace {

ContourD make(std::vector<PointD> pts) { return ContourD(std::move(pts)); }

// Brute-force hull: a distinct point is a hull vertex iff it lies in no
// closed triangle or segment spanned by the other points (Caratheodory).
std::vector<PointD> brute_hull_vertices(std::vector<PointD> pts)
{
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto cross = [](PointD o, PointD a, PointD b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
    auto on_segment = [&](PointD p, PointD a, PointD b) {
        return cross(a, b, p) == 0.0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
    };
    auto in_triangle = [&](PointD p, PointD a, PointD b, PointD c) {
        const double d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
        return (d1 >= 0 && d2 >= 0 && d3 >= 0) || (d1 <= 0 && d2 <= 0 && d3 <= 0);
    };
    std::vector<PointD> out;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        bool covered = false;
        for (std::size_t a = 0; a < n && !covered; ++a) {
            for (std::size_t b = a + 1; b < n && !covered; ++b) {
                if (a == i || b == i) continue;
                covered = on_segment(pts[i], pts[a], pts[b]);
                for (std::size_t c = b + 1; c < n && !covered; ++c) {
                    if (c == i || cross(pts[a], pts[b], pts[c]) == 0.0) continue;
                    covered = in_triangle(pts[i], pts[a], pts[b], pts[c]);
                }
            }
        }
        if (!covered) out.push_back(pts[i]);
    }
    return out;
}

} // namespace

TEST(Contour, RejectsFewerThanThreePoints)
{
    EXPECT_THROW(Contour(std::vector<PixelPoint>{{0, 0}, {1, 1}}), InvalidInput);
    EXPECT_NO_THROW(Contour(std::vector<PixelPoint>{{0, 0}, {1, 0}, {0, 1}}));
}

TEST(PolygonArea, AxisAlignedSquare)
{
    EXPECT_DOUBLE_EQ(polygon_area(make({{0, 0}, {10, 0}, {10, 10}, {0, 10}})), 100.0);
}

TEST(PolygonArea, RightTriangle)
{
    EXPECT_DOUBLE_EQ(polygon_area(make({{0, 0}, {4, 0}, {0, 3}})), 6.0);
}

TEST(PolygonArea, FewerThanThreePointsIsInvalid)
{
    const std::vector<PointD> two{{0, 0}, {1, 0}};
    EXPECT_THROW(polygon_area(std::span<const PointD>(two)), InvalidInput);
}

TEST(PolygonArea, OrientationIndependent)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PointD> pts;
        // star-shaped around the origin so the polygon is simple
        const int n = 3 + trial % 12;
        for (int k = 0; k < n; ++k) {
            const double a = 2 * std::numbers::pi * k / n;
            const double r = 5 + std::abs(u(rng));
            pts.push_back({r * std::cos(a), r * std::sin(a)});
        }
        auto rev = pts;
        std::reverse(rev.begin(), rev.end());
        EXPECT_DOUBLE_EQ(polygon_area(make(pts)), polygon_area(make(rev)));
        EXPECT_GT(signed_area2(std::span<const PointD>(pts)), 0.0);
        EXPECT_LT(signed_area2(std::span<const PointD>(rev)), 0.0);
    }
}

TEST(ConvexHull, SquareWithMidpointsGivesCorners)
{
    const auto hull = convex_hull(make({{0, 0}, {5, 0}, {10, 0}, {10, 5}, {10, 10}, {5, 10}, {0, 10}, {0, 5}}));
    auto pts = hull.points();
    std::sort(pts.begin(), pts.end());
    EXPECT_EQ(pts, (std::vector<PointD>{{0, 0}, {0, 10}, {10, 0}, {10, 10}}));
}

TEST(ConvexHull, TriangleIsIdempotent)
{
    const auto tri = make({{0, 0}, {4, 0}, {0, 3}});
    const auto hull = convex_hull(tri);
    EXPECT_EQ(hull.size(), 3u);
    EXPECT_DOUBLE_EQ(polygon_area(hull), 6.0);
    EXPECT_EQ(convex_hull(hull).points(), hull.points());
}

TEST(ConvexHull, FivePointStarMatchesBruteForce)
{
    std::vector<PointD> star;
    for (int k = 0; k < 10; ++k) {
        const double a = std::numbers::pi / 2 + k * std::numbers::pi / 5;
        const double r = k % 2 == 0 ? 20.0 : 8.0;
        star.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const auto hull = convex_hull(make(star));
    auto got = hull.points();
    std::sort(got.begin(), got.end());
    const auto expect = brute_hull_vertices(star);
    ASSERT_EQ(expect.size(), 5u);
    ASSERT_EQ(got.size(), expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_NEAR(got[i].x, expect[i].x, 1e-12);
        EXPECT_NEAR(got[i].y, expect[i].y, 1e-12);
    }
    EXPECT_GT(signed_area2(std::span<const PointD>(hull.points())), 0.0);
}

TEST(ConvexHull, CollinearPointsAreDegenerate)
{
    EXPECT_THROW(convex_hull(make({{0, 0}, {1, 1}, {2, 2}, {3, 3}})), DegenerateHull);
    EXPECT_THROW(convex_hull(make({{1, 1}, {1, 1}, {1, 1}})), DegenerateHull);
}

TEST(ConvexHull, RandomPointSetsProperties)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> u(-40, 40);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PixelPoint> pts;
        const int n = 3 + trial % 40;
        for (int k = 0; k < n; ++k) pts.push_back({u(rng), u(rng)});
        Contour c(pts);
        Contour hull(std::vector<PixelPoint>{{0, 0}, {1, 0}, {0, 1}});
        try {
            hull = convex_hull(c);
        } catch (const DegenerateHull&) {
            continue;
        }
        for (const auto& p : pts) EXPECT_TRUE(inside_convex(hull, p, 1e-9));
        EXPECT_GT(signed_area2(std::span<const PixelPoint>(hull.points())), 0.0);

        std::vector<PointD> dpts;
        for (const auto& p : pts) dpts.push_back({double(p.x), double(p.y)});
        const auto brute = brute_hull_vertices(dpts);
        auto got = hull.points();
        std::sort(got.begin(), got.end());
        got.erase(std::unique(got.begin(), got.end()), got.end());
        ASSERT_EQ(got.size(), brute.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].x, brute[i].x);
            EXPECT_EQ(got[i].y, brute[i].y);
        }
    }
}

TEST(ConvexHull, HullAreaBoundsPolygonArea)
{
    std::vector<PointD> star;
    for (int k = 0; k < 14; ++k) {
        const double a = k * std::numbers::pi / 7;
        const double r = k % 2 == 0 ? 30.0 : 11.0;
        star.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const auto c = make(star);
    EXPECT_GE(polygon_area(convex_hull(c)), polygon_area(c));
}

TEST(VertexMean, Square)
{
    const auto m = vertex_mean(make({{0, 0}, {2, 0}, {2, 2}, {0, 2}}));
    EXPECT_DOUBLE_EQ(m.x, 1.0);
    EXPECT_DOUBLE_EQ(m.y, 1.0);
    EXPECT_DOUBLE_EQ(distance({0, 0}, {3, 4}), 5.0);
}
