#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "torchpilot/features.hpp"
#include "torchpilot/geometry.hpp"
#include "torchpilot/imgproc.hpp"

namespace testsupport {

using torchpilot::PointD;
using torchpilot::imgproc::Color;
using torchpilot::imgproc::QuantizedImage;

/// Midpoint rule: pixel (x, y) is inside iff its centre is closer than r + 0.5.
inline void fill_disc(QuantizedImage& img, double cx, double cy, double r, Color code)
{
    const double lim = (r + 0.5) * (r + 0.5);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy < lim) img.at(x, y) = code;
        }
    }
}

/// Even-odd test of pixel centres against a closed polygon.
inline bool inside_polygon(const std::vector<PointD>& poly, double x, double y)
{
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

inline void fill_polygon(QuantizedImage& img, const std::vector<PointD>& poly, Color code)
{
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (inside_polygon(poly, x, y)) img.at(x, y) = code;
        }
    }
}

/// Square of side `side` centred at the origin with a triangular notch cut
/// into the top edge: base = the full edge, apex `depth * side` inside.
/// The notch removes depth / 2 of the area and leaves the hull unchanged.
inline std::vector<PointD> notched_square(double side, double depth)
{
    const double h = side / 2.0;
    return {{-h, -h}, {h, -h}, {h, h}, {0.0, h - depth * side}, {-h, h}};
}

inline std::vector<PointD> transform(const std::vector<PointD>& poly, double angle, double scale, PointD offset)
{
    std::vector<PointD> out;
    const double c = std::cos(angle), s = std::sin(angle);
    for (const auto& p : poly) {
        out.push_back({offset.x + scale * (c * p.x - s * p.y), offset.y + scale * (s * p.x + c * p.y)});
    }
    return out;
}

/// Convexity of the largest Blue contour in `img`.
inline double largest_contour_convexity(const QuantizedImage& img)
{
    const auto contours = torchpilot::imgproc::extract_contours(img, Color::Blue);
    if (contours.empty()) throw torchpilot::FeatureUnavailable("no contour");
    std::size_t best = 0;
    for (std::size_t k = 1; k < contours.size(); ++k) {
        if (torchpilot::polygon_area(contours[k]) > torchpilot::polygon_area(contours[best])) best = k;
    }
    return torchpilot::features::pool_convexity(contours[best]);
}

/// Rasterize a polygon (pixel-centre rule) into a frame that fits it with margin.
inline double raster_convexity(const std::vector<PointD>& poly)
{
    double lo_x = poly[0].x, hi_x = poly[0].x, lo_y = poly[0].y, hi_y = poly[0].y;
    for (const auto& p : poly) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    std::vector<PointD> shifted;
    for (const auto& p : poly) shifted.push_back({p.x - lo_x + 4.0, p.y - lo_y + 4.0});
    QuantizedImage img(static_cast<int>(hi_x - lo_x) + 9, static_cast<int>(hi_y - lo_y) + 9);
    fill_polygon(img, shifted, Color::Blue);
    return largest_contour_convexity(img);
}

inline double disc_convexity(double r)
{
    const int size = static_cast<int>(2 * r) + 9;
    QuantizedImage img(size, size);
    fill_disc(img, size / 2, size / 2, r, Color::Blue);
    return largest_contour_convexity(img);
}

inline QuantizedImage random_frame(std::mt19937_64& rng, int w, int h)
{
    QuantizedImage img(w, h);
    std::uniform_int_distribution<int> code(0, 3);
    for (auto& p : img.pixels()) p = static_cast<Color>(code(rng));
    return img;
}

/// Per-pixel exponential, no factorization.
inline double naive_intensity(const QuantizedImage& img, PointD c, const torchpilot::features::IntensityParams& p)
{
    double total = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double w = 0.0;
            switch (img.at(x, y)) {
            case Color::Red: w = p.w_red; break;
            case Color::Green: w = p.w_green; break;
            case Color::Blue: w = p.w_blue; break;
            case Color::Black: break;
            }
            const double dx = x - c.x, dy = y - c.y;
            total += w * std::exp(-(dx * dx) / (2 * p.sigma_x * p.sigma_x) - (dy * dy) / (2 * p.sigma_y * p.sigma_y));
        }
    }
    return total;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("torchpilot_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testsupport
