#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "torchpilot/error.hpp"
#include "torchpilot/geometry.hpp"

namespace torchpilot::imgproc {

struct Rgb {
    std::uint8_t r{};
    std::uint8_t g{};
    std::uint8_t b{};

    friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

/// Quantized color codes, ordered by increasing temperature.
enum class Color : std::uint8_t { Black = 0, Red = 1, Green = 2, Blue = 3 };

inline const char* to_string(Color c)
{
    switch (c) {
    case Color::Black: return "black";
    case Color::Red: return "red";
    case Color::Green: return "green";
    case Color::Blue: return "blue";
    }
    return "?";
}

/// Row-major pixel grid with validated, non-zero dimensions.
template <typename Pixel>
class Image {
public:
    Image(int width, int height, Pixel fill = Pixel{}) : Image(width, height, std::vector<Pixel>())
    {
        pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Image(int width, int height, std::vector<Pixel> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels))
    {
        if (width <= 0 || height <= 0) {
            throw InvalidInput("image dimensions must be positive, got " + std::to_string(width) + "x" +
                               std::to_string(height));
        }
        if (!pixels_.empty() &&
            pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw InvalidInput("pixel count does not match " + std::to_string(width) + "x" + std::to_string(height));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    const Pixel& at(int x, int y) const { return pixels_[index(x, y)]; }
    Pixel& at(int x, int y) { return pixels_[index(x, y)]; }

    std::span<const Pixel> pixels() const noexcept { return pixels_; }
    std::span<Pixel> pixels() noexcept { return pixels_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<Pixel> pixels_;
};

using RgbImage = Image<Rgb>;
using QuantizedImage = Image<Color>;

/// Per-channel binary-threshold levels. A channel is "on" when it strictly
/// exceeds its cutoff.
struct Cutoffs {
    int red = 200;
    int green = 200;
    int blue = 200;

    void validate() const
    {
        for (int c : {red, green, blue}) {
            if (c < 1 || c > 255) {
                throw InvalidInput("cutoff must be in 1..=255, got " + std::to_string(c));
            }
        }
    }

    friend bool operator==(const Cutoffs&, const Cutoffs&) = default;
};

/// Threshold one pixel. Overlapping channels resolve to the hottest color
/// (Blue > Green > Red).
inline Color quantize_pixel(const Rgb& p, const Cutoffs& cut)
{
    if (p.b > cut.blue) return Color::Blue;
    if (p.g > cut.green) return Color::Green;
    if (p.r > cut.red) return Color::Red;
    return Color::Black;
}

inline QuantizedImage quantize(const RgbImage& img, const Cutoffs& cut = {})
{
    cut.validate();
    QuantizedImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = quantize_pixel(src[i], cut);
    return out;
}

inline Rgb primary(Color c)
{
    switch (c) {
    case Color::Red: return {255, 0, 0};
    case Color::Green: return {0, 255, 0};
    case Color::Blue: return {0, 0, 255};
    case Color::Black: break;
    }
    return {0, 0, 0};
}

/// Render codes back to pure primaries.
inline RgbImage to_rgb(const QuantizedImage& q)
{
    RgbImage out(q.width(), q.height());
    auto src = q.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = primary(src[i]);
    return out;
}

inline std::array<std::size_t, 4> color_histogram(const QuantizedImage& q)
{
    std::array<std::size_t, 4> h{};
    for (Color c : q.pixels()) ++h[static_cast<std::size_t>(c)];
    return h;
}

namespace detail {

// Clockwise on screen (y down), starting west.
inline constexpr std::array<PixelPoint, 8> kMoore = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

inline int moore_index(int dx, int dy)
{
    for (int k = 0; k < 8; ++k) {
        if (kMoore[k].x == dx && kMoore[k].y == dy) return k;
    }
    return -1;
}

/// Moore-neighbour tracing with Jacob's stopping criterion. `start` must be
/// the first pixel of its component in raster order.
template <typename IsFg>
std::vector<PixelPoint> trace_boundary(PixelPoint start, IsFg&& is_fg)
{
    std::vector<PixelPoint> out{start};
    PixelPoint cur = start;
    int search_from = 1; // backtrack is west of start

    std::optional<int> first_move;
    for (std::size_t guard = 0;; ++guard) {
        int found = -1;
        for (int j = 0; j < 8; ++j) {
            const int k = (search_from + j) % 8;
            if (is_fg(cur.x + kMoore[k].x, cur.y + kMoore[k].y)) {
                found = k;
                break;
            }
        }
        if (found < 0) return out; // isolated pixel

        if (cur == start) {
            if (first_move && *first_move == found) {
                out.pop_back(); // start was re-appended on arrival
                break;
            }
            if (!first_move) first_move = found;
        }
        const PixelPoint back{cur.x + kMoore[(found + 7) % 8].x, cur.y + kMoore[(found + 7) % 8].y};
        const PixelPoint next{cur.x + kMoore[found].x, cur.y + kMoore[found].y};
        search_from = (moore_index(back.x - next.x, back.y - next.y) + 1) % 8;
        cur = next;
        out.push_back(cur);
        if (guard > 64u * 1024u * 1024u) throw Error("boundary trace did not terminate");
    }
    return out;
}

} // namespace detail

/// One outer contour per 8-connected component of `target` pixels, traced by
/// Moore-neighbour border following. Components with fewer than 3 distinct
/// boundary pixels are dropped. Order follows the raster position of each
/// component's first pixel.
inline std::vector<Contour> extract_contours(const QuantizedImage& img, Color target)
{
    if (target == Color::Black) {
        throw InvalidInput("contour target must be Red, Green or Blue");
    }
    const int w = img.width();
    const int h = img.height();
    std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + x; };

    std::vector<Contour> out;
    std::vector<PixelPoint> stack;
    int next_label = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (img.at(x, y) != target || label[idx(x, y)] != 0) continue;
            const int lab = ++next_label;
            label[idx(x, y)] = lab;
            stack.assign(1, {x, y});
            while (!stack.empty()) {
                const PixelPoint p = stack.back();
                stack.pop_back();
                for (const auto& d : detail::kMoore) {
                    const int nx = p.x + d.x, ny = p.y + d.y;
                    if (!img.contains(nx, ny) || img.at(nx, ny) != target || label[idx(nx, ny)] != 0) continue;
                    label[idx(nx, ny)] = lab;
                    stack.push_back({nx, ny});
                }
            }

            auto is_fg = [&](int px, int py) {
                return img.contains(px, py) && label[idx(px, py)] == lab;
            };
            auto boundary = detail::trace_boundary({x, y}, is_fg);

            std::vector<PixelPoint> distinct = boundary;
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            if (distinct.size() < 3) continue;

            if (signed_area2(std::span<const PixelPoint>(boundary)) < 0.0) {
                std::reverse(boundary.begin() + 1, boundary.end());
            }
            out.emplace_back(std::move(boundary));
        }
    }
    return out;
}

/// Pick the heat-pool contour: maximize area / (1 + d^exponent) where d is the
/// distance from the contour's vertex mean to the flame centroid. Ties go to
/// the smaller distance, then to the lexicographically smallest first point.
inline std::optional<Contour> select_pool_contour(std::span<const Contour> contours, PointD centroid,
                                                  double distance_exponent = 1.0)
{
    std::optional<std::size_t> best;
    double best_score = 0.0, best_dist = 0.0;
    for (std::size_t i = 0; i < contours.size(); ++i) {
        const double dist = distance(vertex_mean(contours[i]), centroid);
        const double score = polygon_area(contours[i]) / (1.0 + std::pow(dist, distance_exponent));
        bool take = !best;
        if (!take) {
            if (score != best_score) {
                take = score > best_score;
            } else if (dist != best_dist) {
                take = dist < best_dist;
            } else {
                take = contours[i][0] < contours[*best][0];
            }
        }
        if (take) {
            best = i;
            best_score = score;
            best_dist = dist;
        }
    }
    if (!best) return std::nullopt;
    return contours[*best];
}

} // namespace torchpilot::imgproc
