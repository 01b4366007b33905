#pragma once

// Synthetic camera: draws the bare torch flame for calibration, or the heat
// pool for a given pool_heat, optionally with light pollution, sparks and a
// residual heated trail.
//
// The pool is a star-notched polygon in three nested color bands. Its shape
// and size come from a lookup table built once per renderer so that the
// vision pipeline reads back roughly the ground-truth pool heat.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "torchpilot/error.hpp"
#include "torchpilot/features.hpp"
#include "torchpilot/geometry.hpp"
#include "torchpilot/imgproc.hpp"
#include "torchpilot/plant.hpp"

namespace torchpilot::plant {

using imgproc::Rgb;
using imgproc::RgbImage;

struct NoiseConfig {
    bool enabled = true;
    bool light_pollution = true;
    bool sparks = true;
    bool trail = true;
    int light_level = 25;           ///< constant additive background brightness
    int light_jitter = 20;          ///< extra per-pixel uniform brightness in [0, jitter]
    double spark_probability = 0.3; ///< per spark slot, per frame
    int max_sparks = 2;
    int spark_radius = 2;           ///< px
    int trail_half_width = 3;       ///< px

    static NoiseConfig off()
    {
        NoiseConfig n;
        n.enabled = false;
        return n;
    }

    void validate() const
    {
        if (light_level < 0 || light_jitter < 0 || light_level + light_jitter > 50) {
            throw InvalidInput("light_level + light_jitter must be in 0..=50");
        }
        if (!(spark_probability >= 0.0 && spark_probability <= 1.0)) {
            throw InvalidInput("spark_probability must be in [0, 1]");
        }
        if (max_sparks < 0 || spark_radius < 0 || trail_half_width < 0) {
            throw InvalidInput("spark and trail sizes must be >= 0");
        }
    }
};

/// Frame geometry, flame appearance and the heat -> (convexity, intensity)
/// targets the pool drawing is solved against.
struct RenderConfig {
    int width = 128;
    int height = 128;
    PointD flame_center{64.0, 64.0};
    std::array<double, 3> flame_radii{6.0, 10.0, 14.0}; ///< blue, green, red
    int star_points = 5;
    double star_rotation = 0.1;   ///< rad
    double green_scale = 1.3, green_offset = 2.0; ///< green outer = scale * blue + offset
    double red_scale = 1.6, red_offset = 4.0;
    double px_per_cm = 20.0;      ///< trail length per cm travelled

    // Target curve anchors.
    double nominal_heat = 0.6;
    double nominal_convexity = 0.95;
    double low_heat = 0.2;
    double low_convexity = 0.35;
    double max_convexity = 0.975;

    void validate() const
    {
        if (width <= 0 || height <= 0) throw InvalidInput("frame size must be positive");
        if (flame_center.x < 0 || flame_center.y < 0 || flame_center.x > width - 1 ||
            flame_center.y > height - 1) {
            throw InvalidInput("flame center must lie inside the frame");
        }
        if (!(0.0 < flame_radii[0] && flame_radii[0] < flame_radii[1] && flame_radii[1] < flame_radii[2])) {
            throw InvalidInput("flame radii must be increasing and positive");
        }
        if (star_points < 3) throw InvalidInput("star_points must be >= 3");
        if (!(green_scale >= 1.0 && red_scale >= green_scale && green_offset >= 0.0 && red_offset >= green_offset)) {
            throw InvalidInput("band layout must nest blue < green < red");
        }
        if (!(0.0 < low_heat && low_heat < nominal_heat && nominal_heat < 1.0)) {
            throw InvalidInput("heat anchors must satisfy 0 < low_heat < nominal_heat < 1");
        }
        if (!(0.0 < low_convexity && low_convexity < nominal_convexity && nominal_convexity <= max_convexity &&
              max_convexity <= 1.0)) {
            throw InvalidInput("convexity anchors must be increasing in (0, 1]");
        }
        if (!(2.0 * low_heat - low_convexity > 0.0)) throw InvalidInput("low anchor implies non-positive intensity");
        if (!(px_per_cm >= 0.0)) throw InvalidInput("px_per_cm must be >= 0");
    }
};

/// Convexity and normalized intensity the pool is drawn to show.
struct PoolTargets {
    double convexity;
    double intensity;
};

/// Piecewise-linear targets; with lambda = 1/2 their mean equals `heat` on
/// [low_heat, (1 + max_convexity) / 2]. Above that intensity saturates at 1.
inline PoolTargets pool_targets(double heat, const RenderConfig& cfg)
{
    const double h = std::clamp(heat, 0.0, 1.0);
    if (h < cfg.low_heat) {
        const double i_low = 2.0 * cfg.low_heat - cfg.low_convexity;
        return {cfg.low_convexity, i_low * h / cfg.low_heat};
    }
    double c;
    if (h < cfg.nominal_heat) {
        c = cfg.low_convexity + (cfg.nominal_convexity - cfg.low_convexity) * (h - cfg.low_heat) /
                                    (cfg.nominal_heat - cfg.low_heat);
    } else {
        c = cfg.nominal_convexity +
            (cfg.max_convexity - cfg.nominal_convexity) * (h - cfg.nominal_heat) / (1.0 - cfg.nominal_heat);
    }
    return {c, std::min(1.0, 2.0 * h - c)};
}

class PoolRenderer {
public:
    static constexpr std::size_t kTableSize = 257;

    PoolRenderer(RenderConfig cfg, features::IntensityParams intensity)
        : cfg_(cfg), intensity_(intensity)
    {
        cfg_.validate();
        intensity_.validate();
        half_angle_ = std::numbers::pi / cfg_.star_points;
        precompute_pixels();
        baseline_ = analytic_flame_intensity();
        build_table();
    }

    const RenderConfig& config() const noexcept { return cfg_; }

    /// Star inner/outer radius ratio and blue outer radius for a pool heat.
    struct Geometry {
        double inner_ratio = 1.0;
        double blue_radius = 0.0;
    };

    Geometry geometry(double heat) const
    {
        const double h = std::clamp(heat, 0.0, 1.0) * static_cast<double>(kTableSize - 1);
        const auto k = std::min(static_cast<std::size_t>(h), kTableSize - 2);
        const double f = h - static_cast<double>(k);
        return {table_[k].inner_ratio + f * (table_[k + 1].inner_ratio - table_[k].inner_ratio),
                table_[k].blue_radius + f * (table_[k + 1].blue_radius - table_[k].blue_radius)};
    }

    /// Deterministic in (state, cal_mode, noise, seed).
    RgbImage render(const PlantState& state, bool cal_mode, const NoiseConfig& noise, std::uint64_t seed) const
    {
        RgbImage img(cfg_.width, cfg_.height);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          cal_mode ? 1u : 0u};
        std::mt19937_64 rng(seq);

        if (cal_mode) {
            draw_flame(img);
        } else {
            if (noise.enabled && noise.trail) draw_trail(img, state.position, noise.trail_half_width);
            if (!state.extinguished && state.pool_heat > 0.0) draw_pool(img, geometry(state.pool_heat));
            if (noise.enabled && noise.sparks) draw_sparks(img, noise, rng);
        }
        if (noise.enabled && noise.light_pollution) add_light(img, noise, rng);
        return img;
    }

    static constexpr Rgb kBlue{205, 215, 255};
    static constexpr Rgb kGreen{150, 250, 120};
    static constexpr Rgb kRed{250, 135, 60};
    static constexpr Rgb kTrail{212, 70, 40};
    static constexpr Rgb kSpark{255, 255, 255};

private:
    struct PixelPolar {
        double r;
        double cos_a; // angle to the nearest star tip
        double sin_a;
    };

    static double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

    void precompute_pixels()
    {
        polar_.resize(static_cast<std::size_t>(cfg_.width) * static_cast<std::size_t>(cfg_.height));
        const double period = 2.0 * half_angle_;
        for (int y = 0; y < cfg_.height; ++y) {
            for (int x = 0; x < cfg_.width; ++x) {
                const double dx = x - cfg_.flame_center.x;
                const double dy = y - cfg_.flame_center.y;
                const double a = tip_angle(std::atan2(dy, dx), period);
                polar_[static_cast<std::size_t>(y) * cfg_.width + x] = {std::hypot(dx, dy), std::cos(a), std::sin(a)};
            }
        }
    }

    double tip_angle(double theta, double period) const
    {
        double u = std::fmod(theta - cfg_.star_rotation + half_angle_, period);
        if (u < 0.0) u += period;
        return std::abs(u - half_angle_);
    }

    /// Radius of the unit star along a ray at angle `a` from a tip.
    double star_factor(double cos_a, double sin_a, double q) const
    {
        const double ex = q * std::cos(half_angle_) - 1.0;
        const double ey = q * std::sin(half_angle_);
        return ey / (cos_a * ey - sin_a * ex);
    }

    // Gaussian mass inside r < rho along one ray, per unit angle.
    double ray_mass(double rho, double k) const { return (1.0 - std::exp(-rho * rho * k)) / (2.0 * k); }

    double ray_k(double theta) const
    {
        const double c = std::cos(theta), s = std::sin(theta);
        return c * c / (2.0 * intensity_.sigma_x * intensity_.sigma_x) +
               s * s / (2.0 * intensity_.sigma_y * intensity_.sigma_y);
    }

    double analytic_flame_intensity() const
    {
        constexpr int kRays = 720;
        const double dtheta = 2.0 * std::numbers::pi / kRays;
        const auto& r = cfg_.flame_radii;
        double total = 0.0;
        for (int j = 0; j < kRays; ++j) {
            const double k = ray_k((j + 0.5) * dtheta);
            const double mb = ray_mass(r[0] + 0.5, k), mg = ray_mass(r[1] + 0.5, k), mr = ray_mass(r[2] + 0.5, k);
            total += intensity_.w_blue * mb + intensity_.w_green * (mg - mb) + intensity_.w_red * (mr - mg);
        }
        return total * dtheta;
    }

    double analytic_pool_intensity(double q, double blue_radius) const
    {
        if (blue_radius <= 0.0) return 0.0;
        double total = 0.0;
        for (const auto& ray : rays_) {
            const double t = star_factor(ray.cos_a, ray.sin_a, q);
            const double mb = ray_mass(blue_radius * t + 0.5, ray.k);
            const double mg = ray_mass((cfg_.green_scale * blue_radius + cfg_.green_offset) * t + 0.5, ray.k);
            const double mr = ray_mass((cfg_.red_scale * blue_radius + cfg_.red_offset) * t + 0.5, ray.k);
            total += intensity_.w_blue * mb + intensity_.w_green * (mg - mb) + intensity_.w_red * (mr - mg);
        }
        return total * (2.0 * std::numbers::pi / static_cast<double>(rays_.size()));
    }

    void build_table()
    {
        constexpr int kRays = 360;
        const double period = 2.0 * half_angle_;
        rays_.clear();
        for (int j = 0; j < kRays; ++j) {
            const double theta = (j + 0.5) * 2.0 * std::numbers::pi / kRays;
            const double a = tip_angle(theta, period);
            rays_.push_back({std::cos(a), std::sin(a), ray_k(theta)});
        }

        const double r_max = 0.5 * std::max(cfg_.width, cfg_.height);
        for (std::size_t n = 0; n < kTableSize; ++n) {
            const double heat = static_cast<double>(n) / static_cast<double>(kTableSize - 1);
            const auto target = pool_targets(heat, cfg_);
            const double q = std::min(target.convexity, 1.0) * std::cos(half_angle_);
            const double wanted = intensity_.i_sat * target.intensity * baseline_;
            double lo = 0.0, hi = r_max;
            if (wanted <= 0.0) {
                hi = 0.0;
            } else {
                for (int it = 0; it < 48; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (analytic_pool_intensity(q, mid) < wanted ? lo : hi) = mid;
                }
            }
            table_[n] = {q, 0.5 * (lo + hi)};
        }
    }

    void draw_flame(RgbImage& img) const
    {
        const auto& r = cfg_.flame_radii;
        for (int y = 0; y < cfg_.height; ++y) {
            for (int x = 0; x < cfg_.width; ++x) {
                const double d = polar_[static_cast<std::size_t>(y) * cfg_.width + x].r;
                if (d < r[0] + 0.5) img.at(x, y) = kBlue;
                else if (d < r[1] + 0.5) img.at(x, y) = kGreen;
                else if (d < r[2] + 0.5) img.at(x, y) = kRed;
            }
        }
    }

    void draw_pool(RgbImage& img, const Geometry& g) const
    {
        if (g.blue_radius <= 0.0) return;
        const double rb = g.blue_radius;
        const double rg = cfg_.green_scale * rb + cfg_.green_offset;
        const double rr = cfg_.red_scale * rb + cfg_.red_offset;
        for (int y = 0; y < cfg_.height; ++y) {
            for (int x = 0; x < cfg_.width; ++x) {
                const auto& p = polar_[static_cast<std::size_t>(y) * cfg_.width + x];
                if (p.r >= rr + 0.5) continue;
                const double t = star_factor(p.cos_a, p.sin_a, g.inner_ratio);
                if (p.r < rb * t + 0.5) img.at(x, y) = kBlue;
                else if (p.r < rg * t + 0.5) img.at(x, y) = kGreen;
                else if (p.r < rr * t + 0.5) img.at(x, y) = kRed;
            }
        }
    }

    // Residual heat left on the already-cut path, extending opposite the
    // direction of travel.
    void draw_trail(RgbImage& img, double position, int half_width) const
    {
        const double length = std::max(0.0, position) * cfg_.px_per_cm;
        const int xc = static_cast<int>(std::lround(cfg_.flame_center.x));
        const int yc = static_cast<int>(std::lround(cfg_.flame_center.y));
        const int x_end = std::max(0, xc - static_cast<int>(std::lround(length)));
        for (int y = std::max(0, yc - half_width); y <= std::min(cfg_.height - 1, yc + half_width); ++y) {
            for (int x = x_end; x <= xc; ++x) img.at(x, y) = kTrail;
        }
    }

    // Sparks land at least two sigma from the flame centroid.
    void draw_sparks(RgbImage& img, const NoiseConfig& noise, std::mt19937_64& rng) const
    {
        const double min_dist = 2.0 * std::max(intensity_.sigma_x, intensity_.sigma_y);
        for (int s = 0; s < noise.max_sparks; ++s) {
            const double roll = uniform01(rng);
            const double angle = 2.0 * std::numbers::pi * uniform01(rng);
            const double dist = min_dist + noise.spark_radius + 0.5 + 10.0 * uniform01(rng);
            if (roll >= noise.spark_probability) continue;
            const double sx = cfg_.flame_center.x + dist * std::cos(angle);
            const double sy = cfg_.flame_center.y + dist * std::sin(angle);
            const int r = noise.spark_radius;
            for (int y = static_cast<int>(std::floor(sy)) - r; y <= static_cast<int>(std::ceil(sy)) + r; ++y) {
                for (int x = static_cast<int>(std::floor(sx)) - r; x <= static_cast<int>(std::ceil(sx)) + r; ++x) {
                    if (!img.contains(x, y) || std::hypot(x - sx, y - sy) >= r + 0.5) continue;
                    img.at(x, y) = kSpark;
                }
            }
        }
    }

    void add_light(RgbImage& img, const NoiseConfig& noise, std::mt19937_64& rng) const
    {
        const auto span = static_cast<std::uint64_t>(noise.light_jitter) + 1;
        for (auto& p : img.pixels()) {
            const int add = noise.light_level + static_cast<int>(rng() % span);
            p.r = static_cast<std::uint8_t>(std::min(255, p.r + add));
            p.g = static_cast<std::uint8_t>(std::min(255, p.g + add));
            p.b = static_cast<std::uint8_t>(std::min(255, p.b + add));
        }
    }

    struct Ray {
        double cos_a;
        double sin_a;
        double k;
    };

    RenderConfig cfg_;
    features::IntensityParams intensity_;
    double half_angle_ = 0.0;
    double baseline_ = 0.0;
    std::vector<PixelPolar> polar_;
    std::vector<Ray> rays_;
    std::array<Geometry, kTableSize> table_{};
};

} // namespace torchpilot::plant
