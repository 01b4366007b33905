#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "torchpilot/error.hpp"
#include "torchpilot/geometry.hpp"
#include "torchpilot/imgproc.hpp"

namespace torchpilot::features {

using imgproc::Color;
using imgproc::QuantizedImage;

/// Gaussian decay and color weighting used by the pool intensity.
struct IntensityParams {
    double sigma_x = 30.0; ///< px
    double sigma_y = 30.0; ///< px
    double w_red = 0.01;
    double w_green = 0.04;
    double w_blue = 0.16;
    double i_sat = 10.0;   ///< saturation, as a multiple of the calibration baseline
    double epsilon = 1e-6; ///< lower clamp on normalized intensity

    void validate() const
    {
        if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) throw InvalidInput("sigma_x and sigma_y must be > 0");
        if (!(0.0 < w_red && w_red < w_green && w_green < w_blue)) {
            throw InvalidInput("color weights must satisfy 0 < w_red < w_green < w_blue");
        }
        if (!(i_sat >= 1.0)) throw InvalidInput("i_sat must be >= 1");
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must be in (0, 1)");
    }

    friend bool operator==(const IntensityParams&, const IntensityParams&) = default;
};

/// Torch-flame centroid and the baseline intensity I_cal it produces.
struct Calibration {
    PointD centroid;
    double baseline_intensity = 0.0;

    void validate(int width, int height) const
    {
        if (!(baseline_intensity > 0.0)) throw InvalidInput("baseline intensity must be > 0");
        if (centroid.x < 0.0 || centroid.y < 0.0 || centroid.x > width - 1 || centroid.y > height - 1) {
            throw InvalidInput("calibration centroid lies outside the frame");
        }
    }
};

struct PoolFeatures {
    double convexity;
    double intensity;
    double state;
    double lambda;
};

/// Area ratio of the pool contour to its convex hull, in (0, 1].
inline double pool_convexity(const Contour& pool)
{
    double hull_area = 0.0;
    try {
        hull_area = polygon_area(convex_hull(pool));
    } catch (const DegenerateHull& e) {
        throw FeatureUnavailable(std::string("pool convexity: ") + e.what());
    }
    const double area = polygon_area(pool);
    if (!(area > 0.0)) throw FeatureUnavailable("pool convexity: contour has zero area");
    return std::min(1.0, area / hull_area);
}

/// exp[-(x-xc)^2 / (2 sx^2) - (y-yc)^2 / (2 sy^2)]
inline double gaussian_weight(PointD p, const Calibration& cal, const IntensityParams& params)
{
    const double dx = p.x - cal.centroid.x;
    const double dy = p.y - cal.centroid.y;
    return std::exp(-dx * dx / (2.0 * params.sigma_x * params.sigma_x) -
                    dy * dy / (2.0 * params.sigma_y * params.sigma_y));
}

inline double color_weight(Color code, const IntensityParams& params)
{
    switch (code) {
    case Color::Red: return params.w_red;
    case Color::Green: return params.w_green;
    case Color::Blue: return params.w_blue;
    case Color::Black: break;
    }
    return 0.0;
}

/// I = sum over pixels of gaussian_weight * color_weight, over the full frame.
///
/// The axis-aligned Gaussian factors as gx(x) * gy(y), so only
/// width + height exponentials are evaluated.
inline double raw_intensity(const QuantizedImage& img, const Calibration& cal, const IntensityParams& params)
{
    std::vector<double> gx(static_cast<std::size_t>(img.width()));
    std::vector<double> gy(static_cast<std::size_t>(img.height()));
    for (int x = 0; x < img.width(); ++x) {
        const double dx = x - cal.centroid.x;
        gx[static_cast<std::size_t>(x)] = std::exp(-dx * dx / (2.0 * params.sigma_x * params.sigma_x));
    }
    for (int y = 0; y < img.height(); ++y) {
        const double dy = y - cal.centroid.y;
        gy[static_cast<std::size_t>(y)] = std::exp(-dy * dy / (2.0 * params.sigma_y * params.sigma_y));
    }
    const double weights[4] = {0.0, params.w_red, params.w_green, params.w_blue};

    double total = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        double row = 0.0;
        for (int x = 0; x < img.width(); ++x) {
            row += gx[static_cast<std::size_t>(x)] * weights[static_cast<int>(img.at(x, y))];
        }
        total += gy[static_cast<std::size_t>(y)] * row;
    }
    return total;
}

/// Color-weighted mean position of the non-Black pixels.
inline std::optional<PointD> weighted_centroid(const QuantizedImage& img, const IntensityParams& params)
{
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double w = color_weight(img.at(x, y), params);
            sw += w;
            sx += w * x;
            sy += w * y;
        }
    }
    if (sw <= 0.0) return std::nullopt;
    return PointD{sx / sw, sy / sw};
}

/// Flame centroid is the per-frame weighted centroid averaged over frames;
/// I_cal is the mean raw intensity evaluated at that centroid.
inline Calibration calibrate(std::span<const QuantizedImage> frames, const IntensityParams& params)
{
    params.validate();
    if (frames.empty()) throw CalibrationFailed("no calibration frames");
    const int w = frames.front().width();
    const int h = frames.front().height();

    PointD mean{0.0, 0.0};
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (frames[k].width() != w || frames[k].height() != h) {
            throw InvalidInput("calibration frames differ in size");
        }
        const auto c = weighted_centroid(frames[k], params);
        if (!c) throw CalibrationFailed("calibration frame " + std::to_string(k) + " shows no flame");
        mean.x += c->x;
        mean.y += c->y;
    }
    const auto n = static_cast<double>(frames.size());
    Calibration cal{{mean.x / n, mean.y / n}, 0.0};

    double total = 0.0;
    for (const auto& f : frames) total += raw_intensity(f, cal, params);
    cal.baseline_intensity = total / n;
    if (!(cal.baseline_intensity > 0.0)) throw CalibrationFailed("baseline intensity is zero");
    return cal;
}

/// i = min(i_sat, I / I_cal) / i_sat, clamped below at epsilon.
inline double normalized_intensity(double raw, const Calibration& cal, const IntensityParams& params)
{
    if (!(cal.baseline_intensity > 0.0)) throw InvalidInput("baseline intensity must be > 0");
    const double relative = raw / cal.baseline_intensity;
    return std::max(params.epsilon, std::min(params.i_sat, relative) / params.i_sat);
}

inline double combustion_state(double convexity, double intensity, double lambda)
{
    if (!(convexity > 0.0 && convexity <= 1.0)) throw InvalidInput("convexity must be in (0, 1]");
    if (!(intensity > 0.0 && intensity <= 1.0)) throw InvalidInput("intensity must be in (0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must be in [0, 1]");
    return lambda * convexity + (1.0 - lambda) * intensity;
}

inline PoolFeatures make_features(double convexity, double intensity, double lambda)
{
    return {convexity, intensity, combustion_state(convexity, intensity, lambda), lambda};
}

// ---------------------------------------------------------------------------
// Per-frame measurement with sample hold.

struct PerceptionParams {
    imgproc::Cutoffs cutoffs;
    IntensityParams intensity;
    double lambda = 0.5;
    double distance_exponent = 1.0;
    int hold_steps = 5; ///< consecutive unavailable frames tolerated before pool-lost

    void validate() const
    {
        cutoffs.validate();
        intensity.validate();
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must be in [0, 1]");
        if (!(distance_exponent > 0.0)) throw InvalidInput("distance_exponent must be > 0");
        if (hold_steps < 0) throw InvalidInput("hold_steps must be >= 0");
    }
};

/// Raw per-frame outcome. `convexity` is empty when no usable blue contour
/// exists; `extinguished` is set when the frame carries no heat at all.
struct FrameMeasurement {
    std::optional<double> convexity;
    double intensity = 0.0;
    bool extinguished = false;
};

inline FrameMeasurement measure_quantized(const QuantizedImage& q, const Calibration& cal,
                                          const PerceptionParams& params)
{
    FrameMeasurement m;
    const double raw = raw_intensity(q, cal, params.intensity);
    m.intensity = normalized_intensity(raw, cal, params.intensity);
    m.extinguished = raw <= 0.0;

    const auto contours = imgproc::extract_contours(q, Color::Blue);
    if (auto pool = imgproc::select_pool_contour(contours, cal.centroid, params.distance_exponent)) {
        try {
            m.convexity = pool_convexity(*pool);
        } catch (const FeatureUnavailable&) {
        }
    }
    return m;
}

inline FrameMeasurement measure_frame(const imgproc::RgbImage& frame, const Calibration& cal,
                                      const PerceptionParams& params)
{
    return measure_quantized(imgproc::quantize(frame, params.cutoffs), cal, params);
}

/// Holds the last valid (c, i) sample across short feature dropouts.
class SampleHold {
public:
    explicit SampleHold(int max_hold) : max_hold_(max_hold) {}

    struct Output {
        std::optional<PoolFeatures> features; ///< empty once the hold budget is exhausted
        bool pool_lost = false;               ///< this frame was unusable
    };

    Output update(const FrameMeasurement& m, double lambda)
    {
        if (m.convexity && !m.extinguished) {
            last_ = make_features(*m.convexity, m.intensity, lambda);
            missed_ = 0;
            return {last_, false};
        }
        ++missed_;
        if (!last_ || missed_ > max_hold_) return {std::nullopt, true};
        return {last_, true};
    }

    void seed(const PoolFeatures& f)
    {
        last_ = f;
        missed_ = 0;
    }

    int missed() const noexcept { return missed_; }

private:
    int max_hold_;
    int missed_ = 0;
    std::optional<PoolFeatures> last_;
};

} // namespace torchpilot::features
