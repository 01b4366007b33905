#pragma once

// Synthetic ground truth for the heat pool and the plate being cut.
//
// Every dynamic constant here is a simulation choice: the real process is
// combustion on steel, which this model only mimics qualitatively.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "torchpilot/error.hpp"

namespace torchpilot::plant {

/// Plate geometry and its velocity-to-combustion response.
struct PlateSpec {
    double thickness = 0.375;   ///< in
    double path_length = 30.0;  ///< cm
    double tau = 1.2;           ///< s, pool thermal time constant
    double beta = 0.0;          ///< s/cm, speed sensitivity of phi
    double s0 = 1.0;            ///< phi(0)
    double reseal_rate = 0.3;   ///< depth fraction / s lost behind an over-heated pool

    /// Solve beta so that phi(v_star) == s_star.
    static PlateSpec calibrated(double thickness, double path_length, double tau, double v_star, double s_star,
                                double s0, double reseal_rate)
    {
        if (!(v_star > 0.0)) throw InvalidInput("v_star must be > 0");
        if (!(s_star > 0.0 && s_star < s0)) throw InvalidInput("s_star must be in (0, s0)");
        PlateSpec p{thickness, path_length, tau, std::log(s0 / s_star) / v_star, s0, reseal_rate};
        p.validate();
        return p;
    }

    void validate() const
    {
        if (!(thickness > 0.0)) throw InvalidInput("thickness must be > 0");
        if (!(path_length > 0.0)) throw InvalidInput("path_length must be > 0");
        if (!(tau > 0.0)) throw InvalidInput("tau must be > 0");
        if (!(beta > 0.0)) throw InvalidInput("beta must be > 0");
        if (!(s0 > 0.0 && s0 <= 1.0)) throw InvalidInput("s0 must be in (0, 1]");
        if (!(reseal_rate >= 0.0)) throw InvalidInput("reseal_rate must be >= 0");
    }
};

/// Steady-state combustion at torch speed v: s0 * exp(-beta * v).
inline double phi(double v, const PlateSpec& plate)
{
    return plate.s0 * std::exp(-plate.beta * v);
}

/// Speed at which phi reaches `s`.
inline double phi_inverse(double s, const PlateSpec& plate)
{
    return std::log(plate.s0 / s) / plate.beta;
}

/// Thresholds are on the normalized pool-heat scale.
struct PlantParams {
    double v_limit = 2.0;           ///< cm/s, hard velocity clamp inside step()
    double theta_burn = 0.45;       ///< bypass cutting needs at least this heat
    double theta_reseal = 0.85;     ///< over-heat: cut behind the torch re-seals
    double theta_ext = 0.15;        ///< below this the pool goes out for good
    double footprint = 0.3;         ///< cm, width of the cutting jet on the path
    double penetration_rate = 10.0; ///< in/s of depth per unit pool heat
    double reseal_reach = 1.0;      ///< cm behind the footprint affected by re-sealing
    double bin_size = 0.1;          ///< cm, cut-profile resolution
    double overburn_cap = 1.0;      ///< extra kerf width, in thickness units, burned past full depth

    void validate() const
    {
        if (!(v_limit > 0.0)) throw InvalidInput("v_limit must be > 0");
        if (!(theta_ext >= 0.0 && theta_ext < theta_burn && theta_burn < theta_reseal)) {
            throw InvalidInput("thresholds must satisfy 0 <= theta_ext < theta_burn < theta_reseal");
        }
        if (!(footprint > 0.0)) throw InvalidInput("footprint must be > 0");
        if (!(penetration_rate > 0.0)) throw InvalidInput("penetration_rate must be > 0");
        if (!(reseal_reach >= 0.0)) throw InvalidInput("reseal_reach must be >= 0");
        if (!(bin_size > 0.0)) throw InvalidInput("bin_size must be > 0");
        if (!(overburn_cap >= 0.0)) throw InvalidInput("overburn_cap must be >= 0");
    }
};

struct PlantState {
    double position = 0.0;  ///< cm along the path
    double velocity = 0.0;  ///< cm/s, >= 0
    double pool_heat = 0.0; ///< in [0, s0]
    std::vector<double> cut_depth; ///< fraction of thickness per bin, in [0, 1]
    std::vector<double> overburn;  ///< burn beyond full depth; re-sealing fills this first
    bool bypass_engaged = false;
    bool preheated = false;
    bool extinguished = false;

    friend bool operator==(const PlantState&, const PlantState&) = default;
};

inline PlantState initial_state(const PlateSpec& plate, const PlantParams& params)
{
    PlantState s;
    const auto bins = static_cast<std::size_t>(std::llround(plate.path_length / params.bin_size));
    s.cut_depth.assign(std::max<std::size_t>(bins, 1), 0.0);
    s.overburn.assign(s.cut_depth.size(), 0.0);
    return s;
}

namespace detail {

/// Time within [0, dt] that a torch moving from x0 at speed v keeps `c`
/// inside the footprint [x - half, x + half].
inline double dwell(double c, double x0, double v, double dt, double half)
{
    if (v <= 0.0) return std::abs(c - x0) <= half ? dt : 0.0;
    const double t_in = (c - half - x0) / v;
    const double t_out = (c + half - x0) / v;
    return std::max(0.0, std::min(dt, t_out) - std::max(0.0, t_in));
}

} // namespace detail

/// Advance one explicit-Euler step with commanded acceleration `accel`.
inline PlantState step(const PlantState& state, double accel, double dt, const PlateSpec& plate,
                       const PlantParams& params)
{
    if (!(dt > 0.0)) throw InvalidInput("dt must be > 0");

    PlantState next = state;
    next.velocity = std::clamp(state.velocity + accel * dt, 0.0, params.v_limit);
    const double x0 = state.position;
    next.position = x0 + next.velocity * dt;

    const double target = phi(next.velocity, plate);
    next.pool_heat = std::clamp(state.pool_heat + dt / plate.tau * (target - state.pool_heat), 0.0, plate.s0);

    if (!next.bypass_engaged) return next;

    if (next.pool_heat < params.theta_ext) next.extinguished = true;

    const double half = 0.5 * params.footprint;
    const double bin = params.bin_size;
    const auto nbins = static_cast<long>(next.cut_depth.size());
    auto bin_center = [bin](long b) { return (static_cast<double>(b) + 0.5) * bin; };

    if (!next.extinguished && next.pool_heat >= params.theta_burn) {
        const double lo = std::min(x0, next.position) - half;
        const double hi = std::max(x0, next.position) + half;
        const long b0 = std::max(0L, static_cast<long>(std::floor(lo / bin)));
        const long b1 = std::min(nbins - 1, static_cast<long>(std::ceil(hi / bin)));
        const double rate = params.penetration_rate * next.pool_heat / plate.thickness;
        for (long b = b0; b <= b1; ++b) {
            const double t = detail::dwell(bin_center(b), x0, next.velocity, dt, half);
            const auto k = static_cast<std::size_t>(b);
            const double total = next.cut_depth[k] + next.overburn[k] + rate * t;
            next.cut_depth[k] = std::min(1.0, total);
            next.overburn[k] = std::clamp(total - 1.0, 0.0, params.overburn_cap);
        }
    }

    if (next.pool_heat >= params.theta_reseal && plate.reseal_rate > 0.0) {
        const double hi = next.position - half;
        const double lo = hi - params.reseal_reach;
        const long b0 = std::max(0L, static_cast<long>(std::ceil(lo / bin - 0.5)));
        const long b1 = std::min(nbins - 1, static_cast<long>(std::ceil(hi / bin - 0.5)) - 1);
        for (long b = b0; b <= b1; ++b) {
            const auto k = static_cast<std::size_t>(b);
            double loss = plate.reseal_rate * dt;
            const double from_kerf = std::min(loss, next.overburn[k]);
            next.overburn[k] -= from_kerf;
            loss -= from_kerf;
            next.cut_depth[k] = std::max(0.0, next.cut_depth[k] - loss);
        }
    }
    return next;
}

} // namespace torchpilot::plant
