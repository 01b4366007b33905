#pragma once

// Proportional acceleration law on the combustion-state error, with
// acceleration and velocity safety clamps.

#include <algorithm>

#include "torchpilot/error.hpp"

namespace torchpilot::control {

struct ControllerParams {
    double gain = 200.0;         ///< k
    double desired_state = 0.6;  ///< s*
    double v_max = 2.0;          ///< cm/s
    double a_max = 0.8;          ///< cm/s^2
    double dt = 0.05;            ///< s, control period

    void validate() const
    {
        if (!(gain > 0.0)) throw InvalidInput("gain must be > 0");
        if (!(desired_state > 0.0 && desired_state <= 1.0)) throw InvalidInput("desired_state must be in (0, 1]");
        if (!(v_max > 0.0)) throw InvalidInput("v_max must be > 0");
        if (!(a_max > 0.0)) throw InvalidInput("a_max must be > 0");
        if (!(dt > 0.0)) throw InvalidInput("dt must be > 0");
    }

    friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

/// e_s = s* - s
inline double state_error(double s_star, double s) { return s_star - s; }

/// -k e_s, clamped to [-a_max, a_max]. Positive (speed up) when the pool is
/// over-burning, negative when it is starved.
inline double control_accel(double error, const ControllerParams& p)
{
    return std::clamp(-p.gain * error, -p.a_max, p.a_max);
}

/// Zero-order hold over one period, clamped to [0, v_max].
inline double apply_velocity_update(double v, double accel, const ControllerParams& p)
{
    return std::clamp(v + accel * p.dt, 0.0, p.v_max);
}

/// V(e_s) = e_s^2 / 2
inline double lyapunov(double error) { return 0.5 * error * error; }

/// Convenience record bundling the law with its parameters.
class Controller {
public:
    explicit Controller(ControllerParams params) : params_(params) { params_.validate(); }

    const ControllerParams& params() const noexcept { return params_; }

    double accel(double s) const { return control_accel(state_error(params_.desired_state, s), params_); }

    double next_velocity(double v, double s) const { return apply_velocity_update(v, accel(s), params_); }

private:
    ControllerParams params_;
};

} // namespace torchpilot::control
