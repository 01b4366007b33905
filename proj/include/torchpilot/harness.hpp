#pragma once

// Experiment workflow: ignite -> calibrate -> preheat -> combustion -> shutdown,
// with telemetry logging and cut inspection.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "torchpilot/control.hpp"
#include "torchpilot/error.hpp"
#include "torchpilot/features.hpp"
#include "torchpilot/imgproc.hpp"
#include "torchpilot/plant.hpp"
#include "torchpilot/render.hpp"

namespace torchpilot::harness {

enum class Phase { Ignite, Calibrate, Preheat, Combustion, Shutdown };

inline const char* to_string(Phase p)
{
    switch (p) {
    case Phase::Ignite: return "ignite";
    case Phase::Calibrate: return "calibrate";
    case Phase::Preheat: return "preheat";
    case Phase::Combustion: return "combustion";
    case Phase::Shutdown: return "shutdown";
    }
    return "?";
}

/// Enforces the workflow order. Combustion additionally needs a finished
/// calibration and a preheated surface.
class PhaseMachine {
public:
    Phase current() const noexcept { return current_; }

    void mark_calibrated() { calibrated_ = true; }
    void mark_preheated() { preheated_ = true; }

    void advance(Phase next)
    {
        if (static_cast<int>(next) != static_cast<int>(current_) + 1) {
            throw InvalidInput(std::string("illegal phase transition ") + to_string(current_) + " -> " +
                               to_string(next));
        }
        if (next == Phase::Combustion && (!calibrated_ || !preheated_)) {
            throw InvalidInput("combustion requires calibration and preheat");
        }
        current_ = next;
    }

    /// Any phase may bail out straight to shutdown.
    void shutdown() { current_ = Phase::Shutdown; }

private:
    Phase current_ = Phase::Ignite;
    bool calibrated_ = false;
    bool preheated_ = false;
};

enum class Mode { Slow, Fast, Controlled, Constant };

inline const char* to_string(Mode m)
{
    switch (m) {
    case Mode::Slow: return "slow";
    case Mode::Fast: return "fast";
    case Mode::Controlled: return "controlled";
    case Mode::Constant: return "constant";
    }
    return "?";
}

inline constexpr double kSlowSpeed = 0.2; // cm/s
inline constexpr double kFastSpeed = 3.2; // cm/s

enum class AbortCause { CalibrationFailed, PoolLost, PathTimeout, PreheatTimeout };

inline const char* to_string(AbortCause c)
{
    switch (c) {
    case AbortCause::CalibrationFailed: return "calibration-failed";
    case AbortCause::PoolLost: return "pool-lost";
    case AbortCause::PathTimeout: return "path-timeout";
    case AbortCause::PreheatTimeout: return "preheat-timeout";
    }
    return "?";
}

struct TelemetryRecord {
    double t;        ///< s since preheat start, end of the step
    double position; ///< cm
    double velocity; ///< cm/s
    double accel;    ///< cm/s^2
    double c;
    double i;
    double s;
    double s_star;
    Phase phase;
    bool pool_lost;
};

struct RunResult {
    Mode mode = Mode::Controlled;
    double thickness = 0.0;
    double v_const = 0.0;
    std::vector<TelemetryRecord> telemetry;
    std::vector<double> cut_profile;
    double success_ratio = 0.0;
    std::size_t combustion_steps = 0;
    std::optional<features::Calibration> calibration;
    std::optional<AbortCause> abort;
    std::string abort_detail;

    bool aborted() const noexcept { return abort.has_value(); }
};

/// Where c, i, s come from during the loop.
enum class Sensing {
    Vision,     ///< render -> quantize -> features
    GroundTruth ///< s equals the plant's pool heat; no camera noise or pixelation
};

using FrameSink = std::function<void(const imgproc::RgbImage&, Phase, std::size_t index)>;

struct ExperimentConfig {
    plant::PlateSpec plate;
    plant::PlantParams plant;
    plant::RenderConfig render;
    plant::NoiseConfig noise;
    features::PerceptionParams perception;
    control::ControllerParams controller;
    double initial_velocity_fraction = 0.5; ///< of v*
    double preheat_fraction = 0.9;          ///< of phi(0)
    int calibration_frames = 10;
    double timeout_factor = 10.0;           ///< x nominal traversal time
    std::uint64_t seed = 1;
    Sensing sensing = Sensing::Vision;
    FrameSink frame_sink;
    /// Overrides the start velocity of a controlled run (default fraction * v*).
    std::optional<double> initial_velocity;

    void validate() const
    {
        plate.validate();
        plant.validate();
        render.validate();
        noise.validate();
        perception.validate();
        controller.validate();
        if (!(initial_velocity_fraction >= 0.0)) throw InvalidInput("initial_velocity_fraction must be >= 0");
        if (!(preheat_fraction > 0.0 && preheat_fraction < 1.0)) throw InvalidInput("preheat_fraction must be in (0, 1)");
        if (calibration_frames < 1) throw InvalidInput("calibration_frames must be >= 1");
        if (!(timeout_factor >= 1.0)) throw InvalidInput("timeout_factor must be >= 1");
        if (!(controller.desired_state < plate.s0)) throw InvalidInput("desired_state must be below phi(0)");
    }

    /// Desired speed implied by the plate response and s*.
    double v_star() const { return plant::phi_inverse(controller.desired_state, plate); }
};

/// Fraction of path bins cut through (depth >= 1 within 1e-6).
inline double success_ratio(std::span<const double> cut_profile)
{
    if (cut_profile.empty()) throw InvalidInput("cut profile is empty");
    const auto full = std::count_if(cut_profile.begin(), cut_profile.end(), [](double d) { return d >= 1.0 - 1e-6; });
    return static_cast<double>(full) / static_cast<double>(cut_profile.size());
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t frame_seed(std::uint64_t run_seed, std::uint64_t stream, std::uint64_t index)
{
    return splitmix64(run_seed ^ splitmix64(stream ^ splitmix64(index)));
}

class Runner {
public:
    Runner(const ExperimentConfig& cfg, Mode mode, double v_const)
        : cfg_(cfg), mode_(mode), v_const_(v_const), renderer_(cfg.render, cfg.perception.intensity),
          hold_(cfg.perception.hold_steps)
    {
        result_.mode = mode;
        result_.thickness = cfg.plate.thickness;
        result_.v_const = v_const;
        plant_ = cfg.plant;
        plant_.v_limit = mode == Mode::Controlled ? cfg.controller.v_max : std::max(v_const, cfg.controller.v_max);
    }

    RunResult run()
    {
        state_ = plant::initial_state(cfg_.plate, plant_);
        try {
            phases_.advance(Phase::Calibrate); // torch lit
            if (calibrate()) {
                phases_.advance(Phase::Preheat);
                if (preheat()) {
                    phases_.advance(Phase::Combustion);
                    combustion();
                }
            }
        } catch (const CalibrationFailed& e) {
            fail(AbortCause::CalibrationFailed, e.what());
        }
        state_.bypass_engaged = false;
        phases_.shutdown();
        result_.cut_profile = state_.cut_depth;
        result_.success_ratio = success_ratio(result_.cut_profile);
        return std::move(result_);
    }

private:
    void fail(AbortCause cause, std::string detail)
    {
        result_.abort = cause;
        result_.abort_detail = std::move(detail);
    }

    void emit(const imgproc::RgbImage& frame, Phase phase, std::size_t index) const
    {
        if (cfg_.frame_sink) cfg_.frame_sink(frame, phase, index);
    }

    bool calibrate()
    {
        std::vector<imgproc::QuantizedImage> frames;
        for (int k = 0; k < cfg_.calibration_frames; ++k) {
            const auto frame = renderer_.render(state_, true, cfg_.noise, frame_seed(cfg_.seed, 1, k));
            emit(frame, Phase::Calibrate, static_cast<std::size_t>(k));
            frames.push_back(imgproc::quantize(frame, cfg_.perception.cutoffs));
        }
        cal_ = features::calibrate(frames, cfg_.perception.intensity);
        result_.calibration = cal_;
        phases_.mark_calibrated();
        return true;
    }

    struct Sample {
        std::optional<features::PoolFeatures> features;
        bool pool_lost = false;
        double c = 0.0, i = 0.0, s = 0.0;
    };

    Sample sense(std::uint64_t stream, std::size_t index, Phase phase)
    {
        Sample out;
        const double lambda = cfg_.perception.lambda;
        if (cfg_.sensing == Sensing::GroundTruth) {
            if (cfg_.frame_sink) {
                emit(renderer_.render(state_, false, cfg_.noise, frame_seed(cfg_.seed, stream, index)), phase, index);
            }
            const double h = std::max(state_.pool_heat, cfg_.perception.intensity.epsilon);
            out.features = features::make_features(h, h, lambda);
            hold_.seed(*out.features);
        } else {
            const auto frame = renderer_.render(state_, false, cfg_.noise, frame_seed(cfg_.seed, stream, index));
            emit(frame, phase, index);
            const auto m = features::measure_frame(frame, *cal_, cfg_.perception);
            const auto held = hold_.update(m, lambda);
            out.features = held.features;
            out.pool_lost = held.pool_lost;
            if (!out.features) {
                out.c = m.convexity.value_or(0.0);
                out.i = m.intensity;
                out.s = lambda * out.c + (1.0 - lambda) * out.i;
                return out;
            }
        }
        out.c = out.features->convexity;
        out.i = out.features->intensity;
        out.s = out.features->state;
        return out;
    }

    void log(double accel, const Sample& sample, Phase phase)
    {
        result_.telemetry.push_back({t_, state_.position, state_.velocity, accel, sample.c, sample.i, sample.s,
                                     cfg_.controller.desired_state, phase, sample.pool_lost});
    }

    bool preheat()
    {
        const double dt = cfg_.controller.dt;
        const double threshold = cfg_.preheat_fraction * plant::phi(0.0, cfg_.plate);
        const auto max_ticks = static_cast<std::size_t>(std::ceil(100.0 * cfg_.plate.tau / dt));
        for (std::size_t k = 0; state_.pool_heat < threshold; ++k) {
            if (k >= max_ticks) {
                fail(AbortCause::PreheatTimeout, "pool never reached preheat threshold");
                return false;
            }
            const auto sample = sense(2, k, Phase::Preheat);
            state_ = plant::step(state_, 0.0, dt, cfg_.plate, plant_);
            t_ += dt;
            log(0.0, sample, Phase::Preheat);
        }
        state_.preheated = true;
        phases_.mark_preheated();
        return true;
    }

    void combustion()
    {
        const double dt = cfg_.controller.dt;
        const double v_star = cfg_.v_star();
        state_.bypass_engaged = true;
        state_.velocity = mode_ == Mode::Controlled
                              ? std::min(cfg_.controller.v_max,
                                         cfg_.initial_velocity.value_or(cfg_.initial_velocity_fraction * v_star))
                              : v_const_;

        const double end = cfg_.plate.path_length + 0.5 * plant_.footprint;
        const double timeout = cfg_.timeout_factor * cfg_.plate.path_length / v_star;
        const auto max_ticks = static_cast<std::size_t>(std::ceil(timeout / dt));
        for (std::size_t k = 0; state_.position < end; ++k) {
            if (k >= max_ticks) {
                fail(AbortCause::PathTimeout, "torch did not reach the path end within " +
                                                  std::to_string(timeout) + " s");
                return;
            }
            const auto sample = sense(3, k, Phase::Combustion);
            double accel = 0.0;
            if (mode_ == Mode::Controlled) {
                if (!sample.features) {
                    log(0.0, sample, Phase::Combustion);
                    ++result_.combustion_steps;
                    fail(AbortCause::PoolLost, "no usable pool contour for more than " +
                                                   std::to_string(cfg_.perception.hold_steps) + " frames");
                    return;
                }
                accel = control::control_accel(
                    control::state_error(cfg_.controller.desired_state, sample.features->state), cfg_.controller);
            }
            state_ = plant::step(state_, accel, dt, cfg_.plate, plant_);
            t_ += dt;
            log(accel, sample, Phase::Combustion);
            ++result_.combustion_steps;
        }
    }

    const ExperimentConfig& cfg_;
    Mode mode_;
    double v_const_;
    plant::PlantParams plant_;
    plant::PoolRenderer renderer_;
    features::SampleHold hold_;
    PhaseMachine phases_;
    plant::PlantState state_;
    std::optional<features::Calibration> cal_;
    double t_ = 0.0;
    RunResult result_;
};

} // namespace detail

/// Closed-loop run: the vision-based controller sets the torch speed.
inline RunResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    return detail::Runner(cfg, Mode::Controlled, 0.0).run();
}

/// Open-loop run at a fixed torch speed.
inline RunResult run_constant_speed(const ExperimentConfig& cfg, double v_const, Mode label = Mode::Constant)
{
    cfg.validate();
    if (!(v_const >= 0.0)) throw InvalidInput("v_const must be >= 0");
    if (label == Mode::Controlled) throw InvalidInput("constant-speed run cannot be labelled controlled");
    return detail::Runner(cfg, label, v_const).run();
}

inline RunResult run_mode(const ExperimentConfig& cfg, Mode mode, double v_const = 0.0)
{
    switch (mode) {
    case Mode::Controlled: return run_experiment(cfg);
    case Mode::Slow: return run_constant_speed(cfg, kSlowSpeed, Mode::Slow);
    case Mode::Fast: return run_constant_speed(cfg, kFastSpeed, Mode::Fast);
    case Mode::Constant: return run_constant_speed(cfg, v_const, Mode::Constant);
    }
    throw InvalidInput("unknown mode");
}

struct RunSpec {
    ExperimentConfig config;
    Mode mode = Mode::Controlled;
    double v_const = 0.0;
};

/// Execute independent runs on up to `jobs` threads; results keep input order.
inline std::vector<RunResult> run_all(std::span<const RunSpec> specs, unsigned jobs)
{
    std::vector<RunResult> results(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < specs.size();) {
            try {
                results[k] = run_mode(specs[k].config, specs[k].mode, specs[k].v_const);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(specs.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < n; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

struct NormalizedRecord {
    double t;
    double position;
    double velocity;
    double accel;
    double c;
    double i;
    double s;
    double s_star;
};

/// Position by its maximum, velocity by v_max, acceleration by a_max; the
/// pool features are already normalized.
inline std::vector<NormalizedRecord> normalize(const RunResult& result, const control::ControllerParams& params)
{
    double max_pos = 0.0;
    for (const auto& r : result.telemetry) max_pos = std::max(max_pos, r.position);
    if (!(max_pos > 0.0)) throw InvalidInput("cannot normalize a run with zero path length");
    std::vector<NormalizedRecord> out;
    out.reserve(result.telemetry.size());
    for (const auto& r : result.telemetry) {
        out.push_back({r.t, r.position / max_pos, r.velocity / params.v_max, r.accel / params.a_max, r.c, r.i, r.s,
                       r.s_star});
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_telemetry_csv(std::ostream& out, std::span<const TelemetryRecord> rows)
{
    out << "t,position,velocity,accel,c,i,s,s_star,phase,pool_lost\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& r : rows) {
        out << r.t << ',' << r.position << ',' << r.velocity << ',' << r.accel << ',' << r.c << ',' << r.i << ','
            << r.s << ',' << r.s_star << ',' << to_string(r.phase) << ',' << (r.pool_lost ? 1 : 0) << '\n';
    }
}

inline std::string thickness_label(double thickness)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << thickness;
    return os.str();
}

inline void write_summary_csv(std::ostream& out, std::span<const RunResult> results)
{
    out << "mode,thickness,success_ratio,steps,aborted,cause\n";
    for (const auto& r : results) {
        out << to_string(r.mode) << ',' << thickness_label(r.thickness) << ',' << std::fixed << std::setprecision(6)
            << r.success_ratio << ',' << r.combustion_steps << ',' << (r.aborted() ? 1 : 0) << ','
            << (r.abort ? to_string(*r.abort) : "") << '\n';
    }
}

} // namespace torchpilot::harness
