#pragma once

// JSON run configuration: defaults, loading with validation, serialization,
// and expansion into per-run experiment configs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torchpilot/control.hpp"
#include "torchpilot/error.hpp"
#include "torchpilot/features.hpp"
#include "torchpilot/harness.hpp"
#include "torchpilot/plant.hpp"
#include "torchpilot/render.hpp"

namespace torchpilot::config {

using json = nlohmann::json;

/// Plant-tuning constants for one plate thickness.
struct PlateDefaults {
    double thickness; ///< in
    double tau;       ///< s
    double v_star;    ///< cm/s, speed at which phi reaches s*
    double reseal_rate;

    friend bool operator==(const PlateDefaults&, const PlateDefaults&) = default;
};

inline std::vector<PlateDefaults> default_plates()
{
    return {{0.250, 0.8, 1.00, 0.0}, {0.375, 1.2, 0.85, 0.3}, {0.500, 1.6, 0.75, 0.6}};
}

struct RunConfig {
    control::ControllerParams controller;
    double c_star = 0.95;
    double i_star = 0.25;
    std::optional<double> desired_state_override; ///< controller.desired_state, when set
    features::PerceptionParams perception;

    plant::PlantParams plant;
    double path_length = 30.0;
    double s0 = 1.0;
    std::vector<PlateDefaults> plates = default_plates();

    plant::NoiseConfig noise;
    plant::RenderConfig render;

    bool suite = false;
    harness::Mode mode = harness::Mode::Controlled;
    double thickness = 0.375;
    double v_const = 0.85;
    std::uint64_t seed = 1;
    std::optional<std::string> out_dir;
    bool dump_frames = false;
    int jobs = 0; ///< 0: one per hardware thread
    double initial_velocity_fraction = 0.5;
    double preheat_fraction = 0.9;
    int calibration_frames = 10;
    double timeout_factor = 10.0;
    harness::Sensing sensing = harness::Sensing::Vision;

    /// s* = lambda c* + (1 - lambda) i*, unless set explicitly.
    double desired_state() const
    {
        if (desired_state_override) return *desired_state_override;
        return perception.lambda * c_star + (1.0 - perception.lambda) * i_star;
    }

    const PlateDefaults& plate(double thick) const
    {
        for (const auto& p : plates) {
            if (std::abs(p.thickness - thick) < 1e-9) return p;
        }
        throw ConfigValidationError("thickness " + harness::thickness_label(thick) +
                                    " must match a configured plate");
    }

    void validate() const;
};

namespace detail {

inline std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(path);
    while (std::getline(in, part, '.')) parts.push_back(part);
    return parts;
}

template <class E>
E parse_enum(const std::string& text, std::initializer_list<E> values, const std::string& key)
{
    for (E v : values) {
        if (text == harness::to_string(v)) return v;
    }
    throw ConfigValidationError(key + ": unknown value '" + text + "'");
}

inline const char* to_string(harness::Sensing s)
{
    return s == harness::Sensing::Vision ? "vision" : "ground_truth";
}

/// Reads typed values out of a JSON tree and remembers which keys it used.
class Reader {
public:
    explicit Reader(const json& root) : root_(root) {}

    template <class T>
    void field(const std::string& path, T& value)
    {
        used_.insert(path);
        const json* node = find(path);
        if (node) assign(path, *node, value);
    }

    void check_unknown() const { walk(root_, ""); }

private:
    const json* find(const std::string& path) const
    {
        const json* node = &root_;
        for (const auto& part : split_path(path)) {
            if (!node->is_object()) return nullptr;
            auto it = node->find(part);
            if (it == node->end()) return nullptr;
            node = &*it;
        }
        return node;
    }

    void walk(const json& node, const std::string& prefix) const
    {
        if (!node.is_object()) {
            throw ConfigValidationError((prefix.empty() ? std::string("config") : prefix) + " must be an object");
        }
        for (auto it = node.begin(); it != node.end(); ++it) {
            const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
            if (used_.count(path)) continue;
            bool is_section = false;
            for (const auto& u : used_) {
                if (u.rfind(path + ".", 0) == 0) {
                    is_section = true;
                    break;
                }
            }
            if (!is_section) throw ConfigValidationError("unknown key '" + path + "'");
            walk(it.value(), path);
        }
    }

    static void assign(const std::string& key, const json& node, double& out)
    {
        if (!node.is_number()) throw ConfigValidationError(key + " must be a number");
        out = node.get<double>();
    }

    static void assign(const std::string& key, const json& node, int& out)
    {
        if (!node.is_number_integer()) throw ConfigValidationError(key + " must be an integer");
        const auto v = node.get<std::int64_t>();
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            throw ConfigValidationError(key + " is out of range");
        }
        out = static_cast<int>(v);
    }

    static void assign(const std::string& key, const json& node, std::uint64_t& out)
    {
        if (!node.is_number_unsigned()) throw ConfigValidationError(key + " must be a non-negative integer");
        out = node.get<std::uint64_t>();
    }

    static void assign(const std::string& key, const json& node, bool& out)
    {
        if (!node.is_boolean()) throw ConfigValidationError(key + " must be true or false");
        out = node.get<bool>();
    }

    static void assign(const std::string& key, const json& node, std::optional<double>& out)
    {
        if (node.is_null()) {
            out.reset();
            return;
        }
        double v = 0.0;
        assign(key, node, v);
        out = v;
    }

    static void assign(const std::string& key, const json& node, std::optional<std::string>& out)
    {
        if (node.is_null()) {
            out.reset();
            return;
        }
        if (!node.is_string()) throw ConfigValidationError(key + " must be a string");
        out = node.get<std::string>();
    }

    static void assign(const std::string& key, const json& node, harness::Mode& out)
    {
        if (!node.is_string()) throw ConfigValidationError(key + " must be a string");
        out = parse_enum(node.get<std::string>(),
                         {harness::Mode::Slow, harness::Mode::Fast, harness::Mode::Controlled,
                          harness::Mode::Constant},
                         key);
    }

    static void assign(const std::string& key, const json& node, harness::Sensing& out)
    {
        if (!node.is_string()) throw ConfigValidationError(key + " must be a string");
        const auto text = node.get<std::string>();
        if (text == "vision") {
            out = harness::Sensing::Vision;
        } else if (text == "ground_truth") {
            out = harness::Sensing::GroundTruth;
        } else {
            throw ConfigValidationError(key + ": unknown value '" + text + "'");
        }
    }

    static void assign(const std::string& key, const json& node, PointD& out)
    {
        std::array<double, 2> xy{};
        assign_array(key, node, xy);
        out = {xy[0], xy[1]};
    }

    template <std::size_t N>
    static void assign(const std::string& key, const json& node, std::array<double, N>& out)
    {
        assign_array(key, node, out);
    }

    template <std::size_t N>
    static void assign_array(const std::string& key, const json& node, std::array<double, N>& out)
    {
        if (!node.is_array() || node.size() != N) {
            throw ConfigValidationError(key + " must be an array of " + std::to_string(N) + " numbers");
        }
        for (std::size_t k = 0; k < N; ++k) assign(key + "[" + std::to_string(k) + "]", node[k], out[k]);
    }

    static void assign(const std::string& key, const json& node, std::vector<PlateDefaults>& out)
    {
        if (!node.is_array()) throw ConfigValidationError(key + " must be an array");
        std::vector<PlateDefaults> plates;
        for (std::size_t k = 0; k < node.size(); ++k) {
            const std::string item = key + "[" + std::to_string(k) + "]";
            const json& p = node[k];
            if (!p.is_object()) throw ConfigValidationError(item + " must be an object");
            PlateDefaults d{0.0, 0.0, 0.0, 0.0};
            const std::pair<const char*, double*> fields[] = {
                {"thickness", &d.thickness}, {"tau", &d.tau}, {"v_star", &d.v_star}, {"reseal_rate", &d.reseal_rate}};
            for (auto it = p.begin(); it != p.end(); ++it) {
                bool known = false;
                for (const auto& [name, ptr] : fields) known = known || it.key() == name;
                if (!known) throw ConfigValidationError("unknown key '" + item + "." + it.key() + "'");
            }
            for (const auto& [name, ptr] : fields) {
                if (!p.contains(name)) throw ConfigValidationError(item + "." + name + " is required");
                assign(item + "." + name, p.at(name), *ptr);
            }
            plates.push_back(d);
        }
        out = std::move(plates);
    }

    const json& root_;
    std::set<std::string> used_;
};

/// Builds the JSON tree from typed values.
class Writer {
public:
    template <class T>
    void field(const std::string& path, const T& value)
    {
        json* node = &root_;
        for (const auto& part : split_path(path)) node = &(*node)[part];
        store(*node, value);
    }

    json take() { return std::move(root_); }

private:
    template <class T>
    static void store(json& node, const T& v)
    {
        node = v;
    }

    template <class T>
    static void store(json& node, const std::optional<T>& v)
    {
        if (v) {
            node = *v;
        } else {
            node = nullptr;
        }
    }

    static void store(json& node, harness::Mode m) { node = harness::to_string(m); }
    static void store(json& node, harness::Sensing s) { node = to_string(s); }
    static void store(json& node, const PointD& p) { node = json::array({p.x, p.y}); }

    static void store(json& node, const std::vector<PlateDefaults>& plates)
    {
        node = json::array();
        for (const auto& p : plates) {
            node.push_back({{"thickness", p.thickness}, {"tau", p.tau}, {"v_star", p.v_star},
                            {"reseal_rate", p.reseal_rate}});
        }
    }

    json root_ = json::object();
};

/// Single list of every config key, shared by loading and serialization.
template <class V, class C>
void visit(V& v, C& c)
{
    v.field("controller.gain", c.controller.gain);
    v.field("controller.desired_state", c.desired_state_override);
    v.field("controller.v_max", c.controller.v_max);
    v.field("controller.a_max", c.controller.a_max);
    v.field("controller.dt", c.controller.dt);

    v.field("features.c_star", c.c_star);
    v.field("features.i_star", c.i_star);
    v.field("features.lambda", c.perception.lambda);
    v.field("features.sigma_x", c.perception.intensity.sigma_x);
    v.field("features.sigma_y", c.perception.intensity.sigma_y);
    v.field("features.w_red", c.perception.intensity.w_red);
    v.field("features.w_green", c.perception.intensity.w_green);
    v.field("features.w_blue", c.perception.intensity.w_blue);
    v.field("features.i_sat", c.perception.intensity.i_sat);
    v.field("features.epsilon", c.perception.intensity.epsilon);
    v.field("features.distance_exponent", c.perception.distance_exponent);
    v.field("features.hold_steps", c.perception.hold_steps);
    v.field("features.cutoffs.red", c.perception.cutoffs.red);
    v.field("features.cutoffs.green", c.perception.cutoffs.green);
    v.field("features.cutoffs.blue", c.perception.cutoffs.blue);

    v.field("plant.path_length", c.path_length);
    v.field("plant.s0", c.s0);
    v.field("plant.theta_burn", c.plant.theta_burn);
    v.field("plant.theta_reseal", c.plant.theta_reseal);
    v.field("plant.theta_ext", c.plant.theta_ext);
    v.field("plant.footprint", c.plant.footprint);
    v.field("plant.penetration_rate", c.plant.penetration_rate);
    v.field("plant.reseal_reach", c.plant.reseal_reach);
    v.field("plant.bin_size", c.plant.bin_size);
    v.field("plant.overburn_cap", c.plant.overburn_cap);
    v.field("plant.plates", c.plates);

    v.field("noise.enabled", c.noise.enabled);
    v.field("noise.light_pollution", c.noise.light_pollution);
    v.field("noise.sparks", c.noise.sparks);
    v.field("noise.trail", c.noise.trail);
    v.field("noise.light_level", c.noise.light_level);
    v.field("noise.light_jitter", c.noise.light_jitter);
    v.field("noise.spark_probability", c.noise.spark_probability);
    v.field("noise.max_sparks", c.noise.max_sparks);
    v.field("noise.spark_radius", c.noise.spark_radius);
    v.field("noise.trail_half_width", c.noise.trail_half_width);

    v.field("render.width", c.render.width);
    v.field("render.height", c.render.height);
    v.field("render.flame_center", c.render.flame_center);
    v.field("render.flame_radii", c.render.flame_radii);
    v.field("render.px_per_cm", c.render.px_per_cm);

    v.field("run.suite", c.suite);
    v.field("run.mode", c.mode);
    v.field("run.thickness", c.thickness);
    v.field("run.v_const", c.v_const);
    v.field("run.seed", c.seed);
    v.field("run.out_dir", c.out_dir);
    v.field("run.dump_frames", c.dump_frames);
    v.field("run.jobs", c.jobs);
    v.field("run.initial_velocity_fraction", c.initial_velocity_fraction);
    v.field("run.preheat_fraction", c.preheat_fraction);
    v.field("run.calibration_frames", c.calibration_frames);
    v.field("run.timeout_factor", c.timeout_factor);
    v.field("run.sensing", c.sensing);
}

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t offset)
{
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

} // namespace detail

/// Experiment config for one (plate, mode) pair.
inline harness::ExperimentConfig experiment_config(const RunConfig& cfg, double thickness)
{
    const auto& p = cfg.plate(thickness);
    harness::ExperimentConfig e;
    e.controller = cfg.controller;
    e.controller.desired_state = cfg.desired_state();
    e.plate = plant::PlateSpec::calibrated(p.thickness, cfg.path_length, p.tau, p.v_star, e.controller.desired_state,
                                           cfg.s0, p.reseal_rate);
    e.plant = cfg.plant;
    e.render = cfg.render;
    e.noise = cfg.noise;
    e.perception = cfg.perception;
    e.initial_velocity_fraction = cfg.initial_velocity_fraction;
    e.preheat_fraction = cfg.preheat_fraction;
    e.calibration_frames = cfg.calibration_frames;
    e.timeout_factor = cfg.timeout_factor;
    e.sensing = cfg.sensing;
    e.seed = cfg.seed;
    return e;
}

inline void RunConfig::validate() const
{
    try {
        controller.validate();
        perception.validate();
        plant.validate();
        noise.validate();
        render.validate();
        if (!(c_star > 0.0 && c_star <= 1.0)) throw InvalidInput("c_star must be in (0, 1]");
        if (!(i_star > 0.0 && i_star <= 1.0)) throw InvalidInput("i_star must be in (0, 1]");
        if (!(v_const >= 0.0)) throw InvalidInput("v_const must be >= 0");
        if (jobs < 0) throw InvalidInput("jobs must be >= 0");
        if (plates.empty()) throw InvalidInput("plates must not be empty");
        for (std::size_t a = 0; a < plates.size(); ++a) {
            for (std::size_t b = a + 1; b < plates.size(); ++b) {
                if (std::abs(plates[a].thickness - plates[b].thickness) < 1e-9) {
                    throw InvalidInput("plate thicknesses must be distinct");
                }
            }
        }
        if (!suite) plate(thickness);
        for (const auto& p : plates) experiment_config(*this, p.thickness).validate();
    } catch (const ConfigValidationError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigValidationError(e.what());
    }
}

/// Parse JSON text; empty or whitespace-only text means all defaults.
inline RunConfig parse_config(const std::string& text)
{
    json root = json::object();
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            const auto [line, column] = detail::locate(text, e.byte > 0 ? e.byte - 1 : 0);
            throw ConfigParseError("config parse error at line " + std::to_string(line) + ", column " +
                                       std::to_string(column) + ": " + e.what(),
                                   line, column);
        }
    }
    RunConfig cfg;
    detail::Reader reader(root);
    detail::visit(reader, cfg);
    reader.check_unknown();
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

inline json to_json(const RunConfig& cfg)
{
    detail::Writer writer;
    detail::visit(writer, cfg);
    return writer.take();
}

inline std::string serialize(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

/// Seed for one (plate, mode) run, independent of which other runs execute.
inline std::uint64_t run_seed(std::uint64_t base, double thickness, harness::Mode mode)
{
    const auto milli = static_cast<std::uint64_t>(std::llround(thickness * 1000.0));
    return harness::detail::splitmix64(base ^ harness::detail::splitmix64((milli << 8) | static_cast<std::uint64_t>(mode)));
}

/// Expand into run descriptors: the 3 x 3 mode/plate suite, or a single run.
inline std::vector<harness::RunSpec> run_specs(const RunConfig& cfg, bool force_suite = false)
{
    std::vector<harness::RunSpec> specs;
    auto add = [&](double thickness, harness::Mode mode) {
        harness::RunSpec s{experiment_config(cfg, thickness), mode, cfg.v_const};
        s.config.seed = run_seed(cfg.seed, thickness, mode);
        specs.push_back(std::move(s));
    };
    if (cfg.suite || force_suite) {
        for (const auto& p : cfg.plates) {
            for (auto mode : {harness::Mode::Slow, harness::Mode::Fast, harness::Mode::Controlled}) {
                add(p.thickness, mode);
            }
        }
    } else {
        add(cfg.thickness, cfg.mode);
    }
    return specs;
}

} // namespace torchpilot::config
