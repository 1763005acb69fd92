#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "erldrive/controllers.hpp"
#include "erldrive/inverter.hpp"
#include "erldrive/motor_model.hpp"

namespace erldrive {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class DriveMode { speed, position };

// Reference schedule: either piecewise-constant breakpoints or a square wave.
struct ReferenceSchedule {
    enum class Shape { steps, square };
    Shape shape = Shape::steps;

    // steps: value is 0 before the first breakpoint
    std::vector<std::pair<double, double>> points;  // (time s, value)

    // square wave: 0 before start, then +amplitude for the first half period
    double amplitude = 0.0;
    double period = 0.0;
    double start = 0.0;

    // maximum reference slew (units/s); 0 disables limiting
    double rate_limit = 0.0;

    double value_at(double t) const;  // raw schedule, before rate limiting
};

struct LoadStep {
    double t = 0.0;
    double torque = 0.0;  // N m, held until the next step
};

// Scripted plant-side parameter change; controllers keep nominal values.
struct UncertaintyEvent {
    double t = 0.0;
    std::string param;  // one of Rs, Rr, Ls, Lr, Lm, J, fv
    double multiplier = 1.0;
};

struct Tolerances {
    double blowup_current_mult = 10.0;  // x torque-current clamp
    double blowup_speed_mult = 10.0;    // x max(rated speed, peak reference)
    double settle_band_frac = 0.02;     // settling band as a fraction of the step
    double flux_floor = 0.05;           // Wb, slip divide floor
    double reach_band = 0.5;            // |S| band for reaching-time measurement
};

struct Scenario {
    std::string name;
    DriveMode mode = DriveMode::speed;
    double duration = 1.0;  // s

    MotorParams plant;
    double dt_plant = 2e-5;        // s
    double control_period = 2e-4;  // s, must be an integer multiple of dt_plant
    InverterParams inverter;
    double psi_ref = 0.99;  // Wb

    ReferenceSchedule reference;
    std::vector<LoadStep> loads;
    std::vector<UncertaintyEvent> events;

    SpeedLoopGains speed;
    PositionLoopGains position;
    CurrentLoopGains current;
    bool feed_true_load = false;  // feed the scheduled TL into the laws' f1 term

    Tolerances tol;
};

// Parse and validate. Both throw ConfigError with the offending field named.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const nlohmann::json& j);
void validate(const Scenario& s);

// Load torque scheduled at time t.
double load_torque_at(const Scenario& s, double t);

// 1.5 x the worst-case lumped mechanical disturbance over the robustness
// envelope (inertia between half and double, full scheduled load taken
// unknown by the law), floored so no-load scenarios keep a usable gain.
double auto_beta(const Scenario& s);

// Replace the numeric leaf at a dotted path ("plant.J", "speed.beta", ...).
void set_config_path(nlohmann::json& j, const std::string& dotted_path, double value);

}  // namespace erldrive
