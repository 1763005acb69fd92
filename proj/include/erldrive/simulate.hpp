#pragma once

#include <vector>

#include "erldrive/scenario.hpp"

namespace erldrive {

// One sample per controller tick. s_outer is the active outer-loop surface
// (speed surface in speed mode, position surface in position mode).
struct TraceRecord {
    double t = 0.0;
    double omega = 0.0, omega_ref = 0.0;
    double theta = 0.0, theta_ref = 0.0;
    double isd = 0.0, isq = 0.0;
    double isd_ref = 0.0, isq_ref = 0.0;
    double psird = 0.0, psirq = 0.0;
    double vsd = 0.0, vsq = 0.0;
    double te = 0.0, tl = 0.0;
    double s_outer = 0.0, s_d = 0.0, s_q = 0.0;
};

struct Trace {
    std::vector<TraceRecord> rows;
    double sample_period = 0.0;
    DriveMode mode = DriveMode::speed;
};

// Controller-side constants captured for the uncertainty-isolation check.
struct ControllerConstants {
    MotorParams nominal;
    MechanicalModel mech;
    double beta = 0.0;
    bool operator==(const ControllerConstants&) const = default;
};

struct RunResult {
    Trace trace;
    double beta_used = 0.0;           // resolved switching gain (auto or pinned)
    MotorParams plant_final;          // plant parameters after all events
    double final_theta_s = 0.0;       // synchronous frame angle at the end, [0, 2*pi)
    ControllerConstants constants_at_start;
    ControllerConstants constants_at_end;
};

// Deterministic closed-loop run; throws DivergenceError if the blow-up guard
// trips and ConfigError on invalid scenarios.
Trace run_scenario(const Scenario& s);
RunResult run_scenario_detailed(const Scenario& s);

}  // namespace erldrive
