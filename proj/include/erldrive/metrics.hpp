#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "erldrive/simulate.hpp"

namespace erldrive {

struct Metrics {
    double overshoot_pct = 0.0;       // peak beyond target, % of the step size
    double settling_time = 0.0;       // s from the commanded change into the +-band
    bool settled = false;             // false when the band was never held
    double steady_state_error = 0.0;  // |mean(y - ref)| over the final fifth of the window
    double iae = 0.0;                 // integral of |error| over the window
    double chattering_index = 0.0;    // mean |du| per tick of isq* over the final fifth of the run
    double chattering_vsd = 0.0;      // same measure on the d-axis voltage command
    double chattering_vsq = 0.0;      // and the q-axis one
};

// A maximal run of constant reference; transitions between plateaus are the
// commanded steps the step-response numbers are measured against.
struct Plateau {
    size_t begin = 0;      // first sample with the plateau's reference value
    size_t end = 0;        // one past the last sample
    double target = 0.0;   // reference value over the plateau
    double step_size = 0.0;  // target minus the previous plateau's target
    double t_step = 0.0;   // time the reference left the previous plateau
};

std::vector<Plateau> reference_plateaus(const Trace& tr);

// Step-response numbers for one plateau (controlled variable chosen by mode).
Metrics window_metrics(const Trace& tr, const Plateau& p, double settle_band_frac);

// Whole-trace metrics: step response of the first reference transition plus
// run-wide chattering indexes. Traces without a transition report the hold
// error against the constant reference.
Metrics compute_metrics(const Trace& tr, DriveMode mode);

// First time |s_outer| enters the band and stays for `debounce` ticks;
// negative when the trace never reaches.
double measured_reaching_time(const Trace& tr, double band, int debounce = 10);

struct CompareReport {
    Metrics constant_rate;
    Metrics erl;
    double k_base = 0.0;      // constant-rate gain (the scenario's beta)
    double k_matched = 0.0;   // exponential-law gain with equal analytic reaching time
    double s0 = 0.0;          // characteristic initial surface used for the match
    double analytic_tr = 0.0; // shared analytic reaching time
    double reach_const = 0.0; // measured, from the trace
    double reach_erl = 0.0;
    double chatter_ratio = 0.0;  // erl index / constant-rate index
};

// Runs the scenario twice, once per law, with reaching gains matched for
// equal analytic reaching time.
CompareReport compare_laws(const Scenario& s);

struct SweepCell {
    double value = 0.0;
    bool diverged = false;
    std::string error;
    Metrics metrics;
};

// One run per value, with the dotted config path replaced by each value.
// Divergence is recorded per cell without aborting the sweep.
std::vector<SweepCell> sweep(const nlohmann::json& scenario_json, const std::string& axis,
                             const std::vector<double>& values);

}  // namespace erldrive
