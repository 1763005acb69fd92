#pragma once

namespace erldrive {

// Ideal voltage-source inverter: zero-order hold at the control rate plus a
// radial magnitude limit standing in for the modulator's linear range.
struct InverterParams {
    double vdc = 537.0;            // DC-link voltage (V)
    double control_period = 2e-4;  // s
};

struct DqVoltage {
    double d = 0.0, q = 0.0;
};

// vdc / sqrt(3)
double max_voltage(const InverterParams& p);

// Passes the vector through unchanged when its magnitude fits, otherwise
// scales it radially onto the limit circle (angle preserved).
DqVoltage limit_voltage(double vsd_cmd, double vsq_cmd, const InverterParams& p);

}  // namespace erldrive
