#pragma once

#include <stdexcept>
#include <string>

namespace erldrive {

// Nameplate and mechanical constants of the squirrel-cage machine.
// All electrical quantities are per-phase, Y-connected.
struct MotorParams {
    double Rs = 0.0;       // stator resistance (ohm)
    double Rr = 0.0;       // rotor resistance (ohm)
    double Ls = 0.0;       // stator inductance (H)
    double Lr = 0.0;       // rotor inductance (H)
    double Lm = 0.0;       // mutual inductance (H)
    double J = 0.0;        // moment of inertia (kg m^2)
    double fv = 0.0;       // viscous friction (N m s/rad)
    int pole_pairs = 1;
    double rated_speed = 0.0;  // mechanical rad/s, scales the blow-up guard

    bool operator==(const MotorParams&) const = default;
};

// Throws std::invalid_argument on any violated parameter constraint.
void validate(const MotorParams& p);

// sigma = 1 - Lm^2/(Ls Lr), in (0,1) for a valid machine.
double leakage_factor(const MotorParams& p);

// Plant state in the synchronously rotating d-q frame.
struct MotorState {
    double isd = 0.0;    // d-axis stator current (A)
    double isq = 0.0;    // q-axis stator current (A)
    double psird = 0.0;  // d-axis rotor flux (Wb)
    double psirq = 0.0;  // q-axis rotor flux (Wb)
    double omega = 0.0;  // mechanical rotor speed (rad/s)
    double theta = 0.0;  // mechanical rotor position (rad, unwrapped)
};

// Inputs held constant (zero-order hold) over one integration step.
struct PlantInputs {
    double vsd = 0.0;          // d-axis stator voltage (V)
    double vsq = 0.0;          // q-axis stator voltage (V)
    double omega_s = 0.0;      // synchronous electrical speed (rad/s)
    double load_torque = 0.0;  // N m
};

struct StateDerivative {
    double isd = 0.0, isq = 0.0, psird = 0.0, psirq = 0.0, omega = 0.0, theta = 0.0;
};

// Te = p (3/2) (Lm/Lr) (psird isq - psirq isd)
double electromagnetic_torque(const MotorState& s, const MotorParams& p);

// Right-hand side of the d-q machine equations plus the motional equation.
StateDerivative derivatives(const MotorState& s, const PlantInputs& u, const MotorParams& p);

// Classical fourth-order Runge-Kutta update with inputs held over dt.
MotorState step_rk4(const MotorState& s, const PlantInputs& u, const MotorParams& p, double dt);

struct BlowUpGuard {
    double current_limit = 0.0;  // A, absolute, applies to isd and isq
    double speed_limit = 0.0;    // rad/s, absolute
};

// Returns nullptr if the state is inside the guard bands, else the name of
// the state variable that left them ("isd", "isq", "omega", or "non-finite").
const char* guard_violation(const MotorState& s, const BlowUpGuard& g);

// Raised by the simulation loop when the guard trips.
struct DivergenceError : std::runtime_error {
    DivergenceError(double t, const std::string& field, double value);
    double time;
    std::string field;
    double value;
};

}  // namespace erldrive
