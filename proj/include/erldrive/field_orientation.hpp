#pragma once

#include <stdexcept>

#include "erldrive/motor_model.hpp"

namespace erldrive {

// Synchronous-frame angle bookkeeping for the indirect scheme.
struct OrientationState {
    double theta_s = 0.0;  // electrical frame angle, wrapped to [0, 2*pi)
    double omega_s = 0.0;  // electrical synchronous speed (rad/s)
};

struct FluxFloorError : std::runtime_error {
    explicit FluxFloorError(double psird_ref, double floor);
};

// Tr = Lr/Rr
double rotor_time_constant(const MotorParams& p);

// omega_sl = (Lm/Tr) * isq / psird_ref. Throws FluxFloorError if the flux
// command is at or below the divide floor (field not established).
double slip_frequency(double isq, double psird_ref, const MotorParams& p,
                      double flux_floor = 0.05);

// omega_s = p*omega_mech + omega_sl
double synchronous_speed(double omega_mech, double isq, double psird_ref, const MotorParams& p,
                         double flux_floor = 0.05);

// theta_s += omega_s*dt, wrapped to [0, 2*pi).
OrientationState advance_theta_s(OrientationState os, double omega_s, double dt);

// Steady-state flux-producing current: isd* = psi_ref / Lm.
double flux_current_reference(double psi_ref, const MotorParams& p);

struct PhaseTriple {
    double a = 0.0, b = 0.0, c = 0.0;
};

// Amplitude-invariant inverse Park+Clarke; the three outputs sum to zero.
PhaseTriple dq_to_abc(double vd, double vq, double theta_s);

// Forward companion of dq_to_abc (amplitude-invariant, 2/3 scaling).
void abc_to_dq(const PhaseTriple& ph, double theta_s, double& vd, double& vq);

}  // namespace erldrive
