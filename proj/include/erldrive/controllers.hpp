#pragma once

#include <utility>

#include "erldrive/motor_model.hpp"
#include "erldrive/reaching_law.hpp"

namespace erldrive {

// Lumped mechanical model the outer loops are designed against. Built from
// nominal parameters and the flux command; never mutated by plant events.
struct MechanicalModel {
    double a = 0.0;   // fv/J (1/s)
    double b = 0.0;   // Kt/J (rad/s^2 per A)
    double f1 = 0.0;  // load-torque feedforward TL/J used by the laws (0 by default)
    double Kt = 0.0;  // torque constant p*(3/2)*(Lm/Lr)*psi_ref (N m/A)

    bool operator==(const MechanicalModel&) const = default;
};

MechanicalModel make_mechanical_model(const MotorParams& nominal, double psi_ref);

struct SpeedLoopGains {
    double k_omega = -50.0;  // integral-surface constant, negative (1/s)
    double beta = 0.0;       // switching gain (rad/s^2); <= 0 selects the auto bound
    double isq_clamp = 7.0;  // torque-current limit (A)
    ReachingLaw law;         // law.erl.k is overwritten with beta
};

struct PositionLoopGains {
    double lambda = 13.85;   // surface slope (1/s)
    double k_theta = 20.0;   // discontinuous gain (A)
    double isq_clamp = 7.0;  // A
    ReachingLaw law;         // law.erl.k is overwritten with k_theta
};

struct CurrentLoopGains {
    double k_id = 150.0;  // d-axis discontinuous gain (V)
    double k_iq = 150.0;  // q-axis discontinuous gain (V)
    ReachingLaw law;      // law.epsilon is the boundary width in A
};

// --- surface and equivalent-control primitives ---

// S = e - integral_accum where integral_accum tracks int (k_omega - a) e dt.
double speed_surface(double error, double integral_accum);

// (Sd, Sq) = command minus measurement on both axes.
std::pair<double, double> current_surfaces(double isd_ref, double isq_ref, double isd,
                                           double isq);

// S_theta = lambda * e_theta + e_theta_dot
double position_surface(double lambda, double e_theta, double e_theta_dot);

// Model-based d-axis voltage that keeps Sd' = 0 under nominal parameters.
double equivalent_voltage_d(double isd, double isq, double disd_ref_dt, double omega_s,
                            double psird_ref, const MotorParams& nominal);

// q-axis mirror, including the back-EMF feedforward (Lm/Lr) p omega psird_ref.
// The sign of that term is chosen to cancel the rotational coupling of the
// plant's q-axis equation (verified by the decoupling test).
double equivalent_voltage_q(double isd, double isq, double disq_ref_dt, double omega_s,
                            double omega_mech, double psird_ref, const MotorParams& nominal);

// --- stateful loops, ticked at the controller period ---

class SpeedLoop {
public:
    SpeedLoop(const SpeedLoopGains& g, const MechanicalModel& m, double period);

    // Returns the torque-current command isq*, clamped to +-isq_clamp.
    double update(double omega_ref, double omega);

    double surface() const { return last_surface_; }
    double integral_accum() const { return integral_accum_; }
    const MechanicalModel& mechanical() const { return mech_; }

    // Per-tick load feedforward (TL/J) for ablation runs with the true load fed in.
    void set_load_feedforward(double f1) { mech_.f1 = f1; }
    void reset();

private:
    SpeedLoopGains gains_;
    MechanicalModel mech_;
    double period_;
    double integral_accum_ = 0.0;
    double prev_error_ = 0.0;
    double prev_ref_ = 0.0;
    bool primed_ = false;
    bool prev_saturated_ = false;
    double last_surface_ = 0.0;
};

class PositionLoop {
public:
    PositionLoop(const PositionLoopGains& g, const MechanicalModel& m, double period);

    // theta_dot is the measured speed; reference derivatives come from
    // backward differences of theta_ref.
    double update(double theta_ref, double theta, double omega);

    double surface() const { return last_surface_; }
    const MechanicalModel& mechanical() const { return mech_; }
    void set_load_feedforward(double f1) { mech_.f1 = f1; }
    void reset();

private:
    PositionLoopGains gains_;
    MechanicalModel mech_;
    double period_;
    double prev_ref_ = 0.0;
    double prev_ref_rate_ = 0.0;
    bool primed_ = false;
    double last_surface_ = 0.0;
};

class CurrentLoops {
public:
    CurrentLoops(const CurrentLoopGains& g, const MotorParams& nominal, double psi_ref,
                 double period);

    struct Output {
        double vsd = 0.0, vsq = 0.0;  // commanded voltages before the inverter limit
        double sd = 0.0, sq = 0.0;    // surfaces at this tick
    };

    Output update(double isd_ref, double isq_ref, double isd, double isq, double omega_s,
                  double omega_mech);

    const MotorParams& nominal_params() const { return nominal_; }
    void reset();

private:
    CurrentLoopGains gains_;
    MotorParams nominal_;
    double psi_ref_;
    double period_;
    double prev_isd_ref_ = 0.0;
    double prev_isq_ref_ = 0.0;
    bool primed_ = false;
};

}  // namespace erldrive
