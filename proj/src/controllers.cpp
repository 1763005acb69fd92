#include "erldrive/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace erldrive {

MechanicalModel make_mechanical_model(const MotorParams& nominal, double psi_ref)
{
    MechanicalModel m;
    m.Kt = nominal.pole_pairs * 1.5 * (nominal.Lm / nominal.Lr) * psi_ref;
    m.a = nominal.fv / nominal.J;
    m.b = m.Kt / nominal.J;
    m.f1 = 0.0;
    return m;
}

double speed_surface(double error, double integral_accum)
{
    return error - integral_accum;
}

std::pair<double, double> current_surfaces(double isd_ref, double isq_ref, double isd,
                                           double isq)
{
    return {isd_ref - isd, isq_ref - isq};
}

double position_surface(double lambda, double e_theta, double e_theta_dot)
{
    return lambda * e_theta + e_theta_dot;
}

double equivalent_voltage_d(double isd, double isq, double disd_ref_dt, double omega_s,
                            double psird_ref, const MotorParams& nominal)
{
    const double sigma_ls = leakage_factor(nominal) * nominal.Ls;
    const double r_eff = nominal.Rs + nominal.Rr * nominal.Lm * nominal.Lm
                         / (nominal.Lr * nominal.Lr);
    return sigma_ls * (disd_ref_dt - omega_s * isq) + r_eff * isd
           - (nominal.Lm * nominal.Rr / (nominal.Lr * nominal.Lr)) * psird_ref;
}

double equivalent_voltage_q(double isd, double isq, double disq_ref_dt, double omega_s,
                            double omega_mech, double psird_ref, const MotorParams& nominal)
{
    const double sigma_ls = leakage_factor(nominal) * nominal.Ls;
    const double r_eff = nominal.Rs + nominal.Rr * nominal.Lm * nominal.Lm
                         / (nominal.Lr * nominal.Lr);
    return sigma_ls * (disq_ref_dt + omega_s * isd) + r_eff * isq
           + (nominal.Lm / nominal.Lr) * nominal.pole_pairs * omega_mech * psird_ref;
}

// --- SpeedLoop ---

SpeedLoop::SpeedLoop(const SpeedLoopGains& g, const MechanicalModel& m, double period)
    : gains_(g), mech_(m), period_(period)
{
    gains_.law.erl.k = gains_.beta;
    validate(gains_.law.erl);
    if (!(gains_.k_omega < 0.0))
        throw std::invalid_argument("speed loop: k_omega must be negative");
    if (!(gains_.isq_clamp > 0.0))
        throw std::invalid_argument("speed loop: torque-current clamp must be positive");
}

double SpeedLoop::update(double omega_ref, double omega)
{
    const double e = omega - omega_ref;

    // Trapezoid accumulation of int (k_omega - a) e dt over the past period.
    // Held while the command sits on the clamp so the surface cannot wind up
    // beyond what the actuator can unwind.
    if (primed_ && !prev_saturated_)
        integral_accum_ += (gains_.k_omega - mech_.a) * 0.5 * (e + prev_error_) * period_;

    const double s = speed_surface(e, integral_accum_);
    last_surface_ = s;

    const double ref_rate = primed_ ? (omega_ref - prev_ref_) / period_ : 0.0;
    const double raw = (gains_.k_omega * e + reaching_rate(s, gains_.law) + mech_.a * omega_ref
                        + ref_rate + mech_.f1)
                       / mech_.b;

    prev_error_ = e;
    prev_ref_ = omega_ref;
    primed_ = true;
    prev_saturated_ = std::fabs(raw) > gains_.isq_clamp;

    return std::clamp(raw, -gains_.isq_clamp, gains_.isq_clamp);
}

void SpeedLoop::reset()
{
    integral_accum_ = 0.0;
    prev_error_ = 0.0;
    prev_ref_ = 0.0;
    primed_ = false;
    prev_saturated_ = false;
    last_surface_ = 0.0;
}

// --- PositionLoop ---

PositionLoop::PositionLoop(const PositionLoopGains& g, const MechanicalModel& m, double period)
    : gains_(g), mech_(m), period_(period)
{
    gains_.law.erl.k = gains_.k_theta;
    validate(gains_.law.erl);
    if (!(gains_.lambda > 0.0))
        throw std::invalid_argument("position loop: lambda must be positive");
    if (!(gains_.isq_clamp > 0.0))
        throw std::invalid_argument("position loop: torque-current clamp must be positive");
}

double PositionLoop::update(double theta_ref, double theta, double omega)
{
    const double ref_rate = primed_ ? (theta_ref - prev_ref_) / period_ : 0.0;
    const double ref_accel = primed_ ? (ref_rate - prev_ref_rate_) / period_ : 0.0;

    const double e = theta - theta_ref;
    const double e_dot = omega - ref_rate;
    const double s = position_surface(gains_.lambda, e, e_dot);
    last_surface_ = s;

    const double eq = (gains_.lambda * ref_rate + ref_accel + (mech_.a - gains_.lambda) * omega
                       + mech_.f1)
                      / mech_.b;
    const double raw = eq + reaching_rate(s, gains_.law);

    prev_ref_ = theta_ref;
    prev_ref_rate_ = ref_rate;
    primed_ = true;

    return std::clamp(raw, -gains_.isq_clamp, gains_.isq_clamp);
}

void PositionLoop::reset()
{
    prev_ref_ = 0.0;
    prev_ref_rate_ = 0.0;
    primed_ = false;
    last_surface_ = 0.0;
}

// --- CurrentLoops ---

CurrentLoops::CurrentLoops(const CurrentLoopGains& g, const MotorParams& nominal,
                           double psi_ref, double period)
    : gains_(g), nominal_(nominal), psi_ref_(psi_ref), period_(period)
{
    if (!(gains_.k_id > 0.0 && gains_.k_iq > 0.0))
        throw std::invalid_argument("current loops: discontinuous gains must be positive");
    gains_.law.erl.k = gains_.k_id;
    validate(gains_.law.erl);
}

CurrentLoops::Output CurrentLoops::update(double isd_ref, double isq_ref, double isd,
                                          double isq, double omega_s, double omega_mech)
{
    const auto [sd, sq] = current_surfaces(isd_ref, isq_ref, isd, isq);

    const double disd_ref = primed_ ? (isd_ref - prev_isd_ref_) / period_ : 0.0;
    const double disq_ref = primed_ ? (isq_ref - prev_isq_ref_) / period_ : 0.0;
    prev_isd_ref_ = isd_ref;
    prev_isq_ref_ = isq_ref;
    primed_ = true;

    ReachingLaw law_d = gains_.law;
    law_d.erl.k = gains_.k_id;
    ReachingLaw law_q = gains_.law;
    law_q.erl.k = gains_.k_iq;

    Output out;
    out.sd = sd;
    out.sq = sq;
    // v* = equivalent + discontinuous; reaching_rate returns -(k/N) sat(S),
    // and the surface here is command-minus-measurement, so the correcting
    // voltage enters with the opposite sign.
    out.vsd = equivalent_voltage_d(isd, isq, disd_ref, omega_s, psi_ref_, nominal_)
              - reaching_rate(sd, law_d);
    out.vsq = equivalent_voltage_q(isd, isq, disq_ref, omega_s, omega_mech, psi_ref_, nominal_)
              - reaching_rate(sq, law_q);
    return out;
}

void CurrentLoops::reset()
{
    prev_isd_ref_ = 0.0;
    prev_isq_ref_ = 0.0;
    primed_ = false;
}

}  // namespace erldrive
