#include "erldrive/field_orientation.hpp"

#include <cmath>

namespace erldrive {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

FluxFloorError::FluxFloorError(double psird_ref, double floor)
    : std::runtime_error("flux command " + std::to_string(psird_ref)
                         + " Wb is at or below the slip divide floor " + std::to_string(floor)
                         + " Wb; field not established")
{
}

double rotor_time_constant(const MotorParams& p)
{
    return p.Lr / p.Rr;
}

double slip_frequency(double isq, double psird_ref, const MotorParams& p, double flux_floor)
{
    if (!(psird_ref > flux_floor)) throw FluxFloorError(psird_ref, flux_floor);
    return (p.Lm / rotor_time_constant(p)) * isq / psird_ref;
}

double synchronous_speed(double omega_mech, double isq, double psird_ref, const MotorParams& p,
                         double flux_floor)
{
    return p.pole_pairs * omega_mech + slip_frequency(isq, psird_ref, p, flux_floor);
}

OrientationState advance_theta_s(OrientationState os, double omega_s, double dt)
{
    double theta = os.theta_s + omega_s * dt;
    theta = std::fmod(theta, kTwoPi);
    if (theta < 0.0) theta += kTwoPi;
    if (theta >= kTwoPi) theta = 0.0;  // fmod rounding can land exactly on 2*pi
    return {theta, omega_s};
}

double flux_current_reference(double psi_ref, const MotorParams& p)
{
    if (!(psi_ref > 0.0)) throw std::invalid_argument("flux reference must be positive");
    return psi_ref / p.Lm;
}

PhaseTriple dq_to_abc(double vd, double vq, double theta_s)
{
    constexpr double k23 = 2.0943951023931954923;  // 2*pi/3
    PhaseTriple ph;
    ph.a = vd * std::cos(theta_s) - vq * std::sin(theta_s);
    ph.b = vd * std::cos(theta_s - k23) - vq * std::sin(theta_s - k23);
    ph.c = -ph.a - ph.b;  // zero-sequence-free by construction
    return ph;
}

void abc_to_dq(const PhaseTriple& ph, double theta_s, double& vd, double& vq)
{
    constexpr double k23 = 2.0943951023931954923;
    vd = (2.0 / 3.0)
         * (ph.a * std::cos(theta_s) + ph.b * std::cos(theta_s - k23)
            + ph.c * std::cos(theta_s + k23));
    vq = -(2.0 / 3.0)
         * (ph.a * std::sin(theta_s) + ph.b * std::sin(theta_s - k23)
            + ph.c * std::sin(theta_s + k23));
}

}  // namespace erldrive
