#include "erldrive/motor_model.hpp"

#include <cmath>

namespace erldrive {

void validate(const MotorParams& p)
{
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("motor params: ") + what);
    };
    require(std::isfinite(p.Rs) && p.Rs > 0.0, "Rs must be positive");
    require(std::isfinite(p.Rr) && p.Rr > 0.0, "Rr must be positive");
    require(std::isfinite(p.Ls) && p.Ls > 0.0, "Ls must be positive");
    require(std::isfinite(p.Lr) && p.Lr > 0.0, "Lr must be positive");
    require(std::isfinite(p.Lm) && p.Lm >= 0.0, "Lm must be non-negative");
    require(std::isfinite(p.J) && p.J > 0.0, "J must be positive");
    require(std::isfinite(p.fv) && p.fv >= 0.0, "fv must be non-negative");
    require(p.pole_pairs >= 1, "pole pair count must be >= 1");
    require(p.Lm * p.Lm < p.Ls * p.Lr, "Lm^2 must be below Ls*Lr (leakage factor in (0,1))");
}

double leakage_factor(const MotorParams& p)
{
    return 1.0 - (p.Lm * p.Lm) / (p.Ls * p.Lr);
}

double electromagnetic_torque(const MotorState& s, const MotorParams& p)
{
    return p.pole_pairs * 1.5 * (p.Lm / p.Lr) * (s.psird * s.isq - s.psirq * s.isd);
}

StateDerivative derivatives(const MotorState& s, const PlantInputs& u, const MotorParams& p)
{
    const double sigma_ls = leakage_factor(p) * p.Ls;
    const double r_eff = p.Rs + p.Rr * p.Lm * p.Lm / (p.Lr * p.Lr);  // stator + reflected rotor
    const double omega_e = p.pole_pairs * s.omega;                   // electrical rotor speed
    const double omega_sl = u.omega_s - omega_e;                     // slip

    StateDerivative d;
    d.isd = (-r_eff * s.isd + (p.Rr * p.Lm / (p.Lr * p.Lr)) * s.psird
             + (p.Lm / p.Lr) * omega_e * s.psirq + u.vsd) / sigma_ls
            + u.omega_s * s.isq;
    d.isq = (-r_eff * s.isq - (p.Lm / p.Lr) * omega_e * s.psird
             + (p.Rr * p.Lm / (p.Lr * p.Lr)) * s.psirq + u.vsq) / sigma_ls
            - u.omega_s * s.isd;
    d.psird = (p.Rr * p.Lm / p.Lr) * s.isd - (p.Rr / p.Lr) * s.psird + omega_sl * s.psirq;
    d.psirq = (p.Rr * p.Lm / p.Lr) * s.isq - omega_sl * s.psird - (p.Rr / p.Lr) * s.psirq;
    d.omega = (electromagnetic_torque(s, p) - u.load_torque - p.fv * s.omega) / p.J;
    d.theta = s.omega;
    return d;
}

namespace {

MotorState advanced(const MotorState& s, const StateDerivative& d, double h)
{
    MotorState out;
    out.isd = s.isd + h * d.isd;
    out.isq = s.isq + h * d.isq;
    out.psird = s.psird + h * d.psird;
    out.psirq = s.psirq + h * d.psirq;
    out.omega = s.omega + h * d.omega;
    out.theta = s.theta + h * d.theta;
    return out;
}

}  // namespace

MotorState step_rk4(const MotorState& s, const PlantInputs& u, const MotorParams& p, double dt)
{
    const StateDerivative k1 = derivatives(s, u, p);
    const StateDerivative k2 = derivatives(advanced(s, k1, 0.5 * dt), u, p);
    const StateDerivative k3 = derivatives(advanced(s, k2, 0.5 * dt), u, p);
    const StateDerivative k4 = derivatives(advanced(s, k3, dt), u, p);

    MotorState out;
    const double w = dt / 6.0;
    out.isd = s.isd + w * (k1.isd + 2.0 * k2.isd + 2.0 * k3.isd + k4.isd);
    out.isq = s.isq + w * (k1.isq + 2.0 * k2.isq + 2.0 * k3.isq + k4.isq);
    out.psird = s.psird + w * (k1.psird + 2.0 * k2.psird + 2.0 * k3.psird + k4.psird);
    out.psirq = s.psirq + w * (k1.psirq + 2.0 * k2.psirq + 2.0 * k3.psirq + k4.psirq);
    out.omega = s.omega + w * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
    out.theta = s.theta + w * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
    return out;
}

const char* guard_violation(const MotorState& s, const BlowUpGuard& g)
{
    if (!std::isfinite(s.isd) || !std::isfinite(s.isq) || !std::isfinite(s.psird)
        || !std::isfinite(s.psirq) || !std::isfinite(s.omega) || !std::isfinite(s.theta))
        return "non-finite";
    if (std::fabs(s.isd) > g.current_limit) return "isd";
    if (std::fabs(s.isq) > g.current_limit) return "isq";
    if (std::fabs(s.omega) > g.speed_limit) return "omega";
    return nullptr;
}

DivergenceError::DivergenceError(double t, const std::string& f, double v)
    : std::runtime_error("simulation diverged at t=" + std::to_string(t) + " s: " + f + " = "
                         + std::to_string(v)),
      time(t),
      field(f),
      value(v)
{
}

}  // namespace erldrive
