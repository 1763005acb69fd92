#include "erldrive/simulate.hpp"

#include <cmath>
#include <optional>

#include "erldrive/field_orientation.hpp"

namespace erldrive {

namespace {

// Slew limiter applied to the speed reference so step edges do not inject
// one-sample derivative spikes into the feedforward terms.
class RateLimiter {
public:
    RateLimiter(double rate_per_s, double period) : step_(rate_per_s * period) {}

    double apply(double target)
    {
        if (step_ <= 0.0) {
            value_ = target;
            return value_;
        }
        const double delta = target - value_;
        if (delta > step_)
            value_ += step_;
        else if (delta < -step_)
            value_ -= step_;
        else
            value_ = target;
        return value_;
    }

private:
    double step_;
    double value_ = 0.0;  // schedules are defined as 0 before their first point
};

MechanicalModel snapshot_mech(const MechanicalModel& m)
{
    MechanicalModel out = m;
    out.f1 = 0.0;  // f1 follows the load schedule in ablation runs; not an event effect
    return out;
}

}  // namespace

RunResult run_scenario_detailed(const Scenario& scenario)
{
    validate(scenario);

    Scenario s = scenario;
    if (s.mode == DriveMode::speed && !(s.speed.beta > 0.0)) s.speed.beta = auto_beta(s);

    const double ts = s.control_period;
    const int substeps = static_cast<int>(std::round(ts / s.dt_plant));
    const double dt = ts / substeps;
    const long n_ticks = static_cast<long>(std::round(s.duration / ts));

    const MotorParams nominal = s.plant;
    MotorParams plant = s.plant;

    const MechanicalModel mech = make_mechanical_model(nominal, s.psi_ref);

    // only the active outer loop exists; speed and position are exclusive
    std::optional<SpeedLoop> speed_loop;
    std::optional<PositionLoop> position_loop;
    if (s.mode == DriveMode::speed)
        speed_loop.emplace(s.speed, mech, ts);
    else
        position_loop.emplace(s.position, mech, ts);
    CurrentLoops current_loops(s.current, nominal, s.psi_ref, ts);

    const double isd_ref = flux_current_reference(s.psi_ref, nominal);

    double ref_peak = std::fabs(nominal.rated_speed);
    if (s.reference.shape == ReferenceSchedule::Shape::steps) {
        for (const auto& [t, v] : s.reference.points) {
            (void)t;
            ref_peak = std::max(ref_peak, std::fabs(v));
        }
    } else {
        ref_peak = std::max(ref_peak, std::fabs(s.reference.amplitude));
    }
    const double clamp = (s.mode == DriveMode::speed) ? s.speed.isq_clamp : s.position.isq_clamp;
    const BlowUpGuard guard{s.tol.blowup_current_mult * clamp,
                            s.tol.blowup_speed_mult * ref_peak};

    RunResult result;
    result.beta_used = s.speed.beta;
    result.constants_at_start = {nominal, snapshot_mech(mech), s.speed.beta};
    result.trace.sample_period = ts;
    result.trace.mode = s.mode;
    result.trace.rows.reserve(static_cast<size_t>(n_ticks) + 1);

    MotorState state;
    OrientationState orientation;
    RateLimiter limiter(s.mode == DriveMode::speed ? s.reference.rate_limit : 0.0, ts);
    size_t next_event = 0;

    for (long tick = 0; tick <= n_ticks; ++tick) {
        const double t = tick * ts;

        // scripted plant-side parameter changes; controllers keep nominal
        while (next_event < s.events.size() && s.events[next_event].t <= t + 1e-12) {
            const auto& ev = s.events[next_event];
            if (ev.param == "Rs") plant.Rs *= ev.multiplier;
            if (ev.param == "Rr") plant.Rr *= ev.multiplier;
            if (ev.param == "Ls") plant.Ls *= ev.multiplier;
            if (ev.param == "Lr") plant.Lr *= ev.multiplier;
            if (ev.param == "Lm") plant.Lm *= ev.multiplier;
            if (ev.param == "J") plant.J *= ev.multiplier;
            if (ev.param == "fv") plant.fv *= ev.multiplier;
            ++next_event;
        }

        const double tl = load_torque_at(s, t);
        if (s.feed_true_load) {
            const double f1 = tl / nominal.J;
            if (speed_loop) speed_loop->set_load_feedforward(f1);
            if (position_loop) position_loop->set_load_feedforward(f1);
        }

        TraceRecord rec;
        rec.t = t;
        rec.tl = tl;

        double isq_ref = 0.0;
        if (s.mode == DriveMode::speed) {
            const double ref = limiter.apply(s.reference.value_at(t));
            isq_ref = speed_loop->update(ref, state.omega);
            rec.omega_ref = ref;
            rec.s_outer = speed_loop->surface();
        } else {
            const double ref = s.reference.value_at(t);
            isq_ref = position_loop->update(ref, state.theta, state.omega);
            rec.theta_ref = ref;
            rec.s_outer = position_loop->surface();
        }

        const double omega_s =
            synchronous_speed(state.omega, isq_ref, s.psi_ref, nominal, s.tol.flux_floor);
        const auto cl = current_loops.update(isd_ref, isq_ref, state.isd, state.isq, omega_s,
                                             state.omega);
        const DqVoltage v = limit_voltage(cl.vsd, cl.vsq, s.inverter);

        rec.omega = state.omega;
        rec.theta = state.theta;
        rec.isd = state.isd;
        rec.isq = state.isq;
        rec.isd_ref = isd_ref;
        rec.isq_ref = isq_ref;
        rec.psird = state.psird;
        rec.psirq = state.psirq;
        rec.vsd = v.d;
        rec.vsq = v.q;
        rec.te = electromagnetic_torque(state, plant);
        rec.s_d = cl.sd;
        rec.s_q = cl.sq;
        result.trace.rows.push_back(rec);

        if (tick == n_ticks) break;

        const PlantInputs inputs{v.d, v.q, omega_s, tl};
        for (int sub = 0; sub < substeps; ++sub) {
            state = step_rk4(state, inputs, plant, dt);
            if (const char* field = guard_violation(state, guard)) {
                const double t_sub = t + (sub + 1) * dt;
                double value = state.omega;
                if (field[0] == 'i') value = (field[2] == 'd') ? state.isd : state.isq;
                throw DivergenceError(t_sub, field, value);
            }
        }
        orientation = advance_theta_s(orientation, omega_s, ts);
    }

    result.plant_final = plant;
    result.final_theta_s = orientation.theta_s;
    const MechanicalModel& live_mech =
        speed_loop ? speed_loop->mechanical() : position_loop->mechanical();
    result.constants_at_end = {current_loops.nominal_params(), snapshot_mech(live_mech),
                               s.speed.beta};
    return result;
}

Trace run_scenario(const Scenario& s)
{
    return run_scenario_detailed(s).trace;
}

}  // namespace erldrive
