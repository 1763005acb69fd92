#include "erldrive/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "erldrive/reaching_law.hpp"

namespace erldrive {

namespace {

double ref_of(const TraceRecord& r, DriveMode mode)
{
    return mode == DriveMode::speed ? r.omega_ref : r.theta_ref;
}

double var_of(const TraceRecord& r, DriveMode mode)
{
    return mode == DriveMode::speed ? r.omega : r.theta;
}

// mean |u[n] - u[n-1]| over the final fifth of the trace
double mean_tick_increment(const Trace& tr, double TraceRecord::*field)
{
    const size_t n = tr.rows.size();
    if (n < 2) return 0.0;
    size_t start = n - std::max<size_t>(n / 5, 2);
    double sum = 0.0;
    size_t count = 0;
    for (size_t i = start + 1; i < n; ++i) {
        sum += std::fabs(tr.rows[i].*field - tr.rows[i - 1].*field);
        ++count;
    }
    return count ? sum / count : 0.0;
}

}  // namespace

std::vector<Plateau> reference_plateaus(const Trace& tr)
{
    std::vector<Plateau> out;
    const size_t n = tr.rows.size();
    if (n == 0) return out;
    constexpr size_t kMinRun = 10;  // shorter runs are transition samples, not plateaus

    size_t i = 0;
    double prev_target = ref_of(tr.rows[0], tr.mode);
    size_t prev_end = 0;  // one past the previous plateau
    bool have_prev = false;

    while (i < n) {
        size_t j = i + 1;
        while (j < n && ref_of(tr.rows[j], tr.mode) == ref_of(tr.rows[i], tr.mode)) ++j;
        if (j - i >= kMinRun || (j == n && out.empty())) {
            Plateau p;
            p.begin = i;
            p.end = j;
            p.target = ref_of(tr.rows[i], tr.mode);
            p.step_size = have_prev ? p.target - prev_target
                                    : p.target - ref_of(tr.rows[0], tr.mode);
            p.t_step = have_prev ? tr.rows[prev_end].t : tr.rows[0].t;
            out.push_back(p);
            prev_target = p.target;
            prev_end = j;  // first sample after this plateau starts the next transition
            have_prev = true;
        }
        i = j;
    }
    return out;
}

Metrics window_metrics(const Trace& tr, const Plateau& p, double settle_band_frac)
{
    Metrics m;
    const size_t n = tr.rows.size();
    if (n == 0 || p.end <= p.begin) return m;

    // measurement starts where the reference left the previous plateau
    size_t meas_begin = p.begin;
    while (meas_begin > 0 && tr.rows[meas_begin - 1].t >= p.t_step) --meas_begin;

    const double step = p.step_size;
    const double band = (step != 0.0) ? settle_band_frac * std::fabs(step)
                                      : settle_band_frac * std::max(std::fabs(p.target), 1.0);

    // overshoot: furthest excursion beyond the target in the step direction
    if (step != 0.0) {
        double peak = (step > 0.0) ? -std::numeric_limits<double>::infinity()
                                   : std::numeric_limits<double>::infinity();
        for (size_t i = meas_begin; i < p.end; ++i) {
            const double y = var_of(tr.rows[i], tr.mode);
            peak = (step > 0.0) ? std::max(peak, y) : std::min(peak, y);
        }
        const double beyond = (step > 0.0) ? peak - p.target : p.target - peak;
        m.overshoot_pct = std::max(0.0, beyond / std::fabs(step) * 100.0);
    }

    // settling: first sample after which the band holds through the plateau
    size_t settle_idx = p.end;
    for (size_t i = p.end; i-- > meas_begin;) {
        if (std::fabs(var_of(tr.rows[i], tr.mode) - p.target) <= band)
            settle_idx = i;
        else
            break;
    }
    if (settle_idx < p.end) {
        m.settled = true;
        m.settling_time = tr.rows[settle_idx].t - p.t_step;
    } else {
        m.settled = false;
        m.settling_time = tr.rows[p.end - 1].t - p.t_step;  // reported, flagged unsettled
    }

    // steady-state error over the final fifth of the plateau proper
    {
        const size_t len = p.end - p.begin;
        const size_t start = p.end - std::max<size_t>(len / 5, 1);
        double sum = 0.0;
        for (size_t i = start; i < p.end; ++i) sum += var_of(tr.rows[i], tr.mode) - p.target;
        m.steady_state_error = std::fabs(sum / static_cast<double>(p.end - start));
    }

    // IAE against the per-sample reference, transition included
    for (size_t i = meas_begin; i < p.end; ++i)
        m.iae += std::fabs(var_of(tr.rows[i], tr.mode) - ref_of(tr.rows[i], tr.mode))
                 * tr.sample_period;

    return m;
}

Metrics compute_metrics(const Trace& tr, DriveMode mode)
{
    Trace view = tr;
    view.mode = mode;
    const auto plateaus = reference_plateaus(view);

    Metrics m;
    const Plateau* chosen = nullptr;
    for (const auto& p : plateaus) {
        if (p.step_size != 0.0) {
            chosen = &p;
            break;
        }
    }
    if (!chosen && !plateaus.empty()) chosen = &plateaus.front();
    if (chosen) m = window_metrics(view, *chosen, 0.02);

    m.chattering_index = mean_tick_increment(view, &TraceRecord::isq_ref);
    m.chattering_vsd = mean_tick_increment(view, &TraceRecord::vsd);
    m.chattering_vsq = mean_tick_increment(view, &TraceRecord::vsq);
    return m;
}

double measured_reaching_time(const Trace& tr, double band, int debounce)
{
    const size_t n = tr.rows.size();
    int run = 0;
    for (size_t i = 0; i < n; ++i) {
        if (std::fabs(tr.rows[i].s_outer) < band) {
            if (++run >= debounce) return tr.rows[i + 1 - debounce].t;
        } else {
            run = 0;
        }
    }
    return -1.0;
}

CompareReport compare_laws(const Scenario& scenario)
{
    Scenario base = scenario;
    if (base.mode == DriveMode::speed && !(base.speed.beta > 0.0))
        base.speed.beta = auto_beta(base);

    CompareReport rep;

    if (base.mode == DriveMode::speed) {
        rep.k_base = base.speed.beta;
        if (base.reference.shape == ReferenceSchedule::Shape::steps) {
            double prev = 0.0;
            for (const auto& [t, v] : base.reference.points) {
                (void)t;
                if (v != prev) {
                    rep.s0 = std::fabs(v - prev);
                    break;
                }
                prev = v;
            }
        } else {
            rep.s0 = std::fabs(base.reference.amplitude);
        }
    } else {
        rep.k_base = base.position.k_theta;
        const double step = (base.reference.shape == ReferenceSchedule::Shape::square)
                                ? std::fabs(base.reference.amplitude)
                                : (base.reference.points.empty()
                                       ? 0.0
                                       : std::fabs(base.reference.points.front().second));
        rep.s0 = base.position.lambda * step;
    }
    if (!(rep.s0 > 0.0))
        throw ConfigError("compare: the scenario needs a nonzero reference step");

    const ErlParams shape = (base.mode == DriveMode::speed) ? base.speed.law.erl
                                                            : base.position.law.erl;
    rep.k_matched = matched_erl_gain(rep.s0, rep.k_base, shape);
    rep.analytic_tr = reaching_time_constant(rep.s0, rep.k_base);

    Scenario arm_const = base;
    Scenario arm_erl = base;
    if (base.mode == DriveMode::speed) {
        arm_const.speed.law.kind = LawKind::constant_rate;
        arm_const.speed.beta = rep.k_base;
        arm_erl.speed.law.kind = LawKind::exponential;
        arm_erl.speed.beta = rep.k_matched;
    } else {
        arm_const.position.law.kind = LawKind::constant_rate;
        arm_const.position.k_theta = rep.k_base;
        arm_erl.position.law.kind = LawKind::exponential;
        arm_erl.position.k_theta = rep.k_matched;
    }

    const Trace tr_const = run_scenario(arm_const);
    const Trace tr_erl = run_scenario(arm_erl);
    rep.constant_rate = compute_metrics(tr_const, base.mode);
    rep.erl = compute_metrics(tr_erl, base.mode);

    const double eps_outer = (base.mode == DriveMode::speed) ? base.speed.law.epsilon
                                                             : base.position.law.epsilon;
    const double band = std::max(eps_outer, base.tol.reach_band);
    rep.reach_const = measured_reaching_time(tr_const, band);
    rep.reach_erl = measured_reaching_time(tr_erl, band);

    if (rep.constant_rate.chattering_index > 0.0)
        rep.chatter_ratio = rep.erl.chattering_index / rep.constant_rate.chattering_index;
    else
        rep.chatter_ratio = (rep.erl.chattering_index == 0.0)
                                ? 1.0
                                : std::numeric_limits<double>::infinity();
    return rep;
}

std::vector<SweepCell> sweep(const nlohmann::json& scenario_json, const std::string& axis,
                             const std::vector<double>& values)
{
    std::vector<SweepCell> cells;
    cells.reserve(values.size());
    for (double v : values) {
        SweepCell cell;
        cell.value = v;
        nlohmann::json j = scenario_json;
        set_config_path(j, axis, v);
        const Scenario s = scenario_from_json(j);
        try {
            const Trace tr = run_scenario(s);
            cell.metrics = compute_metrics(tr, s.mode);
        } catch (const DivergenceError& e) {
            cell.diverged = true;
            cell.error = e.what();
        }
        cells.push_back(cell);
    }
    return cells;
}

}  // namespace erldrive
