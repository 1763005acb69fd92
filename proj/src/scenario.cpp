#include "erldrive/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace erldrive {

using nlohmann::json;

double ReferenceSchedule::value_at(double t) const
{
    if (shape == Shape::square) {
        if (t < start) return 0.0;
        const double phase = std::fmod(t - start, period);
        return (phase < 0.5 * period) ? amplitude : -amplitude;
    }
    double v = 0.0;
    for (const auto& [bt, bv] : points) {
        if (t + 1e-12 < bt) break;
        v = bv;
    }
    return v;
}

double load_torque_at(const Scenario& s, double t)
{
    double tl = 0.0;
    for (const auto& step : s.loads) {
        if (t + 1e-12 < step.t) break;
        tl = step.torque;
    }
    return tl;
}

namespace {

double require_number(const json& j, const std::string& key, const std::string& ctx)
{
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError("scenario config: missing or non-numeric \"" + ctx + key + "\"");
    return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& key, double fallback)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw ConfigError("scenario config: \"" + key + "\" must be a number");
    return j.at(key).get<double>();
}

ReachingLaw parse_law(const json& j, const std::string& ctx)
{
    ReachingLaw law;
    const std::string kind = j.value("kind", std::string("erl"));
    if (kind == "erl" || kind == "exponential") {
        law.kind = LawKind::exponential;
    } else if (kind == "constant" || kind == "constant_rate") {
        law.kind = LawKind::constant_rate;
    } else {
        throw ConfigError("scenario config: unknown reaching-law kind \"" + kind + "\" in "
                          + ctx);
    }
    law.erl.delta0 = number_or(j, "delta0", 0.2);
    law.erl.alpha = number_or(j, "alpha", 1.0);
    law.erl.p_exp = static_cast<int>(number_or(j, "p", 1));
    law.epsilon = number_or(j, "epsilon", 0.0);
    if (law.epsilon < 0.0)
        throw ConfigError("scenario config: boundary layer must be non-negative in " + ctx);
    return law;
}

}  // namespace

Scenario scenario_from_json(const json& j)
{
    Scenario s;
    s.name = j.value("name", std::string("scenario"));

    const std::string mode = j.value("mode", std::string("speed"));
    if (mode == "speed")
        s.mode = DriveMode::speed;
    else if (mode == "position")
        s.mode = DriveMode::position;
    else
        throw ConfigError("scenario config: mode must be \"speed\" or \"position\"");

    s.duration = require_number(j, "duration_s", "");

    if (!j.contains("plant")) throw ConfigError("scenario config: missing \"plant\" block");
    const json& plant = j.at("plant");
    s.plant.Rs = require_number(plant, "Rs", "plant.");
    s.plant.Rr = require_number(plant, "Rr", "plant.");
    s.plant.Ls = require_number(plant, "Ls", "plant.");
    s.plant.Lr = require_number(plant, "Lr", "plant.");
    s.plant.Lm = require_number(plant, "Lm", "plant.");
    s.plant.J = require_number(plant, "J", "plant.");
    s.plant.fv = number_or(plant, "fv", 0.001);
    s.plant.pole_pairs = static_cast<int>(require_number(plant, "pole_pairs", "plant."));
    s.plant.rated_speed = number_or(plant, "rated_speed", 148.2);

    if (j.contains("sim")) {
        const json& sim = j.at("sim");
        s.dt_plant = number_or(sim, "dt_plant_s", s.dt_plant);
        s.control_period = number_or(sim, "control_period_s", s.control_period);
    }
    if (j.contains("inverter")) {
        const json& inv = j.at("inverter");
        s.inverter.vdc = number_or(inv, "vdc_v", s.inverter.vdc);
    }
    s.inverter.control_period = s.control_period;
    s.psi_ref = number_or(j, "psi_ref_wb", 0.99);

    if (!j.contains("reference"))
        throw ConfigError("scenario config: missing \"reference\" block");
    const json& ref = j.at("reference");
    const std::string shape = ref.value("shape", std::string("steps"));
    if (shape == "steps") {
        s.reference.shape = ReferenceSchedule::Shape::steps;
        if (!ref.contains("points") || !ref.at("points").is_array())
            throw ConfigError("scenario config: reference.points must be an array");
        for (const json& pt : ref.at("points"))
            s.reference.points.emplace_back(require_number(pt, "t", "reference.points."),
                                            require_number(pt, "value", "reference.points."));
    } else if (shape == "square") {
        s.reference.shape = ReferenceSchedule::Shape::square;
        s.reference.amplitude = require_number(ref, "amplitude", "reference.");
        s.reference.period = require_number(ref, "period_s", "reference.");
        s.reference.start = number_or(ref, "start_s", 0.0);
    } else {
        throw ConfigError("scenario config: reference.shape must be \"steps\" or \"square\"");
    }
    s.reference.rate_limit = number_or(ref, "rate_limit", 0.0);

    if (j.contains("load")) {
        for (const json& step : j.at("load"))
            s.loads.push_back({require_number(step, "t", "load."),
                               require_number(step, "torque_nm", "load.")});
    }
    if (j.contains("events")) {
        for (const json& ev : j.at("events")) {
            UncertaintyEvent e;
            e.t = require_number(ev, "t", "events.");
            if (!ev.contains("param") || !ev.at("param").is_string())
                throw ConfigError("scenario config: events[].param must be a string");
            e.param = ev.at("param").get<std::string>();
            e.multiplier = require_number(ev, "multiplier", "events.");
            s.events.push_back(e);
        }
    }

    const json controllers = j.value("controllers", json::object());
    {
        const json g = controllers.value("speed", json::object());
        s.speed.k_omega = number_or(g, "k_omega", -50.0);
        s.speed.isq_clamp = number_or(g, "isq_clamp_a", 7.0);
        if (g.contains("beta") && g.at("beta").is_number()) {
            s.speed.beta = g.at("beta").get<double>();
        } else if (!g.contains("beta")
                   || (g.at("beta").is_string() && g.at("beta") == "auto")) {
            s.speed.beta = 0.0;  // resolved from the disturbance bound at run start
        } else {
            throw ConfigError("scenario config: speed.beta must be a number or \"auto\"");
        }
        s.speed.law = parse_law(g.value("law", json::object()), "controllers.speed");
        if (!g.contains("law") || !g.at("law").contains("epsilon")) s.speed.law.epsilon = 1.5;
    }
    {
        const json g = controllers.value("position", json::object());
        s.position.lambda = number_or(g, "lambda", 13.85);
        s.position.k_theta = number_or(g, "k_theta", 20.0);
        s.position.isq_clamp = number_or(g, "isq_clamp_a", 7.0);
        s.position.law = parse_law(g.value("law", json::object()), "controllers.position");
        if (!g.contains("law") || !g.at("law").contains("epsilon"))
            s.position.law.epsilon = 1.0;
    }
    {
        json g = controllers.value("current", json::object());
        s.current.k_id = number_or(g, "k_id", 150.0);
        s.current.k_iq = number_or(g, "k_iq", 150.0);
        json law = g.value("law", json::object());
        if (!law.contains("kind")) law["kind"] = "constant";
        s.current.law = parse_law(law, "controllers.current");
        if (!law.contains("epsilon")) s.current.law.epsilon = 1.0;
    }
    if (controllers.contains("feed_true_load"))
        s.feed_true_load = controllers.at("feed_true_load").get<bool>();

    if (j.contains("tolerances")) {
        const json& tol = j.at("tolerances");
        s.tol.blowup_current_mult = number_or(tol, "blowup_current_mult", 10.0);
        s.tol.blowup_speed_mult = number_or(tol, "blowup_speed_mult", 10.0);
        s.tol.settle_band_frac = number_or(tol, "settle_band_frac", 0.02);
        s.tol.flux_floor = number_or(tol, "flux_floor_wb", 0.05);
        s.tol.reach_band = number_or(tol, "reach_band", 0.5);
    }

    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario file " + path + ": " + e.what());
    }
    Scenario s = scenario_from_json(j);
    if (s.name == "scenario") {
        // default the name to the file stem
        auto slash = path.find_last_of("/\\");
        auto stem = (slash == std::string::npos) ? path : path.substr(slash + 1);
        auto dot = stem.find_last_of('.');
        s.name = (dot == std::string::npos) ? stem : stem.substr(0, dot);
    }
    return s;
}

void validate(const Scenario& s)
{
    validate(s.plant);
    if (!(s.duration > 0.0)) throw ConfigError("scenario: duration must be positive");
    if (!(s.dt_plant > 0.0) || !(s.control_period > 0.0))
        throw ConfigError("scenario: dt and control period must be positive");
    const double ratio = s.control_period / s.dt_plant;
    if (std::fabs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
        throw ConfigError("scenario: control period must be an integer multiple of dt");
    const double nticks = s.duration / s.control_period;
    if (std::fabs(nticks - std::round(nticks)) > 1e-6)
        throw ConfigError("scenario: duration must be an integer number of control periods");
    if (!(s.inverter.vdc > 0.0)) throw ConfigError("scenario: vdc must be positive");
    if (!(s.psi_ref > s.tol.flux_floor))
        throw ConfigError("scenario: flux command must exceed the slip divide floor");

    auto check_times = [&](double t, const char* what) {
        if (t < 0.0 || t > s.duration)
            throw ConfigError(std::string("scenario: ") + what + " time outside [0, duration]");
    };
    double prev = -1.0;
    for (const auto& [t, v] : s.reference.points) {
        (void)v;
        check_times(t, "reference breakpoint");
        if (t < prev) throw ConfigError("scenario: reference breakpoints must be sorted");
        prev = t;
    }
    if (s.reference.shape == ReferenceSchedule::Shape::square && !(s.reference.period > 0.0))
        throw ConfigError("scenario: square reference needs a positive period");
    prev = -1.0;
    for (const auto& step : s.loads) {
        check_times(step.t, "load step");
        if (step.t < prev) throw ConfigError("scenario: load steps must be sorted");
        prev = step.t;
    }
    prev = -1.0;
    for (const auto& ev : s.events) {
        check_times(ev.t, "uncertainty event");
        if (ev.t < prev) throw ConfigError("scenario: uncertainty events must be sorted");
        prev = ev.t;
        if (!(ev.multiplier > 0.0))
            throw ConfigError("scenario: event multipliers must be positive");
        static const char* allowed[] = {"Rs", "Rr", "Ls", "Lr", "Lm", "J", "fv"};
        if (std::find_if(std::begin(allowed), std::end(allowed),
                         [&](const char* p) { return ev.param == p; })
            == std::end(allowed))
            throw ConfigError("scenario: unknown event parameter \"" + ev.param + "\"");
    }

    // the plant must stay a valid machine after every scripted event
    MotorParams mutated = s.plant;
    for (const auto& ev : s.events) {
        if (ev.param == "Rs") mutated.Rs *= ev.multiplier;
        if (ev.param == "Rr") mutated.Rr *= ev.multiplier;
        if (ev.param == "Ls") mutated.Ls *= ev.multiplier;
        if (ev.param == "Lr") mutated.Lr *= ev.multiplier;
        if (ev.param == "Lm") mutated.Lm *= ev.multiplier;
        if (ev.param == "J") mutated.J *= ev.multiplier;
        if (ev.param == "fv") mutated.fv *= ev.multiplier;
        try {
            validate(mutated);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("scenario: event at t=") + std::to_string(ev.t)
                              + " leaves invalid plant: " + e.what());
        }
    }

    if (!(s.speed.k_omega < 0.0)) throw ConfigError("scenario: speed.k_omega must be negative");
    if (!(s.speed.isq_clamp > 0.0) || !(s.position.isq_clamp > 0.0))
        throw ConfigError("scenario: torque-current clamps must be positive");
    if (!(s.position.lambda > 0.0)) throw ConfigError("scenario: position.lambda must be positive");
    if (!(s.position.k_theta > 0.0))
        throw ConfigError("scenario: position.k_theta must be positive");
    if (!(s.current.k_id > 0.0) || !(s.current.k_iq > 0.0))
        throw ConfigError("scenario: current-loop gains must be positive");

    auto check_shape = [](const ReachingLaw& law, const char* which) {
        ErlParams e = law.erl;
        e.k = 1.0;  // gain supplied by the loop
        try {
            erldrive::validate(e);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(std::string("scenario: ") + which + " law: " + err.what());
        }
    };
    check_shape(s.speed.law, "speed");
    check_shape(s.position.law, "position");
    check_shape(s.current.law, "current");
}

double auto_beta(const Scenario& s)
{
    double tl_max = 0.0;
    for (const auto& step : s.loads) tl_max = std::max(tl_max, std::fabs(step.torque));

    double ref_max = s.plant.rated_speed;
    if (s.reference.shape == ReferenceSchedule::Shape::steps) {
        for (const auto& [t, v] : s.reference.points) {
            (void)t;
            ref_max = std::max(ref_max, std::fabs(v));
        }
    } else {
        ref_max = std::max(ref_max, std::fabs(s.reference.amplitude));
    }

    const MechanicalModel m = make_mechanical_model(s.plant, s.psi_ref);
    const double j_low = 0.5;  // inertia envelope: half to double nominal
    const double d_a = m.a * (1.0 / j_low - 1.0) * ref_max;
    const double d_f1 = tl_max / (s.plant.J * j_low);
    const double d_b = m.b * (1.0 / j_low - 1.0) * s.speed.isq_clamp;
    const double bound = d_a + d_f1 + d_b;
    return std::max(1.5 * bound, 50.0);
}

void set_config_path(json& j, const std::string& dotted_path, double value)
{
    json* node = &j;
    std::stringstream ss(dotted_path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError("config path has an empty segment: " + dotted_path);
        parts.push_back(part);
    }
    if (parts.empty()) throw ConfigError("empty config path");
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]))
            throw ConfigError("config path not found: " + dotted_path + " (at \"" + parts[i]
                              + "\")");
        node = &node->at(parts[i]);
    }
    const std::string& leaf = parts.back();
    if (!node->is_object() || !node->contains(leaf))
        throw ConfigError("config path not found: " + dotted_path + " (at \"" + leaf + "\")");
    (*node)[leaf] = value;
}

}  // namespace erldrive
