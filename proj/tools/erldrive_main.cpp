// erldrive - scenario-driven induction-motor drive simulator.
// Subcommands: run, compare, sweep, validate.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "erldrive/csv.hpp"
#include "erldrive/metrics.hpp"
#include "erldrive/plots.hpp"
#include "erldrive/scenario.hpp"
#include "erldrive/simulate.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

std::string stem_of(const std::string& path)
{
    auto slash = path.find_last_of("/\\");
    std::string stem = (slash == std::string::npos) ? path : path.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    return (dot == std::string::npos) ? stem : stem.substr(0, dot);
}

nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw erldrive::ConfigError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw erldrive::ConfigError("scenario file " + path + ": " + e.what());
    }
    return j;
}

void print_metrics(const erldrive::Metrics& m, const char* unit)
{
    std::printf("  overshoot          %.4g %%\n", m.overshoot_pct);
    if (m.settled)
        std::printf("  settling time      %.4g s (2%% band)\n", m.settling_time);
    else
        std::printf("  settling time      not settled within the window\n");
    std::printf("  steady-state error %.4g %s\n", m.steady_state_error, unit);
    std::printf("  IAE                %.4g %s.s\n", m.iae, unit);
    std::printf("  chattering (isq*)  %.4g A/tick\n", m.chattering_index);
    std::printf("  chattering (vsd*)  %.4g V/tick\n", m.chattering_vsd);
    std::printf("  chattering (vsq*)  %.4g V/tick\n", m.chattering_vsq);
}

int cmd_run(const std::string& scenario_path, std::string out_dir, bool no_plots)
{
    const erldrive::Scenario s = erldrive::load_scenario(scenario_path);
    if (out_dir.empty()) out_dir = "out_" + stem_of(scenario_path);

    const erldrive::RunResult result = erldrive::run_scenario_detailed(s);
    const erldrive::Metrics m = erldrive::compute_metrics(result.trace, s.mode);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw erldrive::IoError("cannot create output directory " + out_dir);
    erldrive::export_csv(result.trace, out_dir + "/trace.csv");
    if (!no_plots) erldrive::emit_plots(result.trace, out_dir);

    std::printf("scenario %s: %zu samples at %.6g s\n", s.name.c_str(),
                result.trace.rows.size(), result.trace.sample_period);
    if (s.mode == erldrive::DriveMode::speed)
        std::printf("  switching gain beta %.6g rad/s^2\n", result.beta_used);
    print_metrics(m, s.mode == erldrive::DriveMode::speed ? "rad/s" : "rad");
    std::printf("outputs written to %s\n", out_dir.c_str());
    return 0;
}

int cmd_compare(const std::string& scenario_path)
{
    const erldrive::Scenario s = erldrive::load_scenario(scenario_path);
    const erldrive::CompareReport rep = erldrive::compare_laws(s);

    std::printf("reaching-law comparison on %s (gains matched for equal analytic reaching "
                "time)\n",
                s.name.c_str());
    std::printf("  S0 = %.6g, k_base = %.6g, k_matched = %.6g, analytic t_r = %.6g s\n",
                rep.s0, rep.k_base, rep.k_matched, rep.analytic_tr);
    std::printf("  measured reaching: constant %.6g s, exponential %.6g s\n", rep.reach_const,
                rep.reach_erl);
    std::printf("%-26s %16s %16s\n", "metric", "constant-rate", "exponential");
    auto row = [](const char* name, double a, double b) {
        std::printf("%-26s %16.6g %16.6g\n", name, a, b);
    };
    row("overshoot (%)", rep.constant_rate.overshoot_pct, rep.erl.overshoot_pct);
    row("settling time (s)", rep.constant_rate.settling_time, rep.erl.settling_time);
    row("steady-state error", rep.constant_rate.steady_state_error,
        rep.erl.steady_state_error);
    row("IAE", rep.constant_rate.iae, rep.erl.iae);
    row("chattering (isq*)", rep.constant_rate.chattering_index, rep.erl.chattering_index);
    std::printf("chattering ratio (erl/constant) = %.6g\n", rep.chatter_ratio);
    return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& axis,
              const std::string& values_csv)
{
    std::vector<double> values;
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            values.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw erldrive::ConfigError("sweep: cannot parse value \"" + tok + "\"");
        }
    }
    if (values.empty()) throw erldrive::ConfigError("sweep: no values given");

    const nlohmann::json base = read_json(scenario_path);
    const auto cells = erldrive::sweep(base, axis, values);

    std::printf("sweep of %s over %s\n", scenario_path.c_str(), axis.c_str());
    std::printf("%14s %10s %12s %14s %14s %12s\n", axis.c_str(), "overshoot", "settling",
                "ss error", "IAE", "chattering");
    for (const auto& c : cells) {
        if (c.diverged) {
            std::printf("%14.6g DIVERGED: %s\n", c.value, c.error.c_str());
            continue;
        }
        std::printf("%14.6g %9.3g%% %11.4gs %14.6g %14.6g %12.6g\n", c.value,
                    c.metrics.overshoot_pct, c.metrics.settling_time,
                    c.metrics.steady_state_error, c.metrics.iae, c.metrics.chattering_index);
    }
    return 0;
}

int cmd_validate(const std::string& scenario_path)
{
    const erldrive::Scenario s = erldrive::load_scenario(scenario_path);
    std::printf("%s: valid %s scenario, duration %.6g s, %ld control ticks\n", s.name.c_str(),
                s.mode == erldrive::DriveMode::speed ? "speed" : "position", s.duration,
                static_cast<long>(s.duration / s.control_period));
    if (s.mode == erldrive::DriveMode::speed && !(s.speed.beta > 0.0))
        std::printf("  speed switching gain: auto (%.6g rad/s^2)\n", erldrive::auto_beta(s));
    std::printf("  %zu load steps, %zu uncertainty events\n", s.loads.size(),
                s.events.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"induction-motor sliding-mode drive simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, axis, values_csv;
    bool no_plots = false;

    CLI::App* run = app.add_subcommand("run", "simulate a scenario and export trace + plots");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory (default out_<scenario>)");
    run->add_flag("--no-plots", no_plots, "skip SVG plot generation");

    CLI::App* compare = app.add_subcommand(
        "compare", "run constant-rate vs exponential reaching law, gains matched");
    compare->add_option("scenario", scenario_path, "scenario JSON file")->required();

    CLI::App* sw = app.add_subcommand("sweep", "rerun a scenario across parameter values");
    sw->add_option("scenario", scenario_path, "scenario JSON file")->required();
    sw->add_option("--axis", axis, "dotted config path, e.g. plant.J")->required();
    sw->add_option("--values", values_csv, "comma-separated values")->required();

    CLI::App* val = app.add_subcommand("validate", "parse and check a scenario file");
    val->add_option("scenario", scenario_path, "scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_path, out_dir, no_plots);
        if (compare->parsed()) return cmd_compare(scenario_path);
        if (sw->parsed()) return cmd_sweep(scenario_path, axis, values_csv);
        if (val->parsed()) return cmd_validate(scenario_path);
    } catch (const erldrive::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const erldrive::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const erldrive::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
