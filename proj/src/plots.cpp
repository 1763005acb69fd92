#include "erldrive/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "erldrive/csv.hpp"

namespace erldrive {

namespace {

struct Series {
    const char* label;
    const char* color;
    double TraceRecord::*field;
};

constexpr double kW = 840.0, kH = 420.0;
constexpr double kLeft = 64.0, kRight = 16.0, kTop = 34.0, kBottom = 40.0;

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void write_panel(const Trace& tr, const std::string& path, const char* title,
                 const char* y_label, const std::vector<Series>& series)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);

    double t0 = 0.0, t1 = 1.0, lo = 0.0, hi = 1.0;
    if (!tr.rows.empty()) {
        t0 = tr.rows.front().t;
        t1 = std::max(tr.rows.back().t, t0 + 1e-12);
        lo = hi = tr.rows.front().*series.front().field;
        for (const auto& s : series) {
            for (const auto& r : tr.rows) {
                lo = std::min(lo, r.*s.field);
                hi = std::max(hi, r.*s.field);
            }
        }
    }
    if (hi - lo < 1e-12) {
        hi += 1.0;
        lo -= 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;
    auto x_of = [&](double t) { return kLeft + (t - t0) / (t1 - t0) * plot_w; };
    auto y_of = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kLeft << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\""
        << " font-weight=\"bold\">" << title << "</text>\n";

    // frame and horizontal gridlines with value labels
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int g = 0; g <= 4; ++g) {
        const double v = lo + (hi - lo) * g / 4.0;
        const double y = y_of(v);
        out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + plot_w
            << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n"
            << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(v)
            << "</text>\n";
    }
    for (int g = 0; g <= 5; ++g) {
        const double t = t0 + (t1 - t0) * g / 5.0;
        const double x = x_of(t);
        out << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 16
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << fmt(t) << "</text>\n";
    }
    out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 6
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t (s)</text>\n"
        << "<text x=\"14\" y=\"" << kTop + plot_h / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
        << " transform=\"rotate(-90 14 " << kTop + plot_h / 2 << ")\">" << y_label
        << "</text>\n";

    // decimate long traces so files stay a few hundred kB
    const size_t stride = std::max<size_t>(1, tr.rows.size() / 4000);
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\""
            << " points=\"";
        for (size_t i = 0; i < tr.rows.size(); i += stride) {
            const auto& r = tr.rows[i];
            out << fmt(x_of(r.t)) << ',' << fmt(y_of(r.*s.field)) << ' ';
        }
        if (!tr.rows.empty() && (tr.rows.size() - 1) % stride != 0) {
            const auto& r = tr.rows.back();
            out << fmt(x_of(r.t)) << ',' << fmt(y_of(r.*s.field));
        }
        out << "\"/>\n";
    }

    double lx = kLeft + 10;
    for (const auto& s : series) {
        out << "<line x1=\"" << lx << "\" y1=\"" << kTop + 12 << "\" x2=\"" << lx + 18
            << "\" y2=\"" << kTop + 12 << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << lx + 22 << "\" y=\"" << kTop + 16
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        lx += 22 + 7.0 * std::string(s.label).size() + 16;
    }

    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

int emit_plots(const Trace& tr, const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create plot directory " + dir + ": " + ec.message());

    int written = 0;
    const bool speed_mode = tr.mode == DriveMode::speed;

    if (speed_mode) {
        write_panel(tr, dir + "/speed.svg", "Rotor speed", "omega (rad/s)",
                    {{"omega", "#1f77b4", &TraceRecord::omega},
                     {"omega*", "#d62728", &TraceRecord::omega_ref}});
    } else {
        write_panel(tr, dir + "/position.svg", "Rotor position", "theta (rad)",
                    {{"theta", "#1f77b4", &TraceRecord::theta},
                     {"theta*", "#d62728", &TraceRecord::theta_ref}});
        write_panel(tr, dir + "/speed.svg", "Rotor speed", "omega (rad/s)",
                    {{"omega", "#1f77b4", &TraceRecord::omega}});
    }
    ++written;

    write_panel(tr, dir + "/torque.svg", "Electromagnetic torque and load", "torque (N m)",
                {{"Te", "#1f77b4", &TraceRecord::te}, {"TL", "#d62728", &TraceRecord::tl}});
    ++written;

    write_panel(tr, dir + "/flux.svg", "Rotor flux components", "flux (Wb)",
                {{"psi_rd", "#1f77b4", &TraceRecord::psird},
                 {"psi_rq", "#d62728", &TraceRecord::psirq}});
    ++written;

    write_panel(tr, dir + "/currents.svg", "Stator currents (d-q)", "current (A)",
                {{"isd", "#1f77b4", &TraceRecord::isd},
                 {"isd*", "#aec7e8", &TraceRecord::isd_ref},
                 {"isq", "#d62728", &TraceRecord::isq},
                 {"isq*", "#ff9896", &TraceRecord::isq_ref}});
    ++written;

    write_panel(tr, dir + "/voltages.svg", "Stator voltage commands", "voltage (V)",
                {{"vsd", "#1f77b4", &TraceRecord::vsd}, {"vsq", "#d62728", &TraceRecord::vsq}});
    ++written;

    write_panel(tr, dir + "/surfaces.svg", "Sliding surfaces", "surface",
                {{"S_outer", "#2ca02c", &TraceRecord::s_outer},
                 {"S_d", "#1f77b4", &TraceRecord::s_d},
                 {"S_q", "#d62728", &TraceRecord::s_q}});
    ++written;

    if (!speed_mode) ++written;  // the extra speed panel in position mode
    return written;
}

}  // namespace erldrive
