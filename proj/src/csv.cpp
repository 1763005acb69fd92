#include "erldrive/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace erldrive {

const char* const kTraceCsvHeader =
    "t,omega,omega_ref,theta,theta_ref,isd,isq,isd_ref,isq_ref,psird,psirq,vsd,vsq,te,tl,"
    "s_outer,s_d,s_q";

namespace {

constexpr int kFieldCount = 18;

void append_row(std::string& out, const TraceRecord& r)
{
    const double fields[kFieldCount] = {r.t,     r.omega, r.omega_ref, r.theta, r.theta_ref,
                                        r.isd,   r.isq,   r.isd_ref,   r.isq_ref, r.psird,
                                        r.psirq, r.vsd,   r.vsq,       r.te,      r.tl,
                                        r.s_outer, r.s_d, r.s_q};
    char buf[32];
    for (int i = 0; i < kFieldCount; ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", fields[i]);
        out += buf;
        out += (i + 1 < kFieldCount) ? ',' : '\n';
    }
}

}  // namespace

std::string trace_to_csv(const Trace& tr)
{
    std::string out(kTraceCsvHeader);
    out += '\n';
    for (const TraceRecord& r : tr.rows) append_row(out, r);
    return out;
}

void export_csv(const Trace& tr, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const std::string text = trace_to_csv(tr);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed: " + path);
}

Trace trace_from_csv_text(const std::string& text, DriveMode mode)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("trace csv: empty input");
    if (line != kTraceCsvHeader) throw IoError("trace csv: unexpected header row");

    Trace tr;
    tr.mode = mode;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double fields[kFieldCount];
        const char* p = line.c_str();
        for (int i = 0; i < kFieldCount; ++i) {
            char* end = nullptr;
            fields[i] = std::strtod(p, &end);
            if (end == p) throw IoError("trace csv: malformed number in row");
            p = end;
            if (i + 1 < kFieldCount) {
                if (*p != ',') throw IoError("trace csv: expected comma");
                ++p;
            }
        }
        TraceRecord r;
        r.t = fields[0];
        r.omega = fields[1];
        r.omega_ref = fields[2];
        r.theta = fields[3];
        r.theta_ref = fields[4];
        r.isd = fields[5];
        r.isq = fields[6];
        r.isd_ref = fields[7];
        r.isq_ref = fields[8];
        r.psird = fields[9];
        r.psirq = fields[10];
        r.vsd = fields[11];
        r.vsq = fields[12];
        r.te = fields[13];
        r.tl = fields[14];
        r.s_outer = fields[15];
        r.s_d = fields[16];
        r.s_q = fields[17];
        tr.rows.push_back(r);
    }
    if (tr.rows.size() >= 2) tr.sample_period = tr.rows[1].t - tr.rows[0].t;
    return tr;
}

Trace trace_from_csv(const std::string& path, DriveMode mode)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return trace_from_csv_text(ss.str(), mode);
}

}  // namespace erldrive
