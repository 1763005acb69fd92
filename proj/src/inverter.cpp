#include "erldrive/inverter.hpp"

#include <cmath>

namespace erldrive {

double max_voltage(const InverterParams& p)
{
    return p.vdc / std::sqrt(3.0);
}

DqVoltage limit_voltage(double vsd_cmd, double vsq_cmd, const InverterParams& p)
{
    const double vmax = max_voltage(p);
    const double mag = std::hypot(vsd_cmd, vsq_cmd);
    if (mag <= vmax) return {vsd_cmd, vsq_cmd};
    const double scale = vmax / mag;
    return {vsd_cmd * scale, vsq_cmd * scale};
}

}  // namespace erldrive
