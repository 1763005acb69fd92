#pragma once

#include <string>

#include "erldrive/simulate.hpp"

namespace erldrive {

// Writes one SVG line chart per panel (tracked variable vs reference, torque
// vs load, rotor flux components, currents, voltages, sliding surfaces) into
// `dir`, creating it if needed. Returns the number of files written.
int emit_plots(const Trace& tr, const std::string& dir);

}  // namespace erldrive
