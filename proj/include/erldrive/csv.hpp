#pragma once

#include <stdexcept>
#include <string>

#include "erldrive/simulate.hpp"

namespace erldrive {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Fixed header shared by every exported trace, one row per controller tick.
extern const char* const kTraceCsvHeader;

// Values are written as decimal floating point with 9 significant digits, so
// a re-parsed file reproduces the written values bit for bit.
void export_csv(const Trace& tr, const std::string& path);
std::string trace_to_csv(const Trace& tr);

Trace trace_from_csv(const std::string& path, DriveMode mode);
Trace trace_from_csv_text(const std::string& text, DriveMode mode);

}  // namespace erldrive
