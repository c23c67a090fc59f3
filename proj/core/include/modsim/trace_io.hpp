#pragma once

#include <iosfwd>
#include <string>

#include "modsim/sim.hpp"

namespace modsim {

/// Writes a trace as line-delimited JSON: one header object, one object per
/// period, then one object per post.
void write_trace(const Trace& trace, std::ostream& out);
void write_trace_file(const Trace& trace, const std::string& path);

Trace read_trace(std::istream& in);
Trace read_trace_file(const std::string& path);

}  // namespace modsim
