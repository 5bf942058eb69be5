#pragma once

#include <iosfwd>

#include "loadgen/analyzer.hpp"
#include "loadgen/load_engine.hpp"

namespace loadgen {

// Plain-text tables for terminal output.
void render_plan(std::ostream& out, const TransmissionPlan& plan);
void render_report(std::ostream& out, const CaptureReport& report);
void render_verdict(std::ostream& out, const Verdict& verdict);

}  // namespace loadgen
