#pragma once

#include <json.hpp>

#include "loadgen/analyzer.hpp"
#include "loadgen/load_engine.hpp"

// Canonical JSON encodings shared by the CLI's json output mode and the HTTP
// API, so both emit byte-identical documents for identical inputs.

namespace loadgen {

using Json = nlohmann::ordered_json;

Json feature_to_json(const Feature& feature);
Json spec_to_json(const LoadSpec& spec);
Json plan_to_json(const TransmissionPlan& plan);
Json report_to_json(const CaptureReport& report);
Json verdict_to_json(const Verdict& verdict);

/// Parses an API LoadSpec. Throws Error(validation_error) naming the field,
/// or Error(feature_conflict) when more than one feature is given.
LoadSpec spec_from_json(const Json& json);
Feature feature_from_json(const Json& json);

}  // namespace loadgen
