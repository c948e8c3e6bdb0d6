#pragma once

#include <json.hpp>

#include "latarb/latency/duration_model.hpp"

namespace latarb::latency {

nlohmann::json model_to_json(const LatencyModel& model);
// Restores the fields needed for prediction and nesting tests.
LatencyModel model_from_json(const nlohmann::json& j);

}  // namespace latarb::latency
