#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latarb/common/time.hpp"
#include "latarb/latency/duration_model.hpp"

namespace latarb::pipeline {

struct PipelineConfig {
    std::string base_dir;  // directory of the config file; relative paths resolve against it
    std::string orderbooks;
    std::string transactions;
    std::string blocks;
    std::string profiles;
    Day from = 0;  // inclusive
    Day to = 0;    // inclusive
    std::vector<double> gammas{2.0};
    std::vector<double> bandwidth_grid;
    double default_bandwidth = 60.0;
    double trim_fraction = 0.01;
    latency::ModelKind latency_kind = latency::ModelKind::gamma;
    std::size_t quantity_points = 200;
    bool deduct_withdrawal_fee = false;
    std::optional<double> fee_per_byte;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool strict = false;
    bool allow_same_day = false;
    unsigned jobs = 1;
    nlohmann::json simulate;  // raw simulate section

    nlohmann::json canonical;  // effective config used for hashing
    std::string hash;          // FNV-1a of the canonical dump without jobs and output_dir
};

// Applies `overrides` (a JSON merge patch) to the file contents before validation.
// LATARB_OUT, when set, replaces the output directory.
PipelineConfig load_config(const std::string& path, const nlohmann::json& overrides = nlohmann::json::object());
PipelineConfig parse_config(const nlohmann::json& document, const std::string& base_dir);

std::string resolve_path(const std::string& base_dir, const std::string& path);

}  // namespace latarb::pipeline
