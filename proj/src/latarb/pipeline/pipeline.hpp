#pragma once

#include <string>

#include <json.hpp>

#include "latarb/pipeline/config.hpp"

namespace latarb::pipeline {

enum class Step { ingest, vol, latency, bounds, excess, implied_gamma, simulate };

Step parse_step(const std::string& name);
const char* step_name(Step step);

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config) : config_(std::move(config)) {}

    const PipelineConfig& config() const { return config_; }
    std::string path(const std::string& relative) const;

    // Returns false when a step ran but reported failing checks (simulate only).
    bool run(Step step);

private:
    void ingest();
    void vol();
    void latency();
    void bounds();
    void excess();
    void implied_gamma();
    bool simulate();

    PipelineConfig config_;
};

// Oracle report of the simulate step, usable without a pipeline.
nlohmann::json simulate_report(const nlohmann::json& settings, std::uint64_t seed, unsigned threads);

}  // namespace latarb::pipeline
