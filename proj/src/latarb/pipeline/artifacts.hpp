#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace latarb::pipeline {

struct ArtifactMeta {
    std::string artifact;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string content_hash;
    std::map<std::string, std::string> upstream;  // artifact name -> content hash
};

std::string meta_path(const std::string& artifact_path);

// Writes content and its sidecar metadata atomically (temp file, then rename).
void write_artifact(const std::string& path, const std::string& content, ArtifactMeta meta);

struct LoadedArtifact {
    std::string content;
    ArtifactMeta meta;
};

// Loads an upstream artifact and refuses it (stale_artifact) when it is missing, was produced
// under a different config, or its bytes no longer match the recorded hash.
LoadedArtifact load_upstream(const std::string& path, const std::string& name, const std::string& config_hash);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace latarb::pipeline
