#include "latarb/pipeline/artifacts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "latarb/common/error.hpp"
#include "latarb/common/hash.hpp"

namespace latarb::pipeline {

std::string meta_path(const std::string& artifact_path) { return artifact_path + ".meta.json"; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_error, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::io_error, "cannot write '" + tmp + "'");
        out << content;
        if (!out.flush()) fail(ErrorCode::io_error, "write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::io_error, "cannot rename '" + tmp + "': " + ec.message());
}

void write_artifact(const std::string& path, const std::string& content, ArtifactMeta meta) {
    meta.content_hash = fnv1a_hex(content);
    nlohmann::json j;
    j["artifact"] = meta.artifact;
    j["config_hash"] = meta.config_hash;
    j["seed"] = meta.seed;
    j["content_hash"] = meta.content_hash;
    j["upstream"] = meta.upstream;
    write_file_atomic(path, content);
    write_file_atomic(meta_path(path), j.dump(2) + "\n");
}

LoadedArtifact load_upstream(const std::string& path, const std::string& name, const std::string& config_hash) {
    if (!std::filesystem::exists(path) || !std::filesystem::exists(meta_path(path)))
        fail(ErrorCode::stale_artifact, "upstream artifact '" + name + "' is missing at " + path + "; run its step first");
    LoadedArtifact a;
    a.content = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(meta_path(path)));
        a.meta.artifact = j.at("artifact").get<std::string>();
        a.meta.config_hash = j.at("config_hash").get<std::string>();
        a.meta.seed = j.at("seed").get<std::uint64_t>();
        a.meta.content_hash = j.at("content_hash").get<std::string>();
        a.meta.upstream = j.at("upstream").get<std::map<std::string, std::string>>();
    } catch (const std::exception& e) {
        fail(ErrorCode::stale_artifact, "unreadable metadata for '" + name + "': " + e.what());
    }
    if (a.meta.config_hash != config_hash)
        fail(ErrorCode::stale_artifact, "upstream artifact '" + name + "' was produced under config " + a.meta.config_hash +
                                            ", current config is " + config_hash + "; rerun its step");
    if (fnv1a_hex(a.content) != a.meta.content_hash)
        fail(ErrorCode::stale_artifact, "upstream artifact '" + name + "' changed since it was written; rerun its step");
    return a;
}

}  // namespace latarb::pipeline
