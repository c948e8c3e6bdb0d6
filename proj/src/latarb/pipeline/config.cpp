#include "latarb/pipeline/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "latarb/common/error.hpp"
#include "latarb/common/hash.hpp"
#include "latarb/volatility/spot_vol.hpp"

namespace latarb::pipeline {
namespace {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const std::exception& e) {
        fail(ErrorCode::invalid_argument, std::string("config field '") + key + "': " + e.what());
    }
}

std::vector<double> number_list(const json& j, const char* key, std::vector<double> fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    std::vector<double> out;
    if (j[key].is_number()) return {j[key].get<double>()};
    if (!j[key].is_array()) fail(ErrorCode::invalid_argument, std::string("config field '") + key + "' must be a list");
    for (const auto& v : j[key]) {
        if (!v.is_number()) fail(ErrorCode::invalid_argument, std::string("config field '") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

PipelineConfig parse_config(const json& doc, const std::string& base_dir) {
    if (!doc.is_object()) fail(ErrorCode::invalid_argument, "config must be a JSON object");
    PipelineConfig c;
    c.base_dir = base_dir;
    json inputs = doc.value("inputs", json::object());
    c.orderbooks = resolve_path(base_dir, get_or<std::string>(inputs, "orderbooks", ""));
    c.transactions = resolve_path(base_dir, get_or<std::string>(inputs, "transactions", ""));
    c.blocks = resolve_path(base_dir, get_or<std::string>(inputs, "blocks", ""));
    c.profiles = resolve_path(base_dir, get_or<std::string>(inputs, "profiles", ""));

    std::string from = get_or<std::string>(doc, "from", "");
    std::string to = get_or<std::string>(doc, "to", "");
    if (from.empty() || to.empty()) fail(ErrorCode::invalid_argument, "config needs 'from' and 'to' dates");
    c.from = parse_date(from);
    c.to = parse_date(to);
    if (c.to < c.from) fail(ErrorCode::invalid_argument, "empty date range: 'to' precedes 'from'");

    c.gammas = number_list(doc, "gamma", {2.0});
    if (c.gammas.empty()) fail(ErrorCode::invalid_argument, "gamma list is empty");
    for (double g : c.gammas)
        if (!(g > 1.0)) fail(ErrorCode::invalid_argument, "gamma values must exceed 1 for CRRA bounds");

    c.bandwidth_grid = number_list(doc, "bandwidth_grid", volatility::default_bandwidth_grid());
    if (c.bandwidth_grid.empty()) fail(ErrorCode::invalid_argument, "bandwidth grid is empty");
    for (double h : c.bandwidth_grid)
        if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "bandwidths must be positive");
    c.default_bandwidth = get_or<double>(doc, "default_bandwidth", volatility::kDefaultBandwidth);
    if (!(c.default_bandwidth > 0.0)) fail(ErrorCode::invalid_argument, "default bandwidth must be positive");
    c.trim_fraction = get_or<double>(doc, "trim", 0.01);
    if (!(c.trim_fraction >= 0.0 && c.trim_fraction < 0.5)) fail(ErrorCode::invalid_argument, "trim must be in [0, 0.5)");
    c.latency_kind = latency::parse_model_kind(get_or<std::string>(doc, "latency_model", "gamma"));

    json grid = doc.value("quantity_grid", json::object());
    c.quantity_points = get_or<std::size_t>(grid, "points", 200);
    if (c.quantity_points < 2) fail(ErrorCode::invalid_argument, "quantity grid needs at least 2 points");
    c.deduct_withdrawal_fee = get_or<bool>(grid, "deduct_withdrawal_fee", false);

    if (doc.contains("fee_per_byte") && !doc["fee_per_byte"].is_null()) {
        c.fee_per_byte = get_or<double>(doc, "fee_per_byte", 0.0);
        if (!(*c.fee_per_byte >= 0.0)) fail(ErrorCode::invalid_argument, "fee_per_byte must be >= 0");
    }
    c.output_dir = resolve_path(base_dir, get_or<std::string>(doc, "output_dir", "latarb_out"));
    c.seed = get_or<std::uint64_t>(doc, "seed", 0);
    c.strict = get_or<bool>(doc, "strict", false);
    c.allow_same_day = get_or<bool>(doc, "allow_same_day", false);
    int jobs = get_or<int>(doc, "jobs", 1);
    if (jobs < 1) fail(ErrorCode::invalid_argument, "jobs must be >= 1");
    c.jobs = static_cast<unsigned>(jobs);
    c.simulate = doc.value("simulate", json::object());

    c.canonical = doc;
    c.canonical.erase("jobs");
    c.canonical.erase("output_dir");
    c.hash = fnv1a_hex(c.canonical.dump());
    return c;
}

PipelineConfig load_config(const std::string& path, const json& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_error, "cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const std::exception& e) {
        fail(ErrorCode::parse_error, path + ": " + e.what());
    }
    if (!overrides.is_null() && !overrides.empty()) doc.merge_patch(overrides);
    std::string base = std::filesystem::path(path).parent_path().string();
    PipelineConfig c = parse_config(doc, base);
    if (const char* out = std::getenv("LATARB_OUT"); out && *out) c.output_dir = std::filesystem::path(out).lexically_normal().string();
    return c;
}

}  // namespace latarb::pipeline
