#include "latarb/latency/model_json.hpp"

#include <cmath>

#include "latarb/common/error.hpp"

namespace latarb::latency {

nlohmann::json model_to_json(const LatencyModel& m) {
    nlohmann::json j;
    j["kind"] = model_kind_name(m.kind);
    j["alpha"] = m.alpha;
    j["alpha_se"] = std::isnan(m.alpha_se) ? nlohmann::json(nullptr) : nlohmann::json(m.alpha_se);
    j["theta"] = m.theta;
    nlohmann::json se = nlohmann::json::array();
    for (double v : m.theta_se) se.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    j["theta_se"] = se;
    nlohmann::json schema = nlohmann::json::array();
    for (const auto& s : m.schema) schema.push_back({{"name", s.name}, {"transform", transform_name(s.transform)}});
    j["schema"] = schema;
    j["log_likelihood"] = m.log_likelihood;
    j["n_obs"] = m.n_obs;
    j["iterations"] = m.iterations;
    j["gradient_norm"] = m.gradient_norm;
    j["near_degenerate"] = m.near_degenerate;
    j["dropped_covariates"] = m.dropped_covariates;
    j["data_fingerprint"] = m.data_fingerprint;
    if (m.fit_day) j["fit_day"] = format_date(*m.fit_day);
    return j;
}

LatencyModel model_from_json(const nlohmann::json& j) {
    LatencyModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.alpha = j.at("alpha").get<double>();
    m.theta = j.at("theta").get<std::vector<double>>();
    for (const auto& s : j.at("schema"))
        m.schema.push_back({s.at("name").get<std::string>(), parse_transform(s.at("transform").get<std::string>())});
    m.log_likelihood = j.at("log_likelihood").get<double>();
    m.n_obs = j.at("n_obs").get<std::size_t>();
    m.near_degenerate = j.value("near_degenerate", false);
    m.data_fingerprint = j.value("data_fingerprint", "");
    if (j.contains("fit_day")) m.fit_day = parse_date(j["fit_day"].get<std::string>());
    if (m.theta.size() != m.schema.size() + 1) fail(ErrorCode::schema_mismatch, "model theta does not match its schema");
    return m;
}

}  // namespace latarb::latency
