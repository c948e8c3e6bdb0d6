#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latarb/latarb.h"

namespace {

struct Options {
    std::string config;
    std::string from;
    std::string to;
    std::vector<double> gammas;
    long long seed = -1;
    int jobs = 0;
    bool strict = false;
    bool quiet = false;
};

nlohmann::json overrides(const Options& o) {
    nlohmann::json j = nlohmann::json::object();
    if (!o.from.empty()) j["from"] = o.from;
    if (!o.to.empty()) j["to"] = o.to;
    if (!o.gammas.empty()) j["gamma"] = o.gammas;
    if (o.seed >= 0) j["seed"] = o.seed;
    if (o.jobs > 0) j["jobs"] = o.jobs;
    if (o.strict) j["strict"] = true;
    return j;
}

int exit_code(latarb_status st) {
    if (st == LATARB_OK) return 0;
    return latarb_status_is_validation(st) ? 1 : 2;
}

int run(const std::string& step, const Options& o) {
    if (o.quiet) latarb_set_log_level(LATARB_LOG_WARN);
    latarb_pipeline* p = nullptr;
    latarb_status st = latarb_pipeline_create(o.config.c_str(), overrides(o).dump().c_str(), &p);
    if (st == LATARB_OK) {
        st = latarb_pipeline_run(p, step.c_str());
        if (st == LATARB_OK) std::fprintf(stderr, "%s: wrote %s\n", step.c_str(), latarb_pipeline_output_dir(p));
    }
    if (st != LATARB_OK) std::fprintf(stderr, "error (%s): %s\n", latarb_status_name(st), latarb_last_error());
    latarb_pipeline_free(p);
    return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latency-adjusted arbitrage bounds for cross-exchange crypto markets"};
    app.set_version_flag("--version", latarb_version());
    app.require_subcommand(1, 1);

    Options o;
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"ingest", "normalize order books, transactions, blocks and exchange profiles"},
        {"vol", "estimate spot volatility per exchange and minute"},
        {"latency", "fit walk-forward latency models per day"},
        {"bounds", "compute arbitrage bounds per exchange and minute"},
        {"excess", "compare observed price differences against the bounds"},
        {"implied-gamma", "solve for the implied market risk aversion"},
        {"simulate", "run Monte Carlo oracle checks"},
    };
    for (const auto& [name, help] : steps) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--from", o.from, "first output day, YYYY-MM-DD");
        sub->add_option("--to", o.to, "last output day, YYYY-MM-DD (inclusive)");
        sub->add_option("--gamma", o.gammas, "relative risk aversion values")->delimiter(',');
        sub->add_option("--seed", o.seed, "random seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--strict", o.strict, "treat malformed input rows as errors");
        sub->add_flag("-q,--quiet", o.quiet, "only log warnings and errors");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    for (const auto* sub : app.get_subcommands()) return run(sub->get_name(), o);
    return 1;
}
