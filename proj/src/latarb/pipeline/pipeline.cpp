#include "latarb/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "latarb/bounds/arb_bounds.hpp"
#include "latarb/common/csv.hpp"
#include "latarb/common/error.hpp"
#include "latarb/common/log.hpp"
#include "latarb/common/numfmt.hpp"
#include "latarb/common/parallel.hpp"
#include "latarb/common/stats.hpp"
#include "latarb/latency/model_json.hpp"
#include "latarb/latency/tx_io.hpp"
#include "latarb/marketdata/book_io.hpp"
#include "latarb/pipeline/artifacts.hpp"
#include "latarb/simulator/simulator.hpp"
#include "latarb/volatility/spot_vol.hpp"

namespace latarb::pipeline {
namespace {

using nlohmann::json;

constexpr const char* kOrderbooks = "ingest/orderbooks.csv";
constexpr const char* kTransactions = "ingest/transactions.csv";
constexpr const char* kBlocks = "ingest/blocks.csv";
constexpr const char* kProfiles = "ingest/profiles.json";
constexpr const char* kCoverage = "ingest/coverage.csv";
constexpr const char* kSpotVol = "vol/spot_vol.csv";
constexpr const char* kBandwidths = "vol/bandwidths.csv";
constexpr const char* kLatencySummary = "latency/summary.csv";
constexpr const char* kLatencyTests = "latency/tests.csv";
constexpr const char* kBounds = "bounds/bounds.csv";
constexpr const char* kBoundsSummary = "bounds/summary.csv";
constexpr const char* kDifferences = "excess/differences.csv";
constexpr const char* kExcess = "excess/excess.csv";
constexpr const char* kShareWithin = "excess/share_within.csv";
constexpr const char* kImplied = "implied_gamma/implied_gamma.csv";
constexpr const char* kImpliedDaily = "implied_gamma/daily.csv";
constexpr const char* kSimReport = "simulate/report.json";

std::string model_artifact(Day day) { return "latency/model_" + format_date(day) + ".json"; }

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    csv::write_row(out, header);
    for (const auto& r : rows) csv::write_row(out, r);
    return out.str();
}

csv::Table parse_csv(const std::string& content, const std::string& name) {
    std::istringstream in(content);
    return csv::read(in, name);
}

std::string fmt(double v) { return format_double(v); }
std::string fmt_bp(double v) { return std::isnan(v) ? std::string() : format_double(v * 1e4); }

double parse_bp(const std::string& s) { return parse_double(s) / 1e4; }

struct BookData {
    std::vector<marketdata::OrderbookSnapshot> books;
    std::vector<marketdata::ExchangeProfile> profiles;  // sorted by exchange
};

std::vector<marketdata::ExchangeProfile> profiles_from_json(const std::string& content) {
    json j = json::parse(content);
    std::vector<marketdata::ExchangeProfile> out;
    for (const auto& e : j.at("exchanges")) {
        marketdata::ExchangeProfile p;
        p.exchange = e.at("exchange").get<std::string>();
        p.taker_fee = e.at("taker_fee").get<double>();
        if (!e.at("withdrawal_fee").is_null()) p.withdrawal_fee = e["withdrawal_fee"].get<double>();
        if (!e.at("confirmations").is_null()) p.confirmations = e["confirmations"].get<int>();
        p.margin = e.value("margin", false);
        p.business = e.value("business", false);
        out.push_back(std::move(p));
    }
    return out;
}

json profiles_to_json(const std::vector<marketdata::ExchangeProfile>& profiles) {
    json arr = json::array();
    for (const auto& p : profiles) {
        json e;
        e["exchange"] = p.exchange;
        e["taker_fee"] = p.taker_fee;
        e["withdrawal_fee"] = p.withdrawal_fee ? json(*p.withdrawal_fee) : json(nullptr);
        e["confirmations"] = p.confirmations ? json(*p.confirmations) : json(nullptr);
        e["withdrawal_fee_effective"] = p.withdrawal_fee_or_default();
        e["confirmations_effective"] = p.confirmations_or_default();
        e["margin"] = p.margin;
        e["business"] = p.business;
        arr.push_back(e);
    }
    return json{{"exchanges", arr}};
}

std::vector<marketdata::OrderbookSnapshot> books_from_csv(const std::string& content) {
    csv::Table t = parse_csv(content, kOrderbooks);
    std::map<std::pair<std::string, Timestamp>, marketdata::OrderbookSnapshot> grouped;
    for (const auto& row : t.rows) {
        Timestamp ts = parse_timestamp(row[1]);
        auto& s = grouped[{row[0], ts}];
        s.exchange = row[0];
        s.timestamp = ts;
        marketdata::Level l{parse_double(row[4]), parse_double(row[5])};
        (row[2] == "bid" ? s.bids : s.asks).push_back(l);
    }
    std::vector<marketdata::OrderbookSnapshot> out;
    for (auto& [k, s] : grouped) out.push_back(std::move(s));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.timestamp, a.exchange) < std::tie(b.timestamp, b.exchange);
    });
    return out;
}

std::string books_to_csv(const std::vector<marketdata::OrderbookSnapshot>& books) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : books) {
        std::string ts = format_timestamp(s.timestamp);
        for (std::size_t i = 0; i < s.bids.size(); ++i)
            rows.push_back({s.exchange, ts, "bid", std::to_string(i + 1), fmt(s.bids[i].price), fmt(s.bids[i].quantity)});
        for (std::size_t i = 0; i < s.asks.size(); ++i)
            rows.push_back({s.exchange, ts, "ask", std::to_string(i + 1), fmt(s.asks[i].price), fmt(s.asks[i].quantity)});
    }
    return to_csv({"exchange", "timestamp", "side", "level", "price", "quantity"}, rows);
}

std::vector<latency::TxRecord> transactions_from_csv(const std::string& content) {
    csv::Table t = parse_csv(content, kTransactions);
    std::vector<latency::TxRecord> out;
    for (const auto& row : t.rows)
        out.push_back({row[0], parse_timestamp(row[1]), parse_timestamp(row[2]), parse_double(row[3]), parse_double(row[4]),
                       parse_double(row[5])});
    return out;
}

std::vector<latency::Block> blocks_from_csv(const std::string& content) {
    csv::Table t = parse_csv(content, kBlocks);
    std::vector<latency::Block> out;
    for (const auto& row : t.rows) out.push_back({static_cast<long long>(parse_double(row[0])), parse_timestamp(row[1])});
    return out;
}

std::map<std::string, volatility::BidSeries> bid_series(const std::vector<marketdata::OrderbookSnapshot>& books) {
    marketdata::MinuteBooks minutes = marketdata::align_to_minutes(books);
    std::map<std::string, std::map<std::int64_t, double>> best;
    for (const auto& [m, per] : minutes)
        for (const auto& [ex, s] : per) best[ex][m] = std::log(s.bids.front().price);
    std::map<std::string, volatility::BidSeries> out;
    for (const auto& [ex, pts] : best) {
        volatility::BidSeries s;
        s.exchange = ex;
        s.first_minute = pts.begin()->first;
        s.log_bid.assign(static_cast<std::size_t>(pts.rbegin()->first - s.first_minute + 1), std::nan(""));
        for (const auto& [m, v] : pts) s.log_bid[static_cast<std::size_t>(m - s.first_minute)] = v;
        out.emplace(ex, std::move(s));
    }
    return out;
}

double coefficient(const latency::LatencyModel& m, const std::string& name) {
    for (std::size_t j = 0; j < m.schema.size(); ++j)
        if (m.schema[j].name == name) return m.theta[j + 1];
    return std::nan("");
}

ArtifactMeta meta_for(const PipelineConfig& c, const std::string& name, std::map<std::string, std::string> upstream = {}) {
    ArtifactMeta m;
    m.artifact = name;
    m.config_hash = c.hash;
    m.seed = c.seed;
    m.upstream = std::move(upstream);
    return m;
}

struct BoundKey {
    std::int64_t minute;
    std::string exchange;
    bool operator<(const BoundKey& o) const { return std::tie(minute, exchange) < std::tie(o.minute, o.exchange); }
};

struct BoundRow {
    double sigma = 0.0, m1 = 0.0, m2 = 0.0;
    std::map<double, double> bound;  // gamma -> d
};

std::map<BoundKey, BoundRow> bounds_from_csv(const std::string& content) {
    csv::Table t = parse_csv(content, kBounds);
    std::map<BoundKey, BoundRow> out;
    for (const auto& row : t.rows) {
        BoundKey k{minute_bucket(parse_timestamp(row[0])), row[1]};
        auto& r = out[k];
        r.sigma = parse_double(row[2]);
        r.m1 = parse_double(row[3]);
        r.m2 = parse_double(row[4]);
        r.bound[parse_double(row[5])] = parse_bp(row[6]);
    }
    return out;
}

}  // namespace

Step parse_step(const std::string& name) {
    if (name == "ingest") return Step::ingest;
    if (name == "vol") return Step::vol;
    if (name == "latency") return Step::latency;
    if (name == "bounds") return Step::bounds;
    if (name == "excess") return Step::excess;
    if (name == "implied-gamma") return Step::implied_gamma;
    if (name == "simulate") return Step::simulate;
    fail(ErrorCode::invalid_argument, "unknown subcommand '" + name + "'");
}

const char* step_name(Step step) {
    switch (step) {
        case Step::ingest: return "ingest";
        case Step::vol: return "vol";
        case Step::latency: return "latency";
        case Step::bounds: return "bounds";
        case Step::excess: return "excess";
        case Step::implied_gamma: return "implied-gamma";
        case Step::simulate: return "simulate";
    }
    return "?";
}

std::string Pipeline::path(const std::string& relative) const {
    return (std::filesystem::path(config_.output_dir) / relative).string();
}

bool Pipeline::run(Step step) {
    switch (step) {
        case Step::ingest: ingest(); return true;
        case Step::vol: vol(); return true;
        case Step::latency: latency(); return true;
        case Step::bounds: bounds(); return true;
        case Step::excess: excess(); return true;
        case Step::implied_gamma: implied_gamma(); return true;
        case Step::simulate: return simulate();
    }
    return true;
}

void Pipeline::ingest() {
    const auto& c = config_;
    for (const auto* p : {&c.orderbooks, &c.transactions, &c.blocks, &c.profiles})
        if (p->empty() || !std::filesystem::exists(*p)) fail(ErrorCode::io_error, "input file not found: '" + *p + "'");

    marketdata::IngestReport report;
    auto books = marketdata::read_orderbooks(c.orderbooks, c.strict, &report);
    auto profiles = marketdata::read_profiles(c.profiles);
    std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) { return a.exchange < b.exchange; });
    std::set<std::string> known;
    for (const auto& p : profiles) known.insert(p.exchange);
    for (const auto& b : books)
        if (!known.count(b.exchange)) fail(ErrorCode::invalid_argument, "no exchange profile for '" + b.exchange + "'");

    auto txs = latency::read_transactions(c.transactions, c.strict);
    std::sort(txs.begin(), txs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.inclusion_time, a.announce_time, a.tx_id) < std::tie(b.inclusion_time, b.announce_time, b.tx_id);
    });
    auto blocks = latency::read_blocks(c.blocks, c.strict);

    std::vector<std::vector<std::string>> tx_rows;
    for (const auto& t : txs)
        tx_rows.push_back({t.tx_id, format_timestamp(t.announce_time), format_timestamp(t.inclusion_time), fmt(t.fee_per_byte),
                           fmt(t.size), fmt(t.mempool_size)});
    std::vector<std::vector<std::string>> block_rows;
    for (const auto& b : blocks) block_rows.push_back({std::to_string(b.height), format_timestamp(b.timestamp)});

    // Coverage: aligned minutes with a usable book per exchange and day, including the warm-up day.
    marketdata::MinuteBooks minutes = marketdata::align_to_minutes(books);
    std::map<std::pair<Day, std::string>, std::size_t> covered;
    for (const auto& [m, per] : minutes)
        for (const auto& [ex, s] : per) ++covered[{floor_div(m, kMinutesPerDay), ex}];
    std::vector<std::vector<std::string>> cov_rows;
    for (Day d = c.from - 1; d <= c.to; ++d)
        for (const auto& p : profiles) {
            auto it = covered.find({d, p.exchange});
            std::size_t n = it == covered.end() ? 0 : it->second;
            cov_rows.push_back({format_date(d), p.exchange, std::to_string(n), std::to_string(kMinutesPerDay),
                                fmt(static_cast<double>(n) / static_cast<double>(kMinutesPerDay))});
        }

    write_artifact(path(kOrderbooks), books_to_csv(books), meta_for(c, "orderbooks"));
    write_artifact(path(kTransactions),
                   to_csv({"tx_id", "announce_time", "inclusion_time", "fee_per_byte", "size", "mempool_size"}, tx_rows),
                   meta_for(c, "transactions"));
    write_artifact(path(kBlocks), to_csv({"height", "timestamp"}, block_rows), meta_for(c, "blocks"));
    write_artifact(path(kProfiles), profiles_to_json(profiles).dump(2) + "\n", meta_for(c, "profiles"));
    write_artifact(path(kCoverage), to_csv({"date", "exchange", "minutes", "expected", "coverage"}, cov_rows),
                   meta_for(c, "coverage"));
    log::info("ingest: " + std::to_string(report.snapshots) + " books (" + std::to_string(report.dropped_snapshots) +
              " dropped), " + std::to_string(txs.size()) + " transactions, " + std::to_string(blocks.size()) + " blocks");
}

void Pipeline::vol() {
    const auto& c = config_;
    auto src = load_upstream(path(kOrderbooks), "orderbooks", c.hash);
    auto series = bid_series(books_from_csv(src.content));
    std::vector<const volatility::BidSeries*> list;
    for (const auto& [ex, s] : series) list.push_back(&s);

    std::vector<std::vector<volatility::SpotVolPoint>> points(list.size());
    std::vector<std::vector<std::vector<std::string>>> bw_rows(list.size());
    parallel_for(list.size(), c.jobs, [&](std::size_t i) {
        const auto& s = *list[i];
        for (Day d = c.from; d <= c.to; ++d) {
            auto choice = volatility::select_bandwidth(s, d, c.bandwidth_grid, c.default_bandwidth);
            bw_rows[i].push_back({s.exchange, format_date(d), fmt(choice.h), choice.fallback ? "1" : "0"});
            auto day_points = volatility::estimate_day(s, d, c.bandwidth_grid, c.default_bandwidth);
            points[i].insert(points[i].end(), day_points.begin(), day_points.end());
        }
        volatility::trim_tails(points[i], c.trim_fraction);
    });

    std::vector<std::vector<std::string>> rows, bws;
    for (std::size_t i = 0; i < list.size(); ++i) {
        for (const auto& p : points[i])
            rows.push_back({list[i]->exchange, format_timestamp(p.minute * kSecondsPerMinute), fmt(p.sigma), fmt(p.bandwidth),
                            p.trimmed ? "1" : "0"});
        bws.insert(bws.end(), bw_rows[i].begin(), bw_rows[i].end());
    }
    std::map<std::string, std::string> up{{"orderbooks", src.meta.content_hash}};
    write_artifact(path(kSpotVol), to_csv({"exchange", "timestamp", "sigma", "bandwidth", "trimmed"}, rows),
                   meta_for(c, "spot_vol", up));
    write_artifact(path(kBandwidths), to_csv({"exchange", "date", "bandwidth", "fallback"}, bws), meta_for(c, "bandwidths", up));
}

void Pipeline::latency() {
    const auto& c = config_;
    auto tx_src = load_upstream(path(kTransactions), "transactions", c.hash);
    auto block_src = load_upstream(path(kBlocks), "blocks", c.hash);
    auto txs = transactions_from_csv(tx_src.content);
    auto blocks = blocks_from_csv(block_src.content);
    std::map<std::string, std::string> up{{"transactions", tx_src.meta.content_hash}, {"blocks", block_src.meta.content_hash}};

    std::size_t n_days = static_cast<std::size_t>(c.to - c.from + 1);
    std::vector<std::vector<std::vector<std::string>>> summary(n_days), tests(n_days);
    std::vector<std::optional<json>> models(n_days);
    parallel_for(n_days, c.jobs, [&](std::size_t i) {
        Day day = c.from + static_cast<Day>(i);
        Day fit_day = c.allow_same_day ? day : day - 1;
        if (c.allow_same_day) log::warn("fitting latency on the application day " + format_date(day) + " (diagnostic mode)");
        auto fit_set = latency::confirmed_between(txs, fit_day * kSecondsPerDay, (fit_day + 1) * kSecondsPerDay);
        auto oos_set = latency::confirmed_between(txs, day * kSecondsPerDay, (day + 1) * kSecondsPerDay);
        auto data = latency::to_duration_data(fit_set);
        auto oos = latency::to_duration_data(oos_set);
        std::string date = format_date(day);
        try {
            latency::LatencyModel fits[2][2];
            for (int k = 0; k < 2; ++k)
                for (int cov = 0; cov < 2; ++cov) {
                    auto kind = k == 0 ? latency::ModelKind::exponential : latency::ModelKind::gamma;
                    fits[k][cov] = latency::fit(data, kind, cov == 1);
                    fits[k][cov].fit_day = fit_day;
                    const auto& m = fits[k][cov];
                    summary[i].push_back({date, latency::model_kind_name(kind), cov ? "1" : "0", std::to_string(m.n_obs),
                                          fmt(m.theta[0]), fmt(m.alpha), fmt(coefficient(m, "fee_per_byte")),
                                          fmt(coefficient(m, "mempool_size")), fmt(m.log_likelihood), fmt(latency::mspe(m, data)),
                                          oos.size() ? fmt(latency::mspe(m, oos)) : ""});
                }
            auto add_test = [&](const char* name, const latency::LatencyModel& r, const latency::LatencyModel& u) {
                auto t = latency::lr_test(r, u);
                tests[i].push_back({date, name, fmt(t.statistic), std::to_string(t.dof), fmt(t.p_value)});
                return t;
            };
            auto lr_gamma = add_test("covariates_gamma", fits[1][0], fits[1][1]);
            add_test("covariates_exponential", fits[0][0], fits[0][1]);
            add_test("gamma_vs_exponential", fits[0][0], fits[1][0]);

            int k = c.latency_kind == latency::ModelKind::gamma ? 1 : 0;
            json j;
            j["apply_day"] = date;
            j["fit_day"] = format_date(fit_day);
            j["model"] = latency::model_to_json(fits[k][1]);
            j["restricted"] = latency::model_to_json(fits[k][0]);
            j["lr_covariates"] = {{"statistic", lr_gamma.statistic}, {"dof", lr_gamma.dof}, {"p_value", lr_gamma.p_value}};
            std::vector<double> fees, mempool;
            for (const auto& t : fit_set) {
                fees.push_back(t.fee_per_byte);
                mempool.push_back(t.mempool_size);
            }
            j["fee_per_byte_median"] = median(fees);
            j["mempool_size_median"] = median(mempool);
            auto bstats = latency::block_time_stats(blocks, std::numeric_limits<Timestamp>::min(), day * kSecondsPerDay);
            j["blocks"] = {{"mean", bstats.mean}, {"variance", bstats.variance}};
            models[i] = j;
        } catch (const Error& e) {
            if (c.strict) throw;
            log::warn("latency: no model for " + date + ": " + e.what());
        }
    });

    std::vector<std::vector<std::string>> sum_rows, test_rows;
    for (std::size_t i = 0; i < n_days; ++i) {
        sum_rows.insert(sum_rows.end(), summary[i].begin(), summary[i].end());
        test_rows.insert(test_rows.end(), tests[i].begin(), tests[i].end());
        if (models[i]) write_artifact(path(model_artifact(c.from + static_cast<Day>(i))), models[i]->dump(2) + "\n",
                                      meta_for(c, "latency_model", up));
    }
    write_artifact(path(kLatencySummary),
                   to_csv({"date", "model", "covariates", "n", "intercept", "alpha", "fee_per_byte", "mempool_size",
                           "log_likelihood", "mspe_in", "mspe_out"},
                          sum_rows),
                   meta_for(c, "latency_summary", up));
    write_artifact(path(kLatencyTests), to_csv({"date", "test", "statistic", "dof", "p_value"}, test_rows),
                   meta_for(c, "latency_tests", up));
}

void Pipeline::bounds() {
    const auto& c = config_;
    auto vol_src = load_upstream(path(kSpotVol), "spot_vol", c.hash);
    auto tx_src = load_upstream(path(kTransactions), "transactions", c.hash);
    auto prof_src = load_upstream(path(kProfiles), "profiles", c.hash);
    std::map<std::string, std::string> up{{"spot_vol", vol_src.meta.content_hash},
                                          {"transactions", tx_src.meta.content_hash},
                                          {"profiles", prof_src.meta.content_hash}};

    auto profiles = profiles_from_json(prof_src.content);
    std::map<std::string, int> confirmations;
    for (const auto& p : profiles) confirmations[p.exchange] = p.confirmations_or_default();

    auto txs = transactions_from_csv(tx_src.content);
    std::sort(txs.begin(), txs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.announce_time, a.tx_id) < std::tie(b.announce_time, b.tx_id);
    });

    csv::Table vol = parse_csv(vol_src.content, kSpotVol);
    std::map<Day, std::vector<const std::vector<std::string>*>> by_day;
    for (const auto& row : vol.rows) {
        if (row[4] == "1") continue;
        by_day[day_of(parse_timestamp(row[1]))].push_back(&row);
    }

    std::size_t n_days = static_cast<std::size_t>(c.to - c.from + 1);
    std::vector<std::vector<std::vector<std::string>>> rows(n_days);
    std::vector<std::string> model_hashes(n_days);
    parallel_for(n_days, c.jobs, [&](std::size_t i) {
        Day day = c.from + static_cast<Day>(i);
        std::string name = model_artifact(day);
        if (!std::filesystem::exists(path(name))) {
            log::warn("bounds: no latency model for " + format_date(day) + ", day skipped");
            return;
        }
        auto model_src = load_upstream(path(name), "latency_model", c.hash);
        model_hashes[i] = model_src.meta.content_hash;
        json mj = json::parse(model_src.content);
        auto model = latency::model_from_json(mj.at("model"));
        Day fit_day = parse_date(mj.at("fit_day").get<std::string>());
        if (fit_day >= day && !c.allow_same_day)
            fail(ErrorCode::stale_artifact, "latency model for " + format_date(day) + " was fitted on the same day");
        latency::BlockTimeStats blocks{mj.at("blocks").at("mean").get<double>(), mj.at("blocks").at("variance").get<double>()};
        double fee = c.fee_per_byte ? *c.fee_per_byte : mj.at("fee_per_byte_median").get<double>();
        double mempool_default = mj.at("mempool_size_median").get<double>();

        auto it = by_day.find(day);
        if (it == by_day.end()) return;
        for (const auto* row : it->second) {
            const std::string& ex = (*row)[0];
            Timestamp ts = parse_timestamp((*row)[1]);
            double sigma = parse_double((*row)[2]);
            auto conf = confirmations.find(ex);
            if (conf == confirmations.end()) fail(ErrorCode::invalid_argument, "no exchange profile for '" + ex + "'");
            // Latest mempool size announced at or before the minute.
            auto pos = std::upper_bound(txs.begin(), txs.end(), ts,
                                        [](Timestamp t, const latency::TxRecord& r) { return t < r.announce_time; });
            double mempool = pos == txs.begin() ? mempool_default : std::prev(pos)->mempool_size;
            std::vector<double> x;
            for (const auto& s : model.schema) x.push_back(s.name == "fee_per_byte" ? fee : mempool);
            auto mom = latency::predict_moments(model, x);
            auto total = latency::total_latency_moments(mom.mean, mom.variance, blocks, conf->second);
            for (double g : c.gammas) {
                auto dec = bounds::decompose(sigma, g, mom.mean, mom.variance, blocks, conf->second);
                rows[i].push_back({(*row)[1], ex, (*row)[2], fmt(total.m1), fmt(total.m2), fmt(g), fmt_bp(dec.bound),
                                   fmt(dec.security_share), fmt(dec.uncertainty_share)});
            }
        }
        std::stable_sort(rows[i].begin(), rows[i].end(), [](const auto& a, const auto& b) {
            return std::tie(a[0], a[1]) < std::tie(b[0], b[1]);
        });
    });

    std::vector<std::vector<std::string>> all;
    std::map<std::pair<std::string, double>, std::vector<std::array<double, 3>>> per;
    for (std::size_t i = 0; i < n_days; ++i) {
        if (!model_hashes[i].empty()) up["latency_model_" + format_date(c.from + static_cast<Day>(i))] = model_hashes[i];
        for (auto& r : rows[i]) {
            per[{r[1], parse_double(r[5])}].push_back({parse_bp(r[6]), parse_double(r[7]), parse_double(r[8])});
            all.push_back(std::move(r));
        }
    }
    std::vector<std::vector<std::string>> summary;
    for (const auto& [key, vals] : per) {
        std::vector<double> d, sec, unc;
        for (const auto& v : vals) {
            d.push_back(v[0]);
            if (!std::isnan(v[1])) sec.push_back(v[1]);
            if (!std::isnan(v[2])) unc.push_back(v[2]);
        }
        double sd = d.size() > 1 ? std::sqrt(sample_variance(d)) : std::nan("");
        summary.push_back({key.first, fmt(key.second), std::to_string(d.size()), fmt_bp(mean(d)), fmt_bp(median(d)), fmt_bp(sd),
                           sec.empty() ? "" : fmt(median(sec)), unc.empty() ? "" : fmt(median(unc))});
    }
    write_artifact(path(kBounds),
                   to_csv({"timestamp", "sell_exchange", "sigma", "m1", "m2", "gamma", "bound_bp", "security_share",
                           "uncertainty_share"},
                          all),
                   meta_for(c, "bounds", up));
    write_artifact(path(kBoundsSummary),
                   to_csv({"sell_exchange", "gamma", "n", "mean_bp", "median_bp", "sd_bp", "security_share_median",
                           "uncertainty_share_median"},
                          summary),
                   meta_for(c, "bounds_summary", up));
}

void Pipeline::excess() {
    const auto& c = config_;
    auto book_src = load_upstream(path(kOrderbooks), "orderbooks", c.hash);
    auto prof_src = load_upstream(path(kProfiles), "profiles", c.hash);
    auto bound_src = load_upstream(path(kBounds), "bounds", c.hash);
    std::map<std::string, std::string> up{{"orderbooks", book_src.meta.content_hash},
                                          {"profiles", prof_src.meta.content_hash},
                                          {"bounds", bound_src.meta.content_hash}};
    auto profiles = profiles_from_json(prof_src.content);
    std::vector<std::string> names;
    for (const auto& p : profiles) names.push_back(p.exchange);
    auto bound_rows = bounds_from_csv(bound_src.content);
    marketdata::MinuteBooks minutes = marketdata::align_to_minutes(books_from_csv(book_src.content));
    marketdata::QuantityGridOptions qopt{c.quantity_points, c.deduct_withdrawal_fee};

    std::vector<std::int64_t> keys;
    for (const auto& [m, per] : minutes) {
        Day d = floor_div(m, kMinutesPerDay);
        if (d >= c.from && d <= c.to && per.size() >= 2) keys.push_back(m);
    }
    std::vector<std::optional<marketdata::PriceDifferenceMatrix>> mats(keys.size());
    parallel_for(keys.size(), c.jobs, [&](std::size_t i) {
        const auto& per = minutes.at(keys[i]);
        std::vector<std::optional<marketdata::OrderbookSnapshot>> books;
        for (const auto& n : names) {
            auto it = per.find(n);
            books.push_back(it == per.end() ? std::nullopt : std::optional(it->second));
        }
        mats[i] = marketdata::difference_matrix(keys[i] * kSecondsPerMinute, names, books, profiles, qopt);
    });

    const double g0 = c.gammas.front();
    std::vector<std::vector<std::string>> diff_rows, excess_rows;
    // (date, gamma) -> (positive, within)
    std::map<std::pair<std::string, double>, std::pair<std::size_t, std::size_t>> share;
    std::map<double, std::pair<std::size_t, std::size_t>> share_all;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto& m = *mats[i];
        std::string ts = format_timestamp(m.timestamp);
        std::string date = format_date(floor_div(keys[i], kMinutesPerDay));
        std::map<double, std::vector<double>> bounds_by_gamma;
        for (double g : c.gammas) {
            auto& b = bounds_by_gamma[g];
            for (const auto& n : names) {
                auto it = bound_rows.find({keys[i], n});
                b.push_back(it == bound_rows.end() || !it->second.bound.count(g) ? std::nan("") : it->second.bound.at(g));
            }
        }
        for (double g : c.gammas) {
            auto r = bounds::excess_differences(m, bounds_by_gamma[g]);
            auto& s = share[{date, g}];
            s.first += r.positive;
            s.second += r.positive_within;
            share_all[g].first += r.positive;
            share_all[g].second += r.positive_within;
            if (g != g0) continue;
            for (std::size_t sell = 0; sell < names.size(); ++sell)
                for (std::size_t buy = 0; buy < names.size(); ++buy) {
                    if (sell == buy) continue;
                    double delta = m.at(sell, buy);
                    if (std::isnan(delta)) continue;
                    double d = bounds_by_gamma[g][sell];
                    std::size_t k = sell * names.size() + buy;
                    diff_rows.push_back({ts, names[buy], names[sell], fmt(delta), fmt(m.quantity_at(sell, buy))});
                    excess_rows.push_back({ts, names[buy], names[sell], fmt_bp(delta), fmt_bp(d), fmt_bp(r.excess[k]),
                                           std::isnan(d) ? "" : (delta > d ? "0" : "1")});
                }
        }
    }
    std::vector<std::vector<std::string>> share_rows;
    auto share_str = [](std::pair<std::size_t, std::size_t> p) {
        return p.first ? fmt(static_cast<double>(p.second) / static_cast<double>(p.first)) : std::string();
    };
    for (const auto& [key, p] : share)
        share_rows.push_back({key.first, fmt(key.second), std::to_string(p.first), std::to_string(p.second), share_str(p)});
    for (const auto& [g, p] : share_all)
        share_rows.push_back({"all", fmt(g), std::to_string(p.first), std::to_string(p.second), share_str(p)});

    write_artifact(path(kDifferences), to_csv({"timestamp", "buy", "sell", "delta", "quantity"}, diff_rows),
                   meta_for(c, "differences", up));
    write_artifact(path(kExcess), to_csv({"timestamp", "buy", "sell", "delta_bp", "bound_bp", "excess_bp", "within"}, excess_rows),
                   meta_for(c, "excess", up));
    write_artifact(path(kShareWithin), to_csv({"date", "gamma", "positive", "within", "share"}, share_rows),
                   meta_for(c, "share_within", up));
}

void Pipeline::implied_gamma() {
    const auto& c = config_;
    auto diff_src = load_upstream(path(kDifferences), "differences", c.hash);
    auto bound_src = load_upstream(path(kBounds), "bounds", c.hash);
    std::map<std::string, std::string> up{{"differences", diff_src.meta.content_hash}, {"bounds", bound_src.meta.content_hash}};
    auto bound_rows = bounds_from_csv(bound_src.content);
    csv::Table diffs = parse_csv(diff_src.content, kDifferences);

    std::map<std::int64_t, std::vector<bounds::ImpliedGammaInput>> per_minute;
    for (const auto& row : diffs.rows) {
        std::int64_t m = minute_bucket(parse_timestamp(row[0]));
        auto it = bound_rows.find({m, row[2]});
        auto& list = per_minute[m];
        double delta = parse_double(row[3]);
        if (it == bound_rows.end() || !(delta > 0.0) || !(it->second.sigma > 0.0)) continue;
        list.push_back({delta, it->second.sigma, it->second.m1, it->second.m2});
    }
    std::vector<std::vector<std::string>> rows;
    std::map<std::string, std::vector<double>> daily;
    for (const auto& [m, list] : per_minute) {
        if (list.empty()) continue;
        double g = bounds::implied_gamma_market(list);
        rows.push_back({format_timestamp(m * kSecondsPerMinute), fmt(g), std::to_string(list.size())});
        daily[format_date(floor_div(m, kMinutesPerDay))].push_back(g);
    }
    std::vector<std::vector<std::string>> daily_rows;
    for (const auto& [date, gs] : daily)
        daily_rows.push_back({date, fmt(mean(gs)), fmt(median(gs)), std::to_string(gs.size())});
    write_artifact(path(kImplied), to_csv({"timestamp", "gamma_hat", "pairs"}, rows), meta_for(c, "implied_gamma", up));
    write_artifact(path(kImpliedDaily), to_csv({"date", "mean_gamma_hat", "median_gamma_hat", "minutes"}, daily_rows),
                   meta_for(c, "implied_gamma_daily", up));
}

bool Pipeline::simulate() {
    json report = simulate_report(config_.simulate, config_.seed, config_.jobs);
    write_artifact(path(kSimReport), report.dump(2) + "\n", meta_for(config_, "simulate_report"));
    bool ok = report.at("all_pass").get<bool>();
    if (!ok) log::error("simulate: at least one oracle check failed, see " + path(kSimReport));
    return ok;
}

json simulate_report(const json& s, std::uint64_t seed, unsigned threads) {
    auto num = [&](const json& j, const char* key, double fallback) {
        return j.contains(key) && !j[key].is_null() ? j[key].get<double>() : fallback;
    };
    json out;
    out["seed"] = seed;
    out["config"] = s;
    const std::size_t paths = s.value("paths", std::size_t{1000000});
    if (paths < 2) fail(ErrorCode::invalid_argument, "simulate.paths must be >= 2");

    json lap = s.value("laplace", json::object());
    simulator::SimConfig lc;
    lc.seed = seed;
    lc.paths = paths;
    lc.threads = threads;
    lc.sigma = num(lap, "sigma", 0.001);
    lc.delta = num(lap, "delta", 0.0);
    double lambda = num(lap, "lambda", 0.1);
    lc.latency.law = simulator::LatencyLaw::exponential;
    lc.latency.rate = lambda;
    auto sample = simulator::sample_returns(lc);
    auto ks = simulator::laplace_check(sample.returns, lc.delta, lc.sigma, lambda);
    auto mom = simulator::sample_moments(sample.returns);
    double var_true = lc.sigma * lc.sigma / lambda;
    bool mean_ok = std::abs(mom.mean - lc.delta) <= 3.0 * mom.mean_se;
    bool var_ok = std::abs(mom.variance - var_true) <= 3.0 * mom.variance_se;
    out["laplace"] = {{"ks_distance", ks.distance}, {"critical_value_1pct", ks.critical_value}, {"p_value", ks.p_value},
                      {"ks_pass", ks.pass}, {"mean", mom.mean}, {"mean_se", mom.mean_se}, {"mean_expected", lc.delta},
                      {"variance", mom.variance}, {"variance_se", mom.variance_se}, {"variance_expected", var_true},
                      {"mean_ok", mean_ok}, {"variance_ok", var_ok}};

    json neg = s.value("negative_control", json::object());
    simulator::SimConfig nc = lc;
    nc.seed = seed + 1;
    nc.latency.law = simulator::LatencyLaw::gamma;
    nc.latency.shape = num(neg, "shape", 0.6);
    nc.latency.rate = nc.latency.shape * lambda;  // same mean latency as the exponential case
    auto neg_sample = simulator::sample_returns(nc);
    auto neg_ks = simulator::laplace_check(neg_sample.returns, nc.delta, nc.sigma, lambda);
    out["negative_control"] = {{"shape", nc.latency.shape}, {"ks_distance", neg_ks.distance},
                               {"critical_value_1pct", neg_ks.critical_value}, {"rejected", !neg_ks.pass}};

    json ind = s.value("indifference", json::object());
    double gamma = num(ind, "gamma", 2.0);
    simulator::SimConfig ic;
    ic.seed = seed + 2;
    ic.paths = paths;
    ic.threads = threads;
    ic.sigma = num(ind, "sigma", 0.0009);
    ic.latency.law = simulator::LatencyLaw::gamma;
    ic.latency.shape = num(ind, "shape", 0.62);
    ic.latency.rate = num(ind, "rate", 0.05);
    auto raw = latency::gamma_raw_moments(ic.latency.shape, ic.latency.rate);
    double d = bounds::crra_bound(ic.sigma, gamma, raw.m1, raw.m2);
    ic.delta = d;
    auto at_bound = simulator::sample_returns(ic);
    auto ce = simulator::ce_estimate(at_bound.returns, bounds::Utility::crra(gamma, 0.0), simulator::CeMode::truncated);
    auto gross = bounds::Utility::crra(gamma, 1.0);
    auto full = simulator::ce_estimate(at_bound.returns, gross, simulator::CeMode::full);
    auto trunc_gross = simulator::ce_estimate(at_bound.returns, gross, simulator::CeMode::truncated);
    double gap = std::abs(full.ce - trunc_gross.ce);
    bool ind_ok = std::abs(ce.ce) < std::max(3.0 * ce.se, gap);
    ic.delta = 2.0 * d;
    auto at_double = simulator::sample_returns(ic);
    auto ce2 = simulator::ce_estimate(at_double.returns, bounds::Utility::crra(gamma, 0.0), simulator::CeMode::truncated);
    bool double_ok = ce2.ce - 2.326347874 * ce2.se > 0.0;
    out["indifference"] = {{"gamma", gamma}, {"bound", d}, {"ce", ce.ce}, {"ce_se", ce.se}, {"truncation_gap", gap},
                           {"pass", ind_ok}, {"ce_at_double_bound", ce2.ce}, {"ce_at_double_bound_se", ce2.se},
                           {"double_bound_pass", double_ok}, {"full_utility_breaches", full.breaches}};
    out["all_pass"] = ks.pass && mean_ok && var_ok && !neg_ks.pass && ind_ok && double_ok;
    return out;
}

}  // namespace latarb::pipeline
