#include "latarb/latency/tx_io.hpp"

#include <algorithm>
#include <cmath>

#include "latarb/common/csv.hpp"
#include "latarb/common/error.hpp"
#include "latarb/common/log.hpp"
#include "latarb/common/numfmt.hpp"
#include "latarb/common/stats.hpp"

namespace latarb::latency {
namespace {

void reject(bool strict, const std::string& where, const std::string& why, std::size_t& dropped) {
    if (strict) fail(ErrorCode::parse_error, where + ": " + why);
    ++dropped;
}

}  // namespace

std::vector<TxRecord> read_transactions(const std::string& path, bool strict) {
    csv::Table t = csv::read_file(path);
    csv::require_header(t, {"tx_id", "announce_time", "inclusion_time", "fee_per_byte", "size", "mempool_size"}, path);
    std::vector<TxRecord> out;
    out.reserve(t.rows.size());
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        std::string where = path + ":" + std::to_string(t.lines[r]);
        TxRecord rec;
        try {
            rec.tx_id = row[0];
            rec.announce_time = parse_timestamp(row[1]);
            rec.inclusion_time = parse_timestamp(row[2]);
            rec.fee_per_byte = parse_double(row[3]);
            rec.size = parse_double(row[4]);
            rec.mempool_size = parse_double(row[5]);
        } catch (const Error& e) {
            reject(strict, where, e.what(), dropped);
            continue;
        }
        if (rec.inclusion_time <= rec.announce_time) {
            reject(strict, where, "inclusion must follow announcement", dropped);
            continue;
        }
        if (rec.fee_per_byte < 0.0) {
            reject(strict, where, "negative fee per byte", dropped);
            continue;
        }
        if (rec.mempool_size < 1.0) {
            reject(strict, where, "mempool size below 1", dropped);
            continue;
        }
        out.push_back(std::move(rec));
    }
    if (dropped) log::warn(path + ": dropped " + std::to_string(dropped) + " invalid transaction rows");
    return out;
}

std::vector<Block> read_blocks(const std::string& path, bool strict) {
    csv::Table t = csv::read_file(path);
    csv::require_header(t, {"height", "timestamp"}, path);
    std::vector<Block> out;
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::string where = path + ":" + std::to_string(t.lines[r]);
        try {
            double h = parse_double(t.rows[r][0]);
            if (!(h >= 0.0) || h != std::floor(h)) fail(ErrorCode::parse_error, "height must be a non-negative integer");
            out.push_back({static_cast<long long>(h), parse_timestamp(t.rows[r][1])});
        } catch (const Error& e) {
            reject(strict, where, e.what(), dropped);
        }
    }
    if (dropped) log::warn(path + ": dropped " + std::to_string(dropped) + " invalid block rows");
    std::sort(out.begin(), out.end(), [](const Block& a, const Block& b) { return a.height < b.height; });
    return out;
}

std::vector<TxRecord> confirmed_between(const std::vector<TxRecord>& records, Timestamp from, Timestamp to) {
    std::vector<TxRecord> out;
    for (const auto& r : records)
        if (r.inclusion_time >= from && r.inclusion_time < to) out.push_back(r);
    return out;
}

DurationData to_duration_data(const std::vector<TxRecord>& records, const std::vector<CovariateSpec>& schema) {
    DurationData d;
    d.schema = schema;
    d.covariates.resize(schema.size());
    for (const auto& r : records) {
        std::vector<double> raw;
        for (const auto& spec : schema) {
            if (spec.name == "fee_per_byte")
                raw.push_back(r.fee_per_byte);
            else if (spec.name == "mempool_size")
                raw.push_back(r.mempool_size);
            else if (spec.name == "size")
                raw.push_back(r.size);
            else
                fail(ErrorCode::schema_mismatch, "unknown transaction covariate '" + spec.name + "'");
        }
        if (std::any_of(raw.begin(), raw.end(), [](double v) { return std::isnan(v); })) continue;
        d.tau.push_back(r.latency_minutes());
        for (std::size_t j = 0; j < raw.size(); ++j) d.covariates[j].push_back(raw[j]);
    }
    return d;
}

BlockTimeStats block_time_stats(const std::vector<Block>& blocks, Timestamp from, Timestamp to) {
    std::vector<double> gaps;
    const Block* prev = nullptr;
    for (const auto& b : blocks) {
        if (b.timestamp < from || b.timestamp >= to) continue;
        if (prev && b.height == prev->height + 1) gaps.push_back(static_cast<double>(b.timestamp - prev->timestamp) / 60.0);
        prev = &b;
    }
    if (gaps.size() < 2) fail(ErrorCode::insufficient_history, "need at least three consecutive blocks for block-time moments");
    BlockTimeStats s{mean(gaps), sample_variance(gaps)};
    if (!(s.mean > 0.0) || !(s.variance > 0.0)) fail(ErrorCode::insufficient_history, "degenerate inter-block times");
    return s;
}

}  // namespace latarb::latency
