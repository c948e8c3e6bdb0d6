#pragma once

#include <string>
#include <vector>

#include "latarb/common/time.hpp"
#include "latarb/latency/duration_model.hpp"

namespace latarb::latency {

struct TxRecord {
    std::string tx_id;
    Timestamp announce_time = 0;
    Timestamp inclusion_time = 0;
    double fee_per_byte = 0.0;
    double size = 0.0;
    double mempool_size = 0.0;

    double latency_minutes() const { return static_cast<double>(inclusion_time - announce_time) / 60.0; }
};

struct Block {
    long long height = 0;
    Timestamp timestamp = 0;
};

// In strict mode any invalid row is an error; otherwise it is dropped with a warning.
std::vector<TxRecord> read_transactions(const std::string& path, bool strict);
std::vector<Block> read_blocks(const std::string& path, bool strict);

// Records confirmed (included) within [from, to).
std::vector<TxRecord> confirmed_between(const std::vector<TxRecord>& records, Timestamp from, Timestamp to);

// Latencies plus raw covariates under `schema`; records with missing covariates are skipped.
DurationData to_duration_data(const std::vector<TxRecord>& records,
                              const std::vector<CovariateSpec>& schema = default_covariates());

// Inter-block time moments over blocks with timestamps in [from, to), ordered by height.
BlockTimeStats block_time_stats(const std::vector<Block>& blocks, Timestamp from, Timestamp to);

}  // namespace latarb::latency
