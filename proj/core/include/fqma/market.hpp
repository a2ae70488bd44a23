#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fqma/types.hpp"

namespace fqma {

struct PriceRecord {
  std::string asset;
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  double price = 0.0;          // > 0
};

// Reads a CSV with header "timestamp,price"; returns records sorted by
// timestamp.  Duplicate timestamps and nonpositive prices are rejected.
std::vector<PriceRecord> ingest(const std::string& csv_path, const std::string& asset);
std::vector<PriceRecord> ingest_records(std::istream& in, const std::string& asset);

// One sample: hourly log-return curve of a day paired with the minimum
// hourly log-return of the following day; the day after that is skipped to
// weaken serial dependence.
struct GapDayPair {
  SparseCurve covariate;  // hour positions mapped onto [0,1]
  double response = 0.0;
  std::int64_t covariate_day = 0;  // days since epoch, UTC
};

struct GapDaySample {
  std::vector<GapDayPair> pairs;
  std::vector<std::int64_t> dropped_days;  // days with too few hourly returns
};

// Walks UTC calendar days in blocks of three (covariate, response, gap); a
// block is emitted when covariate and response days each have at least 12
// hourly returns and the gap day lies inside the observed range.  Days with
// fewer than 12 returns are dropped (reported in dropped_days) and the scan
// advances one day.
GapDaySample build_gap_day_sample(const std::vector<PriceRecord>& records);

}  // namespace fqma
