#include "fqma/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fqma {

std::vector<PriceRecord> ingest_records(std::istream& in, const std::string& asset) {
  std::vector<PriceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      header_seen = true;
      if (line.find("timestamp") != std::string::npos) continue;  // header row
    }
    std::istringstream ss(line);
    std::string ts_str, price_str;
    if (!std::getline(ss, ts_str, ',') || !std::getline(ss, price_str, ','))
      throw ParseError("expected 'timestamp,price'", line_no);
    PriceRecord rec;
    rec.asset = asset;
    try {
      std::size_t used = 0;
      rec.timestamp = std::stoll(ts_str, &used);
      if (used != ts_str.size()) throw std::invalid_argument("trailing");
      rec.price = std::stod(price_str, &used);
    } catch (const std::exception&) {
      throw ParseError("could not parse row '" + line + "'", line_no);
    }
    if (!(rec.price > 0.0))
      throw NonPositivePrice("nonpositive price at line " + std::to_string(line_no));
    out.push_back(rec);
  }
  std::stable_sort(out.begin(), out.end(), [](const PriceRecord& a, const PriceRecord& b) {
    return a.timestamp < b.timestamp;
  });
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (out[i].timestamp == out[i + 1].timestamp)
      throw InvalidInput("duplicate timestamp " + std::to_string(out[i].timestamp));
  return out;
}

std::vector<PriceRecord> ingest(const std::string& csv_path, const std::string& asset) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidInput("cannot open " + csv_path);
  return ingest_records(in, asset);
}

namespace {

constexpr int kMinReturnsPerDay = 12;
constexpr std::int64_t kSecondsPerDay = 86400;

struct DayReturns {
  std::vector<int> hours;       // hour of day, 1..23
  std::vector<double> returns;  // log(p_h / p_{h-1}) for consecutive hours
};

}  // namespace

GapDaySample build_gap_day_sample(const std::vector<PriceRecord>& records) {
  if (records.empty()) throw InsufficientData("no price records");

  // hourly close per (day, hour); the last record inside an hour wins
  std::map<std::int64_t, double> hourly;  // key: hours since epoch
  for (const auto& r : records) hourly[r.timestamp / 3600] = r.price;

  std::map<std::int64_t, DayReturns> days;
  for (auto it = hourly.begin(); it != hourly.end(); ++it) {
    auto prev = it;
    if (prev == hourly.begin()) continue;
    --prev;
    if (prev->first + 1 != it->first) continue;  // not consecutive hours
    std::int64_t day = (it->first * 3600) / kSecondsPerDay;
    int hour = static_cast<int>(it->first % 24);
    if (hour == 0) continue;  // return crosses midnight: belongs to no day
    auto& d = days[day];
    d.hours.push_back(hour);
    d.returns.push_back(std::log(it->second / prev->second));
  }

  std::int64_t first_day = records.front().timestamp / kSecondsPerDay;
  std::int64_t last_day = records.back().timestamp / kSecondsPerDay;
  if (last_day - first_day + 1 < 4)
    throw InsufficientData("need at least 4 UTC calendar days of data");

  GapDaySample sample;
  auto valid = [&](std::int64_t day) {
    auto it = days.find(day);
    return it != days.end() && static_cast<int>(it->second.returns.size()) >= kMinReturnsPerDay;
  };
  for (std::int64_t day = first_day; day <= last_day; ++day) {
    auto it = days.find(day);
    if (it != days.end() &&
        static_cast<int>(it->second.returns.size()) < kMinReturnsPerDay)
      sample.dropped_days.push_back(day);
  }

  std::int64_t day = first_day;
  while (day + 2 <= last_day) {
    if (!valid(day) || !valid(day + 1)) {
      ++day;
      continue;
    }
    const DayReturns& cov = days[day];
    const DayReturns& resp = days[day + 1];
    std::vector<double> times(cov.hours.size());
    for (std::size_t i = 0; i < cov.hours.size(); ++i)
      times[i] = (cov.hours[i] - 1) / 22.0;  // hours 1..23 onto [0,1]
    GapDayPair pair;
    pair.covariate = SparseCurve(day, std::move(times), cov.returns);
    pair.response = *std::min_element(resp.returns.begin(), resp.returns.end());
    pair.covariate_day = day;
    sample.pairs.push_back(std::move(pair));
    day += 3;  // response day, then one gap day
  }
  if (sample.pairs.empty()) throw InsufficientData("no usable covariate/response day pairs");
  return sample;
}

}  // namespace fqma
