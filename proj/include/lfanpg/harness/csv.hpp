#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfanpg/npg.hpp"

namespace lfanpg::harness {

inline constexpr const char* kCsvHeader =
    "run_id,env,transform,seed,zeta,iteration,avg_return,episodes_used,env_steps_used,wall_clock_s,theta_norm,"
    "w_hat_norm";

struct RunKey {
  std::string run_id;
  std::string env;
  std::string transform;
  std::uint64_t seed = 0;
  double zeta = 0.0;
};

inline std::string make_run_id(const std::string& env, const std::string& transform, double zeta,
                               std::uint64_t seed)
{
  return env + "_" + transform + "_z" + format_double(zeta) + "_s" + std::to_string(seed);
}

inline void write_csv_row(std::ostream& os, const RunKey& key, const IterationRecord& r)
{
  os << key.run_id << ',' << key.env << ',' << key.transform << ',' << key.seed << ',' << format_double(key.zeta)
     << ',' << r.iteration << ',' << format_double(r.avg_return) << ',' << r.episodes_used << ','
     << r.env_steps_used << ',' << format_double(r.wall_clock_s) << ',' << format_double(r.theta_norm) << ','
     << format_double(r.w_hat_norm) << '\n';
}

struct CsvRow {
  RunKey key;
  IterationRecord record;
};

/// Reads a metrics CSV written by write_csv_row; the header must match exactly.
inline std::vector<CsvRow> read_csv(std::istream& is)
{
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw std::runtime_error("metrics csv: missing or unexpected header");
  std::vector<CsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');)
      f.push_back(tok);
    if (f.size() != 12)
      throw std::runtime_error("metrics csv: expected 12 columns, got " + std::to_string(f.size()));
    CsvRow row;
    row.key = {f[0], f[1], f[2], std::stoull(f[3]), parse_double(f[4])};
    row.record.iteration = std::stoul(f[5]);
    row.record.avg_return = parse_double(f[6]);
    row.record.episodes_used = std::stoul(f[7]);
    row.record.env_steps_used = std::stoul(f[8]);
    row.record.wall_clock_s = parse_double(f[9]);
    row.record.theta_norm = parse_double(f[10]);
    row.record.w_hat_norm = parse_double(f[11]);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Median of a non-empty sample (mean of the two middle values for even sizes).
inline double median(std::vector<double> v)
{
  if (v.empty())
    throw std::invalid_argument("median of an empty sample");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double hi = *mid;
  if (v.size() % 2 == 1)
    return hi;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace lfanpg::harness
