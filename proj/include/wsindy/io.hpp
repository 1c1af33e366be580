#pragma once

#include "wsindy/time_series.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace wsindy::io {

/// Header row then one row per sample: t, x1, ..., xD. Values are written
/// with 17 significant digits so a read reproduces them exactly.
void write_trajectory_csv(const std::filesystem::path& path, const TimeSeries& ts);

/// Inverse of write_trajectory_csv. Throws InvalidArgument on malformed input.
TimeSeries read_trajectory_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Plain numeric table with a header row.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);

}  // namespace wsindy::io
