#include "wsindy/io.hpp"

#include "wsindy/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace wsindy::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  return f;
}

double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("malformed number '" + std::string(s) + "' on line " + std::to_string(line));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_trajectory_csv(const std::filesystem::path& path, const TimeSeries& ts) {
  auto f = open_out(path);
  f << "t";
  for (Eigen::Index d = 0; d < ts.dim(); ++d) f << ",x" << d + 1;
  f << "\n";
  for (Eigen::Index m = 0; m < ts.size(); ++m) {
    f << format_double(ts.t(m));
    for (Eigen::Index d = 0; d < ts.dim(); ++d) f << ',' << format_double(ts.y(m, d));
    f << '\n';
  }
}

TimeSeries read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(f, line)) throw InvalidArgument("'" + path.string() + "' is empty");
  std::vector<std::vector<double>> rows;
  std::size_t cols = 0;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(parse_double(std::string_view(line).substr(start, comma - start), lineno));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols || cols < 2) throw InvalidArgument("inconsistent column count on line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  TimeSeries ts;
  ts.t.resize(static_cast<Eigen::Index>(rows.size()));
  ts.y.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols) - 1);
  for (std::size_t m = 0; m < rows.size(); ++m) {
    ts.t(static_cast<Eigen::Index>(m)) = rows[m][0];
    for (std::size_t d = 1; d < cols; ++d) ts.y(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d) - 1) = rows[m][d];
  }
  ts.validate();
  return ts;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
    f << '\n';
  }
}

}  // namespace wsindy::io
