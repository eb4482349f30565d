#include "grw/io.hpp"

#include <json.hpp>

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace grw {

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

}  // namespace

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string events_jsonl(const TrajectoryRecord& record) {
  std::string out;
  for (const auto& e : record.events) {
    nlohmann::ordered_json j;
    j["t"] = e.time;
    j["particle"] = e.particle;
    j["center"] = e.center;
    j["pre_weights"] = e.pre_weights;
    j["post_weights"] = e.post_weights;
    out += j.dump() + "\n";
  }
  return out;
}

std::string flashes_csv(const std::vector<Flash>& flashes) {
  std::string out = "time,position,particle\n";
  for (const auto& f : flashes)
    out += format_double(f.time) + "," + format_double(f.position) + "," + std::to_string(f.particle) + "\n";
  return out;
}

std::string density_csv(const MatterDensityField& field) {
  std::string out = "x,m\n";
  for (Eigen::Index j = 0; j < field.values.size(); ++j)
    out += format_double(field.grid.coordinate(j)) + "," + format_double(field.values(j)) + "\n";
  return out;
}

std::string summary_csv(const std::vector<StatisticRecord>& statistics) {
  std::string out = "statistic,estimate,se,target,z,pass\n";
  for (const auto& r : statistics)
    out += csv_quote(r.name) + "," + format_double(r.estimate) + "," + format_double(r.se) + "," +
           format_double(r.target) + "," + format_double(r.z) + "," + (r.pass ? "true" : "false") + "\n";
  return out;
}

std::string provenance_csv(const std::vector<StatisticRecord>& statistics) {
  std::string out = "statistic,provenance\n";
  for (const auto& r : statistics) out += csv_quote(r.name) + "," + csv_quote(r.provenance) + "\n";
  return out;
}

std::string histograms_csv(const std::vector<Histogram>& histograms) {
  std::string out = "histogram,bin_lower,bin_upper,count\n";
  for (const auto& h : histograms)
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      out += csv_quote(h.name) + "," + format_double(h.lower + double(b) * h.width) + "," +
             format_double(h.lower + double(b + 1) * h.width) + "," + std::to_string(h.counts[b]) + "\n";
  return out;
}

std::vector<StatisticRecord> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"statistic", "estimate", "se", "target", "z", "pass"})
    throw std::runtime_error(path.string() + ": not a summary file (bad header)");
  std::vector<StatisticRecord> out;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    try {
      if (f.size() != 6) throw std::runtime_error("expected 6 fields");
      if (f[5] != "true" && f[5] != "false") throw std::runtime_error("pass must be true or false");
      out.push_back({f[0], parse_double(f[1]), parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                     f[5] == "true", ""});
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path.string() + ": line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace grw
