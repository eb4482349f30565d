#pragma once

#include "grw/ensemble.hpp"
#include "grw/ontology.hpp"
#include "grw/statistics.hpp"
#include "grw/trajectory.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace grw {

/// Writes to a sibling temporary file and renames it over `path`; parent
/// directories are created. Readers never see a partially written file.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal text that reads back to the same double ("nan", "inf").
std::string format_double(double value);

/// One JSON object per collapse: {"t", "particle", "center", "pre_weights", "post_weights"}.
std::string events_jsonl(const TrajectoryRecord& record);
/// Header time,position,particle.
std::string flashes_csv(const std::vector<Flash>& flashes);
/// Header x,m.
std::string density_csv(const MatterDensityField& field);
/// Header statistic,estimate,se,target,z,pass.
std::string summary_csv(const std::vector<StatisticRecord>& statistics);
/// Header statistic,provenance.
std::string provenance_csv(const std::vector<StatisticRecord>& statistics);
/// Header histogram,bin_lower,bin_upper,count.
std::string histograms_csv(const std::vector<Histogram>& histograms);

/// Parses a file produced by summary_csv; provenance is left empty.
std::vector<StatisticRecord> read_summary_csv(const std::filesystem::path& path);

}  // namespace grw
