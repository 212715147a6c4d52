#pragma once

// CSV emission with a commented reproducibility header, companion gnuplot
// scripts, and the mirror-image reader the summary report consumes.  Writes
// go through a temp file + rename so readers never see a half-written table.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "berglab/numerics.hpp"

namespace berglab::report {

inline constexpr const char* kToolVersion = "berglab 1.0.0";

// One table = one CSV file.  Cells are pre-formatted strings so categorical
// columns (mode names, weight names) live alongside numeric ones.
struct Table {
  std::string name;       // file stem, also the plot title
  std::string module_op;  // producing operation, recorded in the header
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  // extra "# key: value" lines (verdicts, grid summaries)
  std::vector<std::pair<std::string, std::string>> notes;
};

struct RunMeta {
  std::string tool_version = kToolVersion;
  std::string config_hash;  // hash of the effective config, see experiments
  std::uint64_t seed = 0;
  double wall_seconds = 0;  // header only; never part of the data body
};

// canonical numeric cell format shared by all writers (and by tests)
std::string format_cell(Scalar v);

// Writes <dir>/<name>.csv atomically; returns the final path.  The header is
// '#'-comment lines (tool version, operation, config hash, seed, wall time,
// notes); the body below it is a function of data alone, so identical runs
// produce byte-identical bodies.
std::string write_csv(const std::string& dir, const Table& t, const RunMeta& meta);

// Companion <dir>/<name>.gp plotting each later column against the first.
std::string write_plot_script(const std::string& dir, const Table& t);

// Plain-text artifact (class-S verdicts, summary), same atomic discipline.
std::string write_text(const std::string& dir, const std::string& name,
                       const std::string& body);

struct CsvFile {
  std::vector<std::pair<std::string, std::string>> header;  // parsed "# k: v"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool has_column(const std::string& name) const;
  // column by name; throws std::runtime_error when absent
  std::size_t column_index(const std::string& name) const;
  // numeric view of one column; throws on unparsable cells
  std::vector<Scalar> numeric(const std::string& name) const;
  // first header value for a key, or "" when absent
  std::string note(const std::string& key) const;
};

// Throws std::runtime_error on unreadable or structurally malformed files
// (missing column row, ragged rows).
CsvFile read_csv(const std::string& path);

}  // namespace berglab::report
