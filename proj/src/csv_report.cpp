#include "berglab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace berglab::report {

namespace fs = std::filesystem;

std::string format_cell(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

// temp file + rename: a crash mid-write leaves only the .tmp behind, never a
// truncated table under the real name
void atomic_write(const fs::path& target, const std::string& content) {
  fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string header_block(const Table& t, const RunMeta& meta) {
  std::ostringstream h;
  h << "# table: " << t.name << "\n";
  h << "# operation: " << t.module_op << "\n";
  h << "# tool: " << meta.tool_version << "\n";
  h << "# config: " << meta.config_hash << "\n";
  h << "# seed: " << meta.seed << "\n";
  h << "# wall_seconds: " << format_cell(meta.wall_seconds) << "\n";
  for (const auto& [k, v] : t.notes) h << "# " << k << ": " << v << "\n";
  return h.str();
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

}  // namespace

std::string write_csv(const std::string& dir, const Table& t, const RunMeta& meta) {
  if (t.columns.empty()) throw std::invalid_argument("table has no columns");
  for (const auto& row : t.rows)
    if (row.size() != t.columns.size())
      throw std::invalid_argument("ragged row in table " + t.name);
  std::ostringstream body;
  body << header_block(t, meta);
  body << join(t.columns) << "\n";
  for (const auto& row : t.rows) body << join(row) << "\n";
  fs::path target = fs::path(dir) / (t.name + ".csv");
  atomic_write(target, body.str());
  return target.string();
}

std::string write_plot_script(const std::string& dir, const Table& t) {
  if (t.columns.size() < 2)
    throw std::invalid_argument("plot script needs at least two columns");
  std::ostringstream gp;
  gp << "set datafile separator ','\n";
  gp << "set datafile commentschars '#'\n";
  gp << "set key autotitle columnhead outside\n";
  gp << "set xlabel '" << t.columns[0] << "'\n";
  gp << "set title '" << t.name << "'\n";
  gp << "set terminal pngcairo size 900,600\n";
  gp << "set output '" << t.name << ".png'\n";
  gp << "plot";
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    if (c > 1) gp << ",";
    gp << " '" << t.name << ".csv' using 1:" << c + 1 << " with linespoints";
  }
  gp << "\n";
  fs::path target = fs::path(dir) / (t.name + ".gp");
  atomic_write(target, gp.str());
  return target.string();
}

std::string write_text(const std::string& dir, const std::string& name,
                       const std::string& body) {
  fs::path target = fs::path(dir) / name;
  atomic_write(target, body);
  return target.string();
}

bool CsvFile::has_column(const std::string& name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

std::size_t CsvFile::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw std::runtime_error("no column '" + name + "' in table");
}

std::vector<Scalar> CsvFile::numeric(const std::string& name) const {
  std::size_t idx = column_index(name);
  std::vector<Scalar> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    std::size_t pos = 0;
    Scalar v = 0;
    try {
      v = std::stod(row[idx], &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != row[idx].size())
      throw std::runtime_error("non-numeric cell '" + row[idx] + "' in column " + name);
    out.push_back(v);
  }
  return out;
}

std::string CsvFile::note(const std::string& key) const {
  for (const auto& [k, v] : header)
    if (k == key) return v;
  return {};
}

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvFile file;
  std::string line;
  bool have_columns = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    cells.push_back(cur);
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string rest = line.substr(1);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      auto colon = rest.find(": ");
      if (colon != std::string::npos)
        file.header.emplace_back(rest.substr(0, colon), rest.substr(colon + 2));
      continue;
    }
    if (!have_columns) {
      file.columns = split(line);
      have_columns = true;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != file.columns.size())
      throw std::runtime_error("ragged row in " + path);
    file.rows.push_back(std::move(cells));
  }
  if (!have_columns) throw std::runtime_error("no column row in " + path);
  return file;
}

}  // namespace berglab::report
