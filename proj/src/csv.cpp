#include "gm3/csv.hpp"

#include <cstdio>
#include <istream>
#include <sstream>

#include "gm3/errors.hpp"
#include "gm3/sim.hpp"

namespace gm3 {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::vector<double> CsvTable::column(const std::string& name) const {
  std::size_t idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) idx = i;
  }
  if (idx == header.size()) throw Error(ErrorKind::Io, "missing CSV column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (idx >= r.size()) throw Error(ErrorKind::Io, "short CSV row");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(r[idx], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) throw Error(ErrorKind::Io, "non-numeric cell '" + r[idx] + "' in " + name);
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& header) : out_(path), path_(path) {
  if (!out_) throw Error(ErrorKind::Io, "cannot write " + path);
  out_ << header << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw Error(ErrorKind::Io, "write failed for " + path_);
}

void write_snapshot(CsvWriter& out, double t, const Grid1D& grid, const FieldTriple& state) {
  const std::string ts = format_number(t);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    out.row({ts, format_number(grid[i]), format_number(state.u(i)), format_number(state.v(i)),
             format_number(state.w(i))});
  }
}

void write_track_sample(CsvWriter& out, const TrackSample& sample) {
  const std::string ts = format_number(sample.t);
  const std::string count = std::to_string(sample.count());
  for (const auto& s : sample.spikes) {
    out.row({ts, std::to_string(s.id), format_number(s.position), format_number(s.amplitude), count});
  }
  if (sample.spikes.empty()) out.row({ts, "-1", "nan", "nan", "0"});
}

void write_event(CsvWriter& out, const Event& event) {
  out.row({format_number(event.t), to_string(event.type), event.detail});
}

}  // namespace gm3
