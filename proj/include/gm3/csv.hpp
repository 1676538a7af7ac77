#pragma once

#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "gm3/model.hpp"

namespace gm3 {

struct TrackSample;
struct Event;

/// %.12g, the format used for every numeric CSV cell.
std::string format_number(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Numeric column by name; throws Io when the column is missing or a cell
  /// does not parse.
  std::vector<double> column(const std::string& name) const;
};

/// Comma-separated, no quoting; the first line is the header.
CsvTable read_csv(std::istream& in);

/// Line-oriented CSV file that writes its header on open.
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::string& header);
  void row(const std::vector<std::string>& cells);
  std::ostream& stream() { return out_; }

private:
  std::ofstream out_;
  std::string path_;
};

inline constexpr const char* kSnapshotHeader = "t,x,u,v,w";
inline constexpr const char* kTrackHeader = "t,spike_id,position,amplitude,count";
inline constexpr const char* kEventHeader = "t,type,detail";
inline constexpr const char* kBranchHeader = "arclength,Dv,mu,v0,fold";
inline constexpr const char* kSummaryHeader = "quantity,value,tolerance,source";

void write_snapshot(CsvWriter& out, double t, const Grid1D& grid, const FieldTriple& state);
void write_track_sample(CsvWriter& out, const TrackSample& sample);
void write_event(CsvWriter& out, const Event& event);

}  // namespace gm3
