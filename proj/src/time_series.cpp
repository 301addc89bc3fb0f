#include "vibeam/time_series.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "vibeam/util.hpp"

namespace vibeam {

int TimeSeries::channel(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError("unknown channel: " + name);
  return static_cast<int>(it - names.begin());
}

bool TimeSeries::has_channel(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double TimeSeries::dt() const {
  if (t.size() < 2) throw ValidationError("time series too short for a sample step");
  return t[1] - t[0];
}

void write_time_series(const std::string& path, const TimeSeries& ts) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "# vibeam-series 1\n";
  for (const auto& [key, value] : ts.meta)
    out << "# " << key << " = " << format_double(value) << "\n";
  out << "t";
  for (const auto& name : ts.names) out << "," << name;
  out << "\n";
  for (int i = 0; i < ts.n_samples(); ++i) {
    out << format_double(ts.t[i]);
    for (int j = 0; j < ts.data.cols(); ++j) out << "," << format_double(ts.data(i, j));
    out << "\n";
  }
  if (!out) throw ValidationError("write failed: " + path);
}

TimeSeries read_time_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  TimeSeries ts;
  std::string line;
  bool header_done = false;
  std::vector<double> tvals;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = trim(line.substr(1, eq - 1));
        ts.meta[key] = std::stod(trim(line.substr(eq + 1)));
      }
      continue;
    }
    if (!header_done) {
      auto cols = split(line, ',');
      if (cols.empty() || cols[0] != "t") throw ValidationError("bad series header in " + path);
      ts.names.assign(cols.begin() + 1, cols.end());
      header_done = true;
      continue;
    }
    auto cells = split(line, ',');
    if (cells.size() != ts.names.size() + 1) throw ValidationError("ragged series row in " + path);
    tvals.push_back(std::stod(cells[0]));
    std::vector<double> row(cells.size() - 1);
    for (std::size_t i = 1; i < cells.size(); ++i) row[i - 1] = std::stod(cells[i]);
    rows.push_back(std::move(row));
  }
  if (!header_done) throw ValidationError("missing series header in " + path);
  ts.t = Eigen::Map<Vec>(tvals.data(), tvals.size());
  ts.data.resize(rows.size(), ts.names.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) ts.data(i, j) = rows[i][j];
  return ts;
}

}  // namespace vibeam
