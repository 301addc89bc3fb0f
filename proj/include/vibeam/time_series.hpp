#pragma once

#include <map>
#include <string>
#include <vector>

#include "vibeam/types.hpp"

namespace vibeam {

/// Uniformly sampled multichannel record. Column 0 of `data` is never time;
/// time lives in `t`. Metadata keys are free-form doubles (dt, omega, level).
struct TimeSeries {
  Vec t;
  std::vector<std::string> names;
  Mat data;  // rows = samples, cols = channels
  std::map<std::string, double> meta;

  int n_samples() const { return static_cast<int>(t.size()); }
  int channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;
  Vec column(const std::string& name) const { return data.col(channel(name)); }
  double dt() const;
};

/// CSV with '#'-prefixed metadata header lines, then a column header line.
void write_time_series(const std::string& path, const TimeSeries& ts);
TimeSeries read_time_series(const std::string& path);

}  // namespace vibeam
