#pragma once

#include <functional>
#include <string>
#include <vector>

namespace metricforge {

struct TraceRow {
  int iteration = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double seconds = 0.0;  // cumulative wall time since training started
};

struct TrainTrace {
  std::vector<TraceRow> rows;

  // gap(t) / gap(1); 0 when gap(1) is not positive
  double gap_ratio(std::size_t row) const;
};

// Receives each row as soon as the iteration finishes.
using ProgressSink = std::function<void(const TraceRow&)>;

// Columns: iter,primal,dual,gap,seconds
std::string format_trace_csv(const TrainTrace& trace);

}  // namespace metricforge
