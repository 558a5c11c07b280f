#include "metricforge/trace.hpp"

#include <cstdio>

namespace metricforge {

double TrainTrace::gap_ratio(std::size_t row) const {
  if (rows.empty() || row >= rows.size() || !(rows.front().gap > 0.0)) return 0.0;
  return rows[row].gap / rows.front().gap;
}

std::string format_trace_csv(const TrainTrace& trace) {
  std::string out = "iter,primal,dual,gap,seconds\n";
  char buf[160];
  for (const auto& r : trace.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.6f\n", r.iteration, r.primal, r.dual, r.gap,
                  r.seconds);
    out += buf;
  }
  return out;
}

}  // namespace metricforge
