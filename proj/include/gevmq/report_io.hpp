#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gevmq/mc_harness.hpp"

namespace gevmq {

// %.17g, with NaN and inf spelled NaN, inf, -inf.
std::string fmt17(double v);

// Header: estimator,xi,n,reps,bias,stderr,failure_rate,wall_ms.
// wall_ms is written as 0 unless with_time is set.
void write_reports_csv(std::ostream& os, const std::vector<McReport>& reports, bool with_time);
void write_reports_json(std::ostream& os, const std::vector<McReport>& reports, bool with_time);

// Single numeric column, optional header line "value". Blank lines are
// skipped. Throws InputError naming the line for anything else.
std::vector<double> read_sample_column(std::istream& is);
void write_sample_column(std::ostream& os, std::span<const double> values);

}  // namespace gevmq
