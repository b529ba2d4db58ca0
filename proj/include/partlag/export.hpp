#pragma once

// Trajectory CSV and gnuplot scripts.
//
// CSV: header `t,<coordinate names>,<ledger names>`, one row per accepted
// step, every number with 17 significant digits, LF line endings, then one
// `# event: <name> t=<value>` line per recorded event.

#include "partlag/dynamics.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace partlag::io {

/// %.17g rendering; round-trips every double.
std::string format_number(double v);

void write_csv(std::ostream& out, const Trajectory& traj,
               const std::vector<std::string>& coordinate_names);

enum class PlotKind { Polar, Plane, TimeSeries };

/// Polar uses columns 2 (r) and 3 (phi), Plane columns 2 and 3 as (x, y),
/// TimeSeries every column against t.
void write_plot_script(std::ostream& out, const std::string& csv_path,
                       const std::vector<std::string>& columns, PlotKind kind,
                       const std::string& title);

}  // namespace partlag::io
