#include "partlag/export.hpp"

#include <cstdio>

namespace partlag::io {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const Trajectory& traj,
               const std::vector<std::string>& coordinate_names) {
  if (coordinate_names.size() != traj.dim()) {
    throw std::invalid_argument("coordinate names do not match trajectory dimension");
  }
  out << "t";
  for (const auto& n : coordinate_names) out << ',' << n;
  for (const auto& n : traj.ledger_names()) out << ',' << n;
  out << '\n';
  const auto& ledger = traj.ledger();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_number(traj.times()[i]);
    for (double v : traj.states()[i]) out << ',' << format_number(v);
    for (const auto& col : ledger) out << ',' << format_number(col[i]);
    out << '\n';
  }
  for (const auto& e : traj.events()) {
    out << "# event: " << e.name << " t=" << format_number(e.t) << '\n';
  }
}

void write_plot_script(std::ostream& out, const std::string& csv_path,
                       const std::vector<std::string>& columns, PlotKind kind,
                       const std::string& title) {
  out << "# gnuplot script\n"
      << "set datafile separator ','\n"
      << "set datafile commentschars '#'\n"
      << "set key autotitle columnhead\n"
      << "set title '" << title << "'\n"
      << "data = '" << csv_path << "'\n";
  switch (kind) {
    case PlotKind::Polar:
      out << "set polar\nset size square\nset grid polar\nunset key\n"
          << "plot data using 3:2 with lines lw 1.5\n";
      break;
    case PlotKind::Plane:
      out << "set size square\nset xlabel '" << columns.at(1) << "'\nset ylabel '" << columns.at(2)
          << "'\nunset key\nplot data using 2:3 with lines lw 1.5\n";
      break;
    case PlotKind::TimeSeries:
      out << "set xlabel 't'\nplot ";
      for (std::size_t c = 1; c < columns.size(); ++c) {
        out << (c > 1 ? ", \\\n     " : "") << "data using 1:" << c + 1 << " with lines";
      }
      out << '\n';
      break;
  }
  out << "pause mouse close\n";
}

}  // namespace partlag::io
