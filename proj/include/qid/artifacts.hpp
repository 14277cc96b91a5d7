#pragma once

// File artifacts: trajectory/sweep CSVs, structured summaries, and simple
// self-contained SVG line plots. All files are written atomically (temp file
// in the target directory, then rename).

#include <string>
#include <vector>

#include "qid/sim.hpp"

namespace qid::artifacts {

// Writes content to path via a temp file + rename; throws std::runtime_error
// on any I/O failure without leaving partial files behind.
void write_atomic(const std::string& path, const std::string& content);

// Fixed schema:
// t,y_true,y_meas,r11,r22,r33,r12,r13,r23,rh11,rh22,rh33,rh12,rh13,rh23,
// omega12_hat,omega23_hat,fidelity  (12 significant digits per field)
std::string trajectory_csv(const sim::Trajectory& traj);

std::string sweep_csv(const std::vector<sim::RunRecord>& runs);

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

std::string svg_line_plot(const std::string& title,
                          const std::vector<PlotSeries>& series,
                          const std::string& x_label = "t",
                          const std::string& y_label = "");

std::string format_g12(double v);

}  // namespace qid::artifacts
