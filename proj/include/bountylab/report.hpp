#pragma once

#include <iosfwd>
#include <string>

#include "bountylab/optimizer.hpp"

namespace bountylab {

/// Locale-independent "%.12g".
std::string format_number(double x);

/// Columns: spec,c_a,p_s,p_e,t_h,c_d,f. Rows ordered by spec, c_a, p_s.
void write_sweep_csv(std::ostream& out, const SweepTable& table);

/// Columns: epsilon,f.
void write_trace_csv(std::ostream& out, const EpsilonOptimum& optimum);

/// Heatmap of f over (c_a, p_s) for one spec: one annotated rect per cell.
void write_heatmap_svg(std::ostream& out, const SweepTable& table, const std::string& spec);

}  // namespace bountylab
