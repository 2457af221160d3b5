#include "bountylab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "bountylab/errors.hpp"

namespace bountylab {

namespace {

constexpr int kCell = 56;
constexpr int kLeft = 70;
constexpr int kTop = 50;

// f = 0 -> rgb(255,255,255), f >= 1 -> rgb(178,24,43); linear in between.
std::string heat_color(double f) {
  const double x = std::clamp(f, 0.0, 1.0);
  auto lerp = [x](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * x)); };
  char buf[32];
  std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", lerp(255, 178), lerp(255, 24), lerp(255, 43));
  return buf;
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  const auto& g = table.grid();
  out << "spec,c_a,p_s,p_e,t_h,c_d,f\n";
  for (std::size_t s = 0; s < g.specs.size(); ++s) {
    for (std::size_t i = 0; i < g.ca_values.size(); ++i) {
      for (std::size_t j = 0; j < g.ps_values.size(); ++j) {
        const auto& r = table.cell(s, i, j);
        out << g.specs[s] << ',' << format_number(g.ca_values[i]) << ','
            << format_number(g.ps_values[j]) << ',' << format_number(r.p_sell) << ','
            << format_number(r.mean_hold_time) << ',' << format_number(r.defender_cost) << ','
            << format_number(r.f_score) << '\n';
      }
    }
  }
}

void write_trace_csv(std::ostream& out, const EpsilonOptimum& optimum) {
  out << "epsilon,f\n";
  for (const auto& p : optimum.trace) {
    out << format_number(p.epsilon) << ',' << format_number(p.report.f_score) << '\n';
  }
}

void write_heatmap_svg(std::ostream& out, const SweepTable& table, const std::string& spec) {
  const auto& g = table.grid();
  const auto it = std::find(g.specs.begin(), g.specs.end(), spec);
  if (it == g.specs.end()) throw DomainError("spec not in sweep: " + spec);
  const auto s = static_cast<std::size_t>(it - g.specs.begin());
  const auto cols = static_cast<int>(g.ps_values.size());
  const auto rows = static_cast<int>(g.ca_values.size());
  const int width = kLeft + cols * kCell + 20;
  const int height = kTop + rows * kCell + 50;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<!-- f-score heatmap for spec '" << spec << "', epsilon*="
      << format_number(table.epsilon_star()) << ".\n"
      << "     Columns: p_s ascending left to right. Rows: c_a ascending top to bottom.\n"
      << "     Color scale: linear from rgb(255,255,255) at f=0 to rgb(178,24,43) at f>=1.\n"
      << "     Each cell is annotated with f to three decimals. -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">f score: " << spec << "</text>\n";
  for (int j = 0; j < cols; ++j) {
    out << "<text x=\"" << kLeft + j * kCell + kCell / 2 << "\" y=\"" << kTop - 8
        << "\" text-anchor=\"middle\">" << format_number(g.ps_values[static_cast<std::size_t>(j)])
        << "</text>\n";
  }
  for (int i = 0; i < rows; ++i) {
    const int y = kTop + i * kCell;
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + kCell / 2 + 4
        << "\" text-anchor=\"end\">" << format_number(g.ca_values[static_cast<std::size_t>(i)])
        << "</text>\n";
    for (int j = 0; j < cols; ++j) {
      const double f = table.cell(s, static_cast<std::size_t>(i), static_cast<std::size_t>(j)).f_score;
      const int x = kLeft + j * kCell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
          << "\" fill=\"" << heat_color(f) << "\" stroke=\"#888\"/>";
      out << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
          << "\" text-anchor=\"middle\">" << fixed(f, 3) << "</text>\n";
    }
  }
  out << "<text x=\"" << kLeft + cols * kCell / 2 << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">p_s (columns) / c_a (rows)</text>\n";
  out << "</svg>\n";
}

}  // namespace bountylab
