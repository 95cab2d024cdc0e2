#ifndef MCCM_SVG_HPP
#define MCCM_SVG_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace mccm {

// Minimal polyline plot writer; keeps report generation free of external
// plotting dependencies.
struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x, y;
};

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series);

}  // namespace mccm

#endif
