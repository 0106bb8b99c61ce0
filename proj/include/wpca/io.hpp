#pragma once

#include "wpca/measures.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wpca {

// Rasters are h x w matrices indexed (row, col). Pixel (row, col) has its
// center at x = col + 1/2, y = row + 1/2, so y grows downward.

/// Normalized intensities as a measure on pixel centers; zero pixels dropped.
DiscreteMeasure image_to_measure(const Eigen::MatrixXd& pixels);

/// Bilinear splat of every atom onto the four surrounding pixel centers.
/// Mass falling outside the raster is moved to the nearest edge pixels, so
/// the raster total equals the measure's total mass.
Eigen::MatrixXd measure_to_raster(const DiscreteMeasure& m, Index height, Index width);

/// Plain (P2) PGM scaled so the largest value maps to 255, rounded half-up.
std::string pgm_string(const Eigen::MatrixXd& raster);
void write_pgm(const std::string& path, const Eigen::MatrixXd& raster);
/// Reads P2 or P5 PGM files; values are returned unscaled.
Eigen::MatrixXd read_pgm(const std::string& path);

struct RgbImage {
  Index height = 0;
  Index width = 0;
  std::vector<std::uint8_t> data;  // row-major, 3 bytes per pixel

  std::array<std::uint8_t, 3> at(Index row, Index col) const;
};

/// Reads P3 or P6 PPM files.
RgbImage read_ppm(const std::string& path);
void write_ppm(const std::string& path, const RgbImage& image);
/// Pixel colors as points of [0,1]^3 (3 x h*w).
Eigen::MatrixXd rgb_points(const RgbImage& image);

/// k-means quantization of RGB points (3 x n, entries in [0,1]) into at most
/// k atoms weighted by cluster size.
DiscreteMeasure quantize_colors(const Eigen::MatrixXd& pixels, Index k, std::uint64_t seed);

struct ScatterLayer {
  DiscreteMeasure measure;
  std::string label;
};

struct ScatterOptions {
  std::array<Index, 2> axes{0, 1};  // coordinates shown for 3-D measures
  bool y_down = false;              // image convention: y grows downward
  std::string title;
};

/// Scatter plot in a 1000 x 1000 viewBox; marker area proportional to atom
/// weight, one style class and legend entry per layer.
std::string render_scatter_svg(const std::vector<ScatterLayer>& layers,
                               const ScatterOptions& opts = {});

/// Strip of color bands ordered by luminance, band widths proportional to
/// atom weights.
RgbImage render_palette_strip(const DiscreteMeasure& m, Index width, Index height = 40);

/// Measure CSV: header `w,x1,...,xd`, one row per atom. Weights are
/// renormalized with a warning when they do not sum to one.
DiscreteMeasure read_measure_csv(const std::string& path);
void write_measure_csv(const std::string& path, const DiscreteMeasure& m);
/// JSON counterpart: {"weights": [...], "locations": [[...], ...]}.
DiscreteMeasure read_measure_json(const std::string& path);
void write_measure_json(const std::string& path, const DiscreteMeasure& m);
/// Dispatches on the file extension (.json or anything else as CSV).
DiscreteMeasure read_measure(const std::string& path);

/// Velocity CSV: header `v1,...,vd`, one row per base atom.
void write_field_csv(const std::string& path, const VelocityField& v);
VelocityField read_field_csv(const std::string& path);

}  // namespace wpca
