#pragma once

// Grid CSV exchange format shared by the rugosity and hotspot stages:
//
//   # grid origin_x=<x0> origin_y=<y0> cell_size=<cs> nx=<nx> ny=<ny>
//   i,j,x_center,y_center,value,valid
//   0,0,0.25,0.25,1.0000000002,1
//   ...
//
// Rows are ordered j-major (all i for j = 0, then j = 1, ...). Invalid cells
// carry `nan` in the value column and 0 in the valid column. Numbers use the
// shortest round-trip representation, so write/read is lossless.

#include <string>
#include <string_view>

#include "reefmap/geom.hpp"

namespace reefmap {

std::string write_grid_csv(const Grid2D& grid);

// Accepts files with or without the leading `# grid` comment; without it the
// geometry is inferred from the cell centers (needs at least two cells).
Grid2D parse_grid_csv(std::string_view text, std::string_view source = "<grid>");

// Plain-text sidecar mapping raster pixels back to world coordinates.
// Pixel row 0 is the northernmost grid row (j = ny - 1).
std::string write_world_file(const Grid2D& grid, int upscale);

}  // namespace reefmap
