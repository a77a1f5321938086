#pragma once

// Per-cell rugosity: true 3D surface area of the mesh inside each XY grid
// cell, divided by the planar cell area. Triangles are clipped exactly
// against cell prisms so areas are conserved across the grid.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "reefmap/geom.hpp"

namespace reefmap {

struct RugosityConfig {
    double cell_size = 0.5;
    std::optional<AABB2> region;          // default: mesh XY bounding box
    double min_coverage_fraction = 0.5;   // below this the cell is no-data
    unsigned threads = 1;                 // 0 = hardware concurrency

    void validate() const;
};

// Clips a triangle to the prism above/below `rect` (x in [min.x, max.x),
// y in [min.y, max.y)). The result is the planar 3D polygon of the triangle
// inside that prism; empty when they do not overlap. At most 7 vertices.
std::vector<Vec3> clip_triangle_to_rect(const std::array<Vec3, 3>& tri, const AABB2& rect);

// Fan-triangulated 3D area; 0 for fewer than 3 vertices.
double polygon_area_3d(std::span<const Vec3> poly);

// Absolute shoelace area of the XY projection.
double polygon_projected_area(std::span<const Vec3> poly);

// Raw per-cell accumulations on a given grid geometry, before the
// coverage rule is applied. Index with Grid2D::flat.
struct CellAreas {
    Grid2D grid;                        // geometry only; values unset
    std::vector<double> surface_area;   // clipped 3D area
    std::vector<double> projected_area; // clipped XY area
};

// Accumulates in a fixed triangle order, so the result is bit-identical for
// any thread count.
CellAreas accumulate_cell_areas(const TriangleMesh& mesh, const Grid2D& geometry, unsigned threads = 1);

// Grid geometry rugosity_grid would use for this mesh/config.
Grid2D rugosity_geometry(const TriangleMesh& mesh, const RugosityConfig& cfg);

Grid2D rugosity_grid(const TriangleMesh& mesh, const RugosityConfig& cfg = {});

struct GridStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

// Statistics over valid cells; nullopt when there are none.
std::optional<GridStats> rugosity_stats(const Grid2D& grid);

}  // namespace reefmap
