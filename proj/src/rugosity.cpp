#include "reefmap/rugosity.hpp"

#include <algorithm>
#include <limits>

#include "reefmap/errors.hpp"
#include "reefmap/parallel.hpp"

namespace reefmap {

void RugosityConfig::validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw PreconditionError("rugosity cell_size must be > 0");
    if (!(min_coverage_fraction >= 0.0 && min_coverage_fraction <= 1.0)) {
        throw PreconditionError("min_coverage_fraction must be in [0, 1]");
    }
}

namespace {

// Fixed-capacity polygon for the clipping hot loop. A triangle clipped by
// four half-planes has at most 7 vertices.
struct ClipPoly {
    std::array<Vec3, 12> v;
    int n = 0;
    void push(const Vec3& p) { v[static_cast<std::size_t>(n++)] = p; }
};

enum class Axis { x, y };

// One Sutherland-Hodgman pass. `keep_above` selects coord >= bound (min
// edge); otherwise coord < bound (max edge, exclusive).
void clip_pass(const ClipPoly& in, ClipPoly& out, Axis axis, double bound, bool keep_above) {
    out.n = 0;
    if (in.n == 0) return;
    auto coord = [axis](const Vec3& p) { return axis == Axis::x ? p.x : p.y; };
    auto inside = [&](const Vec3& p) { return keep_above ? coord(p) >= bound : coord(p) < bound; };
    auto cross_at = [&](const Vec3& a, const Vec3& b) {
        const double t = (bound - coord(a)) / (coord(b) - coord(a));
        Vec3 p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
        if (axis == Axis::x) {
            p.x = bound;
        } else {
            p.y = bound;
        }
        return p;
    };
    Vec3 prev = in.v[static_cast<std::size_t>(in.n - 1)];
    bool prev_in = inside(prev);
    for (int k = 0; k < in.n; ++k) {
        const Vec3& cur = in.v[static_cast<std::size_t>(k)];
        const bool cur_in = inside(cur);
        if (cur_in) {
            if (!prev_in) out.push(cross_at(prev, cur));
            out.push(cur);
        } else if (prev_in) {
            out.push(cross_at(prev, cur));
        }
        prev = cur;
        prev_in = cur_in;
    }
}

void clip_into(const std::array<Vec3, 3>& tri, double x0, double x1, double y0, double y1, ClipPoly& result) {
    ClipPoly a, b;
    a.push(tri[0]);
    a.push(tri[1]);
    a.push(tri[2]);
    clip_pass(a, b, Axis::x, x0, true);
    clip_pass(b, a, Axis::x, x1, false);
    clip_pass(a, b, Axis::y, y0, true);
    clip_pass(b, result, Axis::y, y1, false);
}

double fan_area(const Vec3* p, int n) {
    if (n < 3) return 0.0;
    double total = 0.0;
    for (int k = 1; k + 1 < n; ++k) total += triangle_area_3d(p[0], p[k], p[k + 1]);
    return total;
}

double shoelace(const Vec3* p, int n) {
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec3& a = p[k];
        const Vec3& b = p[(k + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * std::abs(twice);
}

struct CellRange {
    long long i0, i1, j0, j1;  // inclusive; i0 > i1 means no overlap
};

}  // namespace

std::vector<Vec3> clip_triangle_to_rect(const std::array<Vec3, 3>& tri, const AABB2& rect) {
    ClipPoly out;
    clip_into(tri, rect.min.x, rect.max.x, rect.min.y, rect.max.y, out);
    return {out.v.begin(), out.v.begin() + out.n};
}

double polygon_area_3d(std::span<const Vec3> poly) {
    return fan_area(poly.data(), static_cast<int>(poly.size()));
}

double polygon_projected_area(std::span<const Vec3> poly) {
    return shoelace(poly.data(), static_cast<int>(poly.size()));
}

CellAreas accumulate_cell_areas(const TriangleMesh& mesh, const Grid2D& geometry, unsigned threads) {
    CellAreas acc{Grid2D(geometry.origin(), geometry.cell_size(), geometry.nx(), geometry.ny()),
                  std::vector<double>(geometry.size(), 0.0), std::vector<double>(geometry.size(), 0.0)};
    const Grid2D& g = acc.grid;
    const auto nfaces = mesh.face_count();
    if (nfaces == 0 || g.size() == 0) return acc;

    const auto nx = static_cast<long long>(g.nx());
    const auto ny = static_cast<long long>(g.ny());
    std::vector<CellRange> ranges(nfaces);
    parallel_for(nfaces, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t f = begin; f < end; ++f) {
            const auto t = mesh.triangle(f);
            const double xmin = std::min({t[0].x, t[1].x, t[2].x});
            const double xmax = std::max({t[0].x, t[1].x, t[2].x});
            const double ymin = std::min({t[0].y, t[1].y, t[2].y});
            const double ymax = std::max({t[0].y, t[1].y, t[2].y});
            CellRange r{interval_index(g.origin().x, g.cell_size(), xmin),
                        interval_index(g.origin().x, g.cell_size(), xmax),
                        interval_index(g.origin().y, g.cell_size(), ymin),
                        interval_index(g.origin().y, g.cell_size(), ymax)};
            r.i0 = std::max(r.i0, 0LL);
            r.j0 = std::max(r.j0, 0LL);
            r.i1 = std::min(r.i1, nx - 1);
            r.j1 = std::min(r.j1, ny - 1);
            ranges[f] = r;
        }
    });

    // Threads own disjoint bands of rows; inside a band every cell sees its
    // triangles in index order.
    parallel_for(g.ny(), threads, [&](std::size_t row_begin, std::size_t row_end) {
        const auto rb = static_cast<long long>(row_begin);
        const auto re = static_cast<long long>(row_end) - 1;
        ClipPoly poly;
        for (std::size_t f = 0; f < nfaces; ++f) {
            const CellRange& r = ranges[f];
            if (r.i0 > r.i1 || r.j1 < rb || r.j0 > re) continue;
            const auto tri = mesh.triangle(f);
            for (long long j = std::max(r.j0, rb); j <= std::min(r.j1, re); ++j) {
                const auto ju = static_cast<std::size_t>(j);
                for (long long i = r.i0; i <= r.i1; ++i) {
                    const auto iu = static_cast<std::size_t>(i);
                    clip_into(tri, g.x_edge(iu), g.x_edge(iu + 1), g.y_edge(ju), g.y_edge(ju + 1), poly);
                    if (poly.n < 3) continue;
                    const auto cell = g.flat(iu, ju);
                    acc.surface_area[cell] += fan_area(poly.v.data(), poly.n);
                    acc.projected_area[cell] += shoelace(poly.v.data(), poly.n);
                }
            }
        }
    });
    return acc;
}

Grid2D rugosity_geometry(const TriangleMesh& mesh, const RugosityConfig& cfg) {
    cfg.validate();
    if (cfg.region) return Grid2D::covering(*cfg.region, cfg.cell_size);
    const auto bounds = mesh_xy_bounds(mesh);
    if (!bounds) return Grid2D({0.0, 0.0}, cfg.cell_size, 1, 1);
    return Grid2D::covering(*bounds, cfg.cell_size);
}

Grid2D rugosity_grid(const TriangleMesh& mesh, const RugosityConfig& cfg) {
    const Grid2D geometry = rugosity_geometry(mesh, cfg);
    CellAreas acc = accumulate_cell_areas(mesh, geometry, cfg.threads);
    Grid2D out = std::move(acc.grid);
    const double cell_area = cfg.cell_size * cfg.cell_size;
    // Relative slack so a fully covered cell is not lost to summation error
    // when the threshold is exactly 1.
    const double needed = cfg.min_coverage_fraction * cell_area * (1.0 - 1e-12);
    for (std::size_t j = 0; j < out.ny(); ++j) {
        for (std::size_t i = 0; i < out.nx(); ++i) {
            const auto cell = out.flat(i, j);
            const double covered = acc.projected_area[cell];
            if (covered > 0.0 && covered >= needed) out.set(i, j, acc.surface_area[cell] / cell_area);
        }
    }
    return out;
}

std::optional<GridStats> rugosity_stats(const Grid2D& grid) {
    GridStats s;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            if (!grid.valid(i, j)) continue;
            const double v = grid.value(i, j);
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
            sum += v;
            ++s.count;
        }
    }
    if (s.count == 0) return std::nullopt;
    s.mean = sum / static_cast<double>(s.count);
    return s;
}

}  // namespace reefmap
