#include "reefmap/geom.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "reefmap/errors.hpp"

namespace reefmap {

Vec3 Vec3::checked(double x, double y, double z) {
    Vec3 v{x, y, z};
    if (!v.finite()) throw PreconditionError("non-finite coordinate");
    return v;
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double radians) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw PreconditionError("rotation axis must be non-zero");
    const double s = std::sin(radians / 2.0) / n;
    return {std::cos(radians / 2.0), axis.x * s, axis.y * s, axis.z * s};
}

Quaternion Quaternion::operator*(const Quaternion& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
}

std::array<double, 9> Quaternion::to_rotation_matrix() const {
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, xz = x * z, yz = y * z;
    const double wx = w * x, wy = w * y, wz = w * z;
    return {1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz),       2.0 * (xz + wy),
            2.0 * (xy + wz),       1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx),
            2.0 * (xz - wy),       2.0 * (yz + wx),       1.0 - 2.0 * (xx + yy)};
}

PoseSE3::PoseSE3(const Vec3& translation, const Quaternion& rotation) : translation_(translation) {
    if (!translation.finite()) throw PreconditionError("non-finite pose translation");
    const double n = rotation.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kRenormTolerance) {
        throw PoseError("quaternion norm " + std::to_string(n) + " is not within " +
                        std::to_string(kRenormTolerance) + " of 1");
    }
    rotation_ = {rotation.w / n, rotation.x / n, rotation.y / n, rotation.z / n};
}

Vec3 PoseSE3::apply(const Vec3& p) const {
    const auto r = rotation_.to_rotation_matrix();
    return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation_.x,
            r[3] * p.x + r[4] * p.y + r[5] * p.z + translation_.y,
            r[6] * p.x + r[7] * p.y + r[8] * p.z + translation_.z};
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
        if (!vertices_[v].finite()) {
            throw PreconditionError("vertex " + std::to_string(v) + " has a non-finite coordinate");
        }
    }
    const auto n = vertices_.size();
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        for (auto idx : faces_[f]) {
            if (idx >= n) {
                throw IndexError("face " + std::to_string(f) + " references vertex " +
                                 std::to_string(idx) + " but the mesh has " + std::to_string(n) +
                                 " vertices");
            }
        }
    }
}

AABB2 AABB2::checked(double xmin, double ymin, double xmax, double ymax) {
    for (double v : {xmin, ymin, xmax, ymax}) {
        if (!std::isfinite(v)) throw PreconditionError("non-finite region bound");
    }
    if (xmin > xmax || ymin > ymax) throw PreconditionError("region min exceeds max");
    return {{xmin, ymin}, {xmax, ymax}};
}

Grid2D::Grid2D(Point2 origin, double cell_size, std::size_t nx, std::size_t ny)
    : origin_(origin), cell_size_(cell_size), nx_(nx), ny_(ny), values_(nx * ny, 0.0), valid_(nx * ny, 0) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw PreconditionError("cell size must be > 0");
    if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) throw PreconditionError("non-finite grid origin");
}

Grid2D Grid2D::covering(const AABB2& region, double cell_size) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw PreconditionError("cell size must be > 0");
    auto cells = [cell_size](double extent) {
        const double c = std::ceil(extent / cell_size - 1e-9);
        return static_cast<std::size_t>(std::max(1.0, c));
    };
    return Grid2D(region.min, cell_size, cells(region.width()), cells(region.height()));
}

std::size_t Grid2D::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

double triangle_area_3d(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    return 0.5 * (v1 - v0).cross(v2 - v0).norm();
}

double mesh_surface_area(const TriangleMesh& mesh) {
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const auto t = mesh.triangle(f);
        total += triangle_area_3d(t[0], t[1], t[2]);
    }
    return total;
}

long long interval_index(double origin, double cell_size, double v) {
    auto k = static_cast<long long>(std::floor((v - origin) / cell_size));
    // Division rounding can land one cell off near an edge; settle against the
    // edge values exactly as Grid2D computes them.
    while (origin + static_cast<double>(k) * cell_size > v) --k;
    while (origin + static_cast<double>(k + 1) * cell_size <= v) ++k;
    return k;
}

std::optional<CellIndex> grid_index(const Grid2D& grid, double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
    const auto i = interval_index(grid.origin().x, grid.cell_size(), x);
    const auto j = interval_index(grid.origin().y, grid.cell_size(), y);
    if (i < 0 || j < 0) return std::nullopt;
    if (static_cast<std::size_t>(i) >= grid.nx() || static_cast<std::size_t>(j) >= grid.ny()) return std::nullopt;
    return CellIndex{static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
}

std::optional<AABB2> mesh_xy_bounds(const TriangleMesh& mesh) {
    if (mesh.vertices().empty()) return std::nullopt;
    constexpr double inf = std::numeric_limits<double>::infinity();
    AABB2 box{{inf, inf}, {-inf, -inf}};
    for (const auto& v : mesh.vertices()) {
        box.min.x = std::min(box.min.x, v.x);
        box.min.y = std::min(box.min.y, v.y);
        box.max.x = std::max(box.max.x, v.x);
        box.max.y = std::max(box.max.y, v.y);
    }
    return box;
}

}  // namespace reefmap
