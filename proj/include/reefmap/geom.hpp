#pragma once

// Geometric primitives shared by every stage of the pipeline.
//
// World frame convention: right-handed, Z up. Rugosity and abundance grids
// live in the XY plane. Meshes exported with Z down must be flipped before
// ingest.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace reefmap {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    // Throws PreconditionError on NaN/Inf.
    static Vec3 checked(double x, double y, double z);

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Scalar-first unit quaternion (w, x, y, z).
struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static Quaternion identity() { return {}; }
    static Quaternion from_axis_angle(const Vec3& axis, double radians);

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    Quaternion operator*(const Quaternion& o) const;
    std::array<double, 9> to_rotation_matrix() const;  // row-major
    friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

// Rigid transform, camera-to-world when used for frame poses.
class PoseSE3 {
public:
    // Quaternion norms within 1e-3 of one are renormalized; anything further
    // off throws PoseError.
    static constexpr double kRenormTolerance = 1e-3;

    PoseSE3() = default;
    PoseSE3(const Vec3& translation, const Quaternion& rotation);

    static PoseSE3 identity() { return {}; }

    const Vec3& translation() const { return translation_; }
    const Quaternion& rotation() const { return rotation_; }

    Vec3 apply(const Vec3& p) const;

private:
    Vec3 translation_{};
    Quaternion rotation_{};
};

inline Vec3 pose_apply(const PoseSE3& pose, const Vec3& p) { return pose.apply(p); }

using Face = std::array<std::uint32_t, 3>;

// Indexed triangle surface. Degenerate faces are allowed and contribute zero
// area.
class TriangleMesh {
public:
    TriangleMesh() = default;
    // Validates indices (IndexError) and vertex finiteness (PreconditionError).
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Face>& faces() const { return faces_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t face_count() const { return faces_.size(); }
    bool empty() const { return faces_.empty(); }

    std::array<Vec3, 3> triangle(std::size_t f) const {
        const Face& fc = faces_[f];
        return {vertices_[fc[0]], vertices_[fc[1]], vertices_[fc[2]]};
    }

    friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;

private:
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct AABB2 {
    Point2 min;
    Point2 max;

    // Throws PreconditionError unless min <= max componentwise and finite.
    static AABB2 checked(double xmin, double ymin, double xmax, double ymax);

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    bool contains(double x, double y) const {
        return x >= min.x && x <= max.x && y >= min.y && y <= max.y;
    }
    friend bool operator==(const AABB2&, const AABB2&) = default;
};

struct CellIndex {
    std::size_t i = 0;
    std::size_t j = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

// Axis-aligned XY raster. Cell (i, j) spans
//   [x0 + i*cs, x0 + (i+1)*cs) x [y0 + j*cs, y0 + (j+1)*cs).
// Storage is row-major with j as the row: index = j * nx + i.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(Point2 origin, double cell_size, std::size_t nx, std::size_t ny);

    // Smallest grid anchored at region.min that covers the region. Extents
    // that are an exact multiple of the cell size (within 1e-9 cells) are
    // not padded.
    static Grid2D covering(const AABB2& region, double cell_size);

    const Point2& origin() const { return origin_; }
    double cell_size() const { return cell_size_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nx_ * ny_; }

    std::size_t flat(std::size_t i, std::size_t j) const { return j * nx_ + i; }

    double value(std::size_t i, std::size_t j) const { return values_[flat(i, j)]; }
    bool valid(std::size_t i, std::size_t j) const { return valid_[flat(i, j)] != 0; }
    void set(std::size_t i, std::size_t j, double v) {
        values_[flat(i, j)] = v;
        valid_[flat(i, j)] = 1;
    }
    void invalidate(std::size_t i, std::size_t j) {
        values_[flat(i, j)] = 0.0;
        valid_[flat(i, j)] = 0;
    }

    std::span<const double> values() const { return values_; }
    std::span<const std::uint8_t> valid_mask() const { return valid_; }
    std::size_t valid_count() const;

    // Cell edge coordinates; neighbours compute their shared edge identically.
    double x_edge(std::size_t i) const { return origin_.x + static_cast<double>(i) * cell_size_; }
    double y_edge(std::size_t j) const { return origin_.y + static_cast<double>(j) * cell_size_; }
    Point2 center(std::size_t i, std::size_t j) const {
        return {origin_.x + (static_cast<double>(i) + 0.5) * cell_size_,
                origin_.y + (static_cast<double>(j) + 0.5) * cell_size_};
    }

    bool same_geometry(const Grid2D& o) const {
        return origin_ == o.origin_ && cell_size_ == o.cell_size_ && nx_ == o.nx_ && ny_ == o.ny_;
    }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    Point2 origin_{};
    double cell_size_ = 1.0;
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> valid_;
};

double triangle_area_3d(const Vec3& v0, const Vec3& v1, const Vec3& v2);

double mesh_surface_area(const TriangleMesh& mesh);

// Containing cell under the half-open convention, or nullopt when outside.
std::optional<CellIndex> grid_index(const Grid2D& grid, double x, double y);

// Index of the half-open interval [origin + k*cs, origin + (k+1)*cs) holding
// v, without bounds clamping. Shared by grid_index and the rugosity binner.
long long interval_index(double origin, double cell_size, double v);

// XY bounding box of all vertices; nullopt for a mesh without vertices.
std::optional<AABB2> mesh_xy_bounds(const TriangleMesh& mesh);

}  // namespace reefmap
