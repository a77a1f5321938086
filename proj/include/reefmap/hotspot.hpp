#pragma once

// Fish-abundance hotspot maps: per-frame counts are pinned to the camera's XY
// position, reduced per grid cell, log-scaled, rendered and searched for
// peaks. Also hosts the grid-vs-grid correlation used to relate abundance to
// rugosity.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reefmap/geom.hpp"
#include "reefmap/ingest.hpp"

namespace reefmap {

struct CountSample {
    std::uint64_t frame_id = 0;
    double x = 0.0;
    double y = 0.0;
    std::size_t count = 0;
    friend bool operator==(const CountSample&, const CountSample&) = default;
};

enum class Reducer { max, mean, sum };

// "max" | "mean" | "sum"; throws PreconditionError otherwise.
Reducer parse_reducer(std::string_view name);
std::string_view reducer_name(Reducer r);

struct HotspotConfig {
    double cell_size = 0.5;
    Reducer reducer = Reducer::max;
    std::size_t peak_count = 5;
    double peak_min_separation = 2.0;

    void validate() const;
};

struct Localization {
    std::vector<CountSample> samples;
    // Trajectory frames with no detection entry at all (not observed).
    std::vector<std::uint64_t> skipped_frames;
};

// One sample per trajectory frame that has a detection entry. Throws
// MappingError if any detection frame is absent from the trajectory.
Localization localize_counts(std::span<const FramePose> trajectory, const DetectionSet& detections,
                             double conf_threshold);

struct AbundanceGrid {
    Grid2D grid;
    std::size_t outside = 0;  // samples that fell outside the region
};

AbundanceGrid abundance_grid(std::span<const CountSample> samples, const HotspotConfig& cfg, const AABB2& region);

// Cell-aligned box (multiples of cell_size from the world origin) whose
// half-open grid holds every sample. nullopt for no samples.
std::optional<AABB2> sample_region(std::span<const CountSample> samples, double cell_size);

// ln(1 + v) on valid cells. Throws DomainError on a negative valid value.
Grid2D log_transform(const Grid2D& grid);

struct ColorRamp {
    std::array<std::array<std::uint8_t, 3>, 5> anchors;
};

// "reef" (dark blue -> green -> yellow, the default), "viridis", "gray".
ColorRamp named_ramp(std::string_view name);

inline constexpr std::array<std::uint8_t, 3> kNoDataColor{128, 128, 128};

// Binary PPM (P6), one pixel per cell scaled by `upscale`, north up.
std::string render_raster(const Grid2D& grid, const ColorRamp& ramp = named_ramp("reef"), int upscale = 1);

struct Pixmap {
    std::size_t width = 0;
    std::size_t height = 0;
    int max_value = 0;
    std::vector<std::uint8_t> rgb;
};

Pixmap parse_ppm(std::string_view bytes);

struct Correlation {
    std::size_t n = 0;
    std::optional<double> pearson;   // nullopt when n < 3 or a side is constant
    std::optional<double> spearman;
};

// Over cells valid in both grids. Throws ShapeError on geometry mismatch.
Correlation correlate_grids(const Grid2D& a, const Grid2D& b);

// Pearson on raw values and on average-tie ranks.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);
std::vector<double> average_ranks(std::span<const double> v);

struct Peak {
    std::size_t i = 0;
    std::size_t j = 0;
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
};

// Greedy suppression: descending value, ties by (i, j); skips cells closer
// than peak_min_separation to an accepted peak.
std::vector<Peak> hotspot_peaks(const Grid2D& grid, const HotspotConfig& cfg);

// `rank,x,y,value`, rank from 1.
std::string format_peaks_csv(std::span<const Peak> peaks);

}  // namespace reefmap
