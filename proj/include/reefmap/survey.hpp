#pragma once

// Lawnmower survey planning from camera geometry, plus a synthetic reef and
// survey simulator that produces field-like data with planted ground truth.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reefmap/geom.hpp"
#include "reefmap/hotspot.hpp"
#include "reefmap/ingest.hpp"

namespace reefmap {

struct CameraGeometry {
    double altitude = 2.0;  // m above the seafloor
    double hfov = 120.0;    // deg, the wide axis (laid across-track)
    double vfov = 58.0;     // deg
    double fps = 6.0;
    int image_width = 3840;
    int image_height = 2160;

    void validate() const;
};

struct Footprint {
    double width = 0.0;   // across-track, from hfov
    double length = 0.0;  // along-track, from vfov
};

// Nadir footprint over a flat seafloor.
Footprint footprint_dims(const CameraGeometry& cam);

enum class TravelAxis { x, y };

TravelAxis parse_travel_axis(std::string_view name);

struct SurveyPlan {
    AABB2 region;
    TravelAxis axis = TravelAxis::y;
    std::vector<Vec3> waypoints;  // z = -altitude relative to the seafloor reference
    std::vector<double> track_offsets;  // across-track coordinate of each transect
    double track_spacing = 0.0;
    double speed = 0.3;  // m/s
    double altitude = 2.0;

    std::size_t track_count() const { return track_offsets.size(); }
    double path_length() const;
};

// Transects run the full region length along `axis`, alternating direction.
// Tracks are `spacing = footprint.width * (1 - overlap)` apart, with
// count = ceil(across_extent / spacing), centered across the region (an
// inset of spacing/2 when the extent is an exact multiple). A footprint wider
// than the region yields a single center track.
SurveyPlan plan_lawnmower(const AABB2& region, const CameraGeometry& cam, double overlap,
                          TravelAxis axis = TravelAxis::y, double speed = 0.3);

// Camera XY(Z) positions every speed/fps metres along the waypoint path.
std::vector<Vec3> frame_positions(const SurveyPlan& plan, double fps);

// Nadir camera orientation with the image x axis (wide FOV) across-track.
Quaternion nadir_orientation(TravelAxis axis);

std::string format_plan_csv(const SurveyPlan& plan);

struct GaussianBump {
    Point2 center;
    double sigma = 1.0;
    double height = 0.0;
};

// Flat-topped column whose wall is a logistic step of width `edge_width`.
struct Pillar {
    Point2 center;
    double radius = 0.5;
    double height = 1.0;
    double edge_width = 0.05;
};

struct FishHotspot {
    Point2 center;
    double sigma = 1.0;
    double peak = 0.0;  // fish/m^2 at the center, on top of the base density
};

struct NoiseModel {
    double false_positive_rate = 0.0;  // expected spurious boxes per frame
    double miss_probability = 0.0;     // per true fish
};

struct ReefScenario {
    std::uint64_t seed = 0;
    AABB2 region{{0.0, 0.0}, {12.0, 12.0}};

    // Heightfield z = -base_depth + bumps + pillar.
    double base_depth = 10.0;
    std::vector<GaussianBump> bumps;
    std::optional<Pillar> pillar;
    double vertex_spacing = 0.1;

    // Fish density = base + hotspots + rugosity_gain * (local rugosity - 1),
    // where local rugosity is the analytic area element sqrt(1 + |grad z|^2).
    double base_density = 0.0;
    std::vector<FishHotspot> hotspots;
    double rugosity_gain = 0.0;

    NoiseModel noise;

    // Survey setup used by run_end_to_end and the simulate command.
    CameraGeometry camera;
    double overlap = 0.2;
    TravelAxis travel_axis = TravelAxis::y;
    double speed = 0.3;
    double cell_size = 0.5;

    void validate() const;
};

// Parses the JSON scenario schema (see data/example_scenario.json). Unknown
// keys and type/range violations raise ConfigError naming the key path.
ReefScenario parse_scenario_json(std::string_view text);

double seafloor_height(const ReefScenario& scn, double x, double y);
Point2 seafloor_gradient(const ReefScenario& scn, double x, double y);
double fish_density(const ReefScenario& scn, double x, double y);

// Regular-grid heightfield mesh over the region, two triangles per quad. The
// spacing is shrunk so vertices land exactly on the region edges.
TriangleMesh synth_reef(const ReefScenario& scn, double vertex_spacing, unsigned threads = 1);

struct SimulationResult {
    std::vector<FramePose> trajectory;
    DetectionSet detections;    // noisy detector output, with confidences
    DetectionSet ground_truth;  // every true fish, confidence 1
    std::vector<std::size_t> true_counts;
};

// One frame per entry of `positions` (frame_id = index). Each frame draws
// from its own random substream keyed by (seed, frame_id), so results do not
// depend on evaluation order or thread count.
SimulationResult simulate_frames(const std::vector<Vec3>& positions, const CameraGeometry& cam,
                                 const ReefScenario& scn, Quaternion orientation, unsigned threads = 1);

SimulationResult simulate_survey(const SurveyPlan& plan, const CameraGeometry& cam, const ReefScenario& scn,
                                 unsigned threads = 1);

struct PlantedOffset {
    FishHotspot hotspot;
    double nearest_peak_distance = 0.0;  // inf when there are no peaks
};

struct EndToEndReport {
    SurveyPlan plan;
    std::size_t frames = 0;
    Grid2D rugosity;
    Grid2D abundance;
    Grid2D log_abundance;
    std::vector<Peak> peaks;
    std::vector<PlantedOffset> planted;
    std::optional<double> top_peak_offset;  // top peak to nearest planted center
    Correlation correlation;                // rugosity vs abundance
};

struct EndToEndOptions {
    double conf_threshold = 0.25;
    HotspotConfig hotspot;  // cell_size is overridden by the scenario's
    unsigned threads = 1;
};

// plan -> simulate -> abundance -> log -> peaks, and reef -> rugosity ->
// correlation, all on the scenario region and cell size.
EndToEndReport run_end_to_end(const ReefScenario& scn, const CameraGeometry& cam, double overlap,
                              const EndToEndOptions& opts = {});

}  // namespace reefmap
