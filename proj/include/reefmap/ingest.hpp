#pragma once

// Readers and writers for the survey data products:
//   * PLY (ascii 1.0 / binary_little_endian 1.0) and OBJ triangle meshes
//   * camera trajectories as CSV `frame_id,timestamp,tx,ty,tz,qw,qx,qy,qz`
//     (camera-to-world: translation is the camera position in the world)
//   * YOLO label files, one `<frame_id>.txt` per frame, lines
//     `class cx cy w h [conf]` in normalized image coordinates
//
// All parse errors name the source and a 1-based line (or a byte offset for
// binary payloads).

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reefmap/geom.hpp"

namespace reefmap {

struct FramePose {
    std::uint64_t frame_id = 0;
    double timestamp = 0.0;
    PoseSE3 pose;
};

// Normalized center-size box. Ground truth carries confidence 1.
struct Detection {
    int class_id = 0;
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    double confidence = 1.0;
    friend bool operator==(const Detection&, const Detection&) = default;
};

// frame_id -> detections. A present key with an empty list means the frame was
// observed and nothing was found; a missing key means no observation.
struct DetectionSet {
    std::map<std::uint64_t, std::vector<Detection>> frames;

    bool has_frame(std::uint64_t id) const { return frames.count(id) != 0; }
    std::size_t detection_count() const;
    friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

enum class PlyFormat { ascii, binary_little_endian };

TriangleMesh parse_ply(std::span<const std::byte> bytes, std::string_view source = "<ply>");
TriangleMesh parse_ply(std::string_view bytes, std::string_view source = "<ply>");
std::string write_ply(const TriangleMesh& mesh, PlyFormat format);

TriangleMesh parse_obj(std::string_view text, std::string_view source = "<obj>");

// Extension-dispatching convenience (.ply / .obj). Missing or unreadable
// files raise FormatError.
TriangleMesh load_mesh(const std::filesystem::path& path);

// Result is sorted by frame_id.
std::vector<FramePose> parse_pose_trajectory(std::string_view text, std::string_view source = "<poses>");
std::string write_pose_trajectory(std::span<const FramePose> poses);

std::vector<Detection> parse_yolo_file(std::string_view text, std::string_view source = "<labels>");
// Reads every `<non-negative integer>.txt` in `dir`; other files are ignored.
DetectionSet parse_yolo_detections(const std::filesystem::path& dir);
// Writes one file per frame, including empty files for observed-empty frames.
// Confidence is emitted as a sixth column when `with_confidence` is set.
void write_yolo_detections(const std::filesystem::path& dir, const DetectionSet& set, bool with_confidence);
std::string format_yolo_file(std::span<const Detection> detections, bool with_confidence);

std::string read_file(const std::filesystem::path& path);

}  // namespace reefmap
