#include "reefmap/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "reefmap/errors.hpp"
#include "reefmap/text.hpp"

namespace reefmap {

namespace fs = std::filesystem;

std::size_t DetectionSet::detection_count() const {
    std::size_t n = 0;
    for (const auto& [id, dets] : frames) n += dets.size();
    return n;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

namespace {

std::string at_line(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

// ---------------------------------------------------------------- PLY

enum class ScalarType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::optional<ScalarType> scalar_type(std::string_view name) {
    if (name == "char" || name == "int8") return ScalarType::i8;
    if (name == "uchar" || name == "uint8") return ScalarType::u8;
    if (name == "short" || name == "int16") return ScalarType::i16;
    if (name == "ushort" || name == "uint16") return ScalarType::u16;
    if (name == "int" || name == "int32") return ScalarType::i32;
    if (name == "uint" || name == "uint32") return ScalarType::u32;
    if (name == "float" || name == "float32") return ScalarType::f32;
    if (name == "double" || name == "float64") return ScalarType::f64;
    return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
    switch (t) {
        case ScalarType::i8:
        case ScalarType::u8: return 1;
        case ScalarType::i16:
        case ScalarType::u16: return 2;
        case ScalarType::i32:
        case ScalarType::u32:
        case ScalarType::f32: return 4;
        case ScalarType::f64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    ScalarType type = ScalarType::f32;
    bool is_list = false;
    ScalarType count_type = ScalarType::u8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

struct PlyHeader {
    PlyFormat format = PlyFormat::ascii;
    std::vector<PlyElement> elements;
    std::size_t body_offset = 0;
    std::size_t body_line = 0;  // 1-based line of the first body line (ascii)
};

PlyHeader parse_ply_header(std::string_view data, std::string_view source) {
    text::LineReader lines(data);
    std::string_view line;
    if (!lines.next(line) || text::trim(line) != "ply") {
        throw FormatError(at_line(source, 1) + "missing 'ply' magic");
    }
    PlyHeader header;
    bool have_format = false;
    while (true) {
        if (!lines.next(line)) {
            throw FormatError(at_line(source, lines.line_number() + 1) + "header ended without end_header");
        }
        const auto ln = lines.line_number();
        const auto tok = text::split_ws(line);
        if (tok.empty()) continue;
        const auto key = tok[0];
        if (key == "end_header") break;
        if (key == "comment" || key == "obj_info") continue;
        if (key == "format") {
            if (tok.size() != 3 || tok[2] != "1.0") throw FormatError(at_line(source, ln) + "bad format line");
            if (tok[1] == "ascii") {
                header.format = PlyFormat::ascii;
            } else if (tok[1] == "binary_little_endian") {
                header.format = PlyFormat::binary_little_endian;
            } else {
                throw FormatError(at_line(source, ln) + "unsupported PLY format '" + std::string(tok[1]) + "'");
            }
            have_format = true;
        } else if (key == "element") {
            if (tok.size() != 3) throw FormatError(at_line(source, ln) + "bad element line");
            const auto count = text::parse_uint(tok[2]);
            if (!count) throw FormatError(at_line(source, ln) + "bad element count");
            header.elements.push_back({std::string(tok[1]), static_cast<std::size_t>(*count), {}});
        } else if (key == "property") {
            if (header.elements.empty()) throw FormatError(at_line(source, ln) + "property before any element");
            PlyProperty prop;
            if (tok.size() == 5 && tok[1] == "list") {
                const auto ct = scalar_type(tok[2]);
                const auto it = scalar_type(tok[3]);
                if (!ct || !it || *ct == ScalarType::f32 || *ct == ScalarType::f64) {
                    throw FormatError(at_line(source, ln) + "bad list property types");
                }
                prop = {std::string(tok[4]), *it, true, *ct};
            } else if (tok.size() == 3) {
                const auto t = scalar_type(tok[1]);
                if (!t) throw FormatError(at_line(source, ln) + "unknown property type '" + std::string(tok[1]) + "'");
                prop = {std::string(tok[2]), *t, false, ScalarType::u8};
            } else {
                throw FormatError(at_line(source, ln) + "bad property line");
            }
            header.elements.back().props.push_back(std::move(prop));
        } else {
            throw FormatError(at_line(source, ln) + "unexpected header keyword '" + std::string(key) + "'");
        }
    }
    if (!have_format) throw FormatError(at_line(source, 2) + "missing format line");
    header.body_offset = lines.offset();
    header.body_line = lines.line_number() + 1;
    return header;
}

// Sequential reader over the element instances of either encoding. Values
// come back as doubles; integer widths up to 32 bits are exact.
class PlyBodyReader {
public:
    PlyBodyReader(std::string_view data, const PlyHeader& h, std::string_view source)
        : data_(data), format_(h.format), source_(source), pos_(h.body_offset), line_(h.body_line - 1),
          ascii_(data.substr(h.body_offset)) {}

    // Starts a new element instance (ascii: consumes one non-empty line).
    void begin_instance() {
        if (format_ != PlyFormat::ascii) return;
        std::string_view line;
        do {
            if (!ascii_.next(line)) throw FormatError(where() + "unexpected end of data");
            ++line_;
        } while (text::trim(line).empty());
        tokens_ = text::split_ws(line);
        token_ = 0;
    }

    void end_instance() {
        if (format_ == PlyFormat::ascii && token_ != tokens_.size()) {
            throw FormatError(where() + "expected " + std::to_string(token_) + " values, found " +
                              std::to_string(tokens_.size()));
        }
    }

    double read(ScalarType t) {
        if (format_ == PlyFormat::ascii) {
            if (token_ >= tokens_.size()) throw FormatError(where() + "too few values");
            const auto tok = tokens_[token_++];
            const auto v = text::parse_double(tok);
            if (!v) throw FormatError(where() + "cannot parse '" + std::string(tok) + "'");
            return *v;
        }
        const auto n = scalar_size(t);
        if (pos_ + n > data_.size()) {
            throw TruncationError(std::string(source_) + ": byte " + std::to_string(pos_) +
                                  ": truncated binary payload");
        }
        const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
        pos_ += n;
        std::uint64_t bits = 0;
        for (std::size_t b = 0; b < n; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
        switch (t) {
            case ScalarType::i8: return static_cast<std::int8_t>(bits);
            case ScalarType::u8: return static_cast<std::uint8_t>(bits);
            case ScalarType::i16: return static_cast<std::int16_t>(bits);
            case ScalarType::u16: return static_cast<std::uint16_t>(bits);
            case ScalarType::i32: return static_cast<std::int32_t>(bits);
            case ScalarType::u32: return static_cast<std::uint32_t>(bits);
            case ScalarType::f32: return std::bit_cast<float>(static_cast<std::uint32_t>(bits));
            case ScalarType::f64: return std::bit_cast<double>(bits);
        }
        return 0.0;
    }

    std::string where() const {
        if (format_ == PlyFormat::ascii) return at_line(source_, line_);
        return std::string(source_) + ": byte " + std::to_string(pos_) + ": ";
    }

private:
    std::string_view data_;
    PlyFormat format_;
    std::string_view source_;
    std::size_t pos_;
    std::size_t line_;
    text::LineReader ascii_;
    std::vector<std::string_view> tokens_;
    std::size_t token_ = 0;
};

void fan_triangulate(std::span<const long long> poly, std::vector<std::array<long long, 3>>& out) {
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) out.push_back({poly[0], poly[k], poly[k + 1]});
}

}  // namespace

TriangleMesh parse_ply(std::string_view data, std::string_view source) {
    const PlyHeader header = parse_ply_header(data, source);
    PlyBodyReader body(data, header, source);

    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    bool saw_vertex = false;

    for (const auto& el : header.elements) {
        if (el.name == "vertex") {
            saw_vertex = true;
            std::array<int, 3> slot{-1, -1, -1};
            for (std::size_t p = 0; p < el.props.size(); ++p) {
                const auto& name = el.props[p].name;
                if (el.props[p].is_list) continue;
                if (name == "x") slot[0] = static_cast<int>(p);
                if (name == "y") slot[1] = static_cast<int>(p);
                if (name == "z") slot[2] = static_cast<int>(p);
            }
            if (std::find(slot.begin(), slot.end(), -1) != slot.end()) {
                throw FormatError(std::string(source) + ": vertex element lacks x/y/z properties");
            }
            vertices.reserve(el.count);
            for (std::size_t v = 0; v < el.count; ++v) {
                body.begin_instance();
                std::array<double, 3> xyz{};
                for (std::size_t p = 0; p < el.props.size(); ++p) {
                    const auto& prop = el.props[p];
                    if (prop.is_list) {
                        const auto n = static_cast<long long>(body.read(prop.count_type));
                        for (long long k = 0; k < n; ++k) body.read(prop.type);
                        continue;
                    }
                    const double value = body.read(prop.type);
                    for (int c = 0; c < 3; ++c) {
                        if (slot[c] == static_cast<int>(p)) xyz[c] = value;
                    }
                }
                body.end_instance();
                Vec3 vert{xyz[0], xyz[1], xyz[2]};
                if (!vert.finite()) throw FormatError(body.where() + "non-finite vertex " + std::to_string(v));
                vertices.push_back(vert);
            }
        } else if (el.name == "face") {
            int index_prop = -1;
            for (std::size_t p = 0; p < el.props.size(); ++p) {
                const auto& prop = el.props[p];
                if (prop.is_list && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
                    index_prop = static_cast<int>(p);
                }
            }
            if (index_prop < 0) throw FormatError(std::string(source) + ": face element lacks vertex_indices list");
            faces.reserve(el.count);
            std::vector<long long> poly;
            std::vector<std::array<long long, 3>> tris;
            for (std::size_t f = 0; f < el.count; ++f) {
                body.begin_instance();
                poly.clear();
                for (std::size_t p = 0; p < el.props.size(); ++p) {
                    const auto& prop = el.props[p];
                    if (!prop.is_list) {
                        body.read(prop.type);
                        continue;
                    }
                    const auto n = static_cast<long long>(body.read(prop.count_type));
                    for (long long k = 0; k < n; ++k) {
                        const double idx = body.read(prop.type);
                        if (static_cast<int>(p) == index_prop) poly.push_back(static_cast<long long>(idx));
                    }
                }
                body.end_instance();
                if (poly.size() < 3) {
                    throw FormatError(body.where() + "face " + std::to_string(f) + " has fewer than 3 vertices");
                }
                for (long long idx : poly) {
                    if (idx < 0 || static_cast<std::size_t>(idx) >= vertices.size()) {
                        throw IndexError(std::string(source) + ": face " + std::to_string(f) + " references vertex " +
                                         std::to_string(idx) + " but only " + std::to_string(vertices.size()) +
                                         " vertices are defined");
                    }
                }
                tris.clear();
                fan_triangulate(poly, tris);
                for (const auto& t : tris) {
                    faces.push_back({static_cast<std::uint32_t>(t[0]), static_cast<std::uint32_t>(t[1]),
                                     static_cast<std::uint32_t>(t[2])});
                }
            }
        } else {
            for (std::size_t k = 0; k < el.count; ++k) {
                body.begin_instance();
                for (const auto& prop : el.props) {
                    if (prop.is_list) {
                        const auto n = static_cast<long long>(body.read(prop.count_type));
                        for (long long m = 0; m < n; ++m) body.read(prop.type);
                    } else {
                        body.read(prop.type);
                    }
                }
                body.end_instance();
            }
        }
    }
    if (!saw_vertex) throw FormatError(std::string(source) + ": no vertex element");
    return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh parse_ply(std::span<const std::byte> bytes, std::string_view source) {
    return parse_ply(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), source);
}

std::string write_ply(const TriangleMesh& mesh, PlyFormat format) {
    std::string out = "ply\n";
    out += format == PlyFormat::ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
    out += "element vertex " + std::to_string(mesh.vertex_count()) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    out += "element face " + std::to_string(mesh.face_count()) + "\n";
    out += "property list uchar int vertex_indices\nend_header\n";

    if (format == PlyFormat::ascii) {
        for (const auto& v : mesh.vertices()) {
            out += text::significant(v.x, 9) + ' ' + text::significant(v.y, 9) + ' ' + text::significant(v.z, 9) + '\n';
        }
        for (const auto& f : mesh.faces()) {
            out += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]) + '\n';
        }
        return out;
    }

    auto put = [&out](std::uint64_t bits, std::size_t n) {
        for (std::size_t b = 0; b < n; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    };
    out.reserve(out.size() + mesh.vertex_count() * 24 + mesh.face_count() * 13);
    for (const auto& v : mesh.vertices()) {
        put(std::bit_cast<std::uint64_t>(v.x), 8);
        put(std::bit_cast<std::uint64_t>(v.y), 8);
        put(std::bit_cast<std::uint64_t>(v.z), 8);
    }
    for (const auto& f : mesh.faces()) {
        put(3, 1);
        for (auto idx : f) put(idx, 4);
    }
    return out;
}

// ---------------------------------------------------------------- OBJ

TriangleMesh parse_obj(std::string_view data, std::string_view source) {
    std::vector<Vec3> vertices;
    std::vector<std::array<long long, 3>> tris;
    std::vector<std::size_t> tri_line;
    std::vector<long long> poly;

    text::LineReader lines(data);
    std::string_view line;
    while (lines.next(line)) {
        const auto ln = lines.line_number();
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = text::split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "v") {
            if (tok.size() < 4 || tok.size() > 5) throw FormatError(at_line(source, ln) + "vertex needs 3 coordinates");
            std::array<double, 3> xyz{};
            for (int c = 0; c < 3; ++c) {
                const auto v = text::parse_double(tok[c + 1]);
                if (!v || !std::isfinite(*v)) {
                    throw FormatError(at_line(source, ln) + "cannot parse '" + std::string(tok[c + 1]) + "'");
                }
                xyz[c] = *v;
            }
            vertices.push_back({xyz[0], xyz[1], xyz[2]});
        } else if (tok[0] == "f") {
            poly.clear();
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const auto ref = tok[k].substr(0, tok[k].find('/'));
                const auto idx = text::parse_int(ref);
                if (!idx) throw FormatError(at_line(source, ln) + "cannot parse face index '" + std::string(tok[k]) + "'");
                if (*idx == 0) throw IndexError(at_line(source, ln) + "face index 0 is invalid (OBJ is 1-based)");
                long long resolved = *idx > 0 ? *idx - 1 : static_cast<long long>(vertices.size()) + *idx;
                if (resolved < 0) {
                    throw IndexError(at_line(source, ln) + "relative face index " + std::to_string(*idx) +
                                     " precedes the first vertex");
                }
                poly.push_back(resolved);
            }
            if (poly.size() < 3) throw FormatError(at_line(source, ln) + "face has fewer than 3 vertices");
            fan_triangulate(poly, tris);
            tri_line.resize(tris.size(), ln);
        }
        // vt, vn, g, o, s, usemtl, mtllib and friends carry nothing we need.
    }

    std::vector<Face> faces;
    faces.reserve(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        for (auto idx : tris[t]) {
            if (static_cast<std::size_t>(idx) >= vertices.size()) {
                throw IndexError(at_line(source, tri_line[t]) + "face index " + std::to_string(idx + 1) +
                                 " exceeds vertex count " + std::to_string(vertices.size()));
            }
        }
        faces.push_back({static_cast<std::uint32_t>(tris[t][0]), static_cast<std::uint32_t>(tris[t][1]),
                         static_cast<std::uint32_t>(tris[t][2])});
    }
    return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh load_mesh(const fs::path& path) {
    const std::string data = read_file(path);
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") return parse_obj(data, path.string());
    if (ext == ".ply") return parse_ply(std::string_view(data), path.string());
    throw FormatError(path.string() + ": unknown mesh extension (expected .ply or .obj)");
}

// ---------------------------------------------------------------- poses

namespace {
constexpr std::string_view kPoseHeader = "frame_id,timestamp,tx,ty,tz,qw,qx,qy,qz";
}

std::vector<FramePose> parse_pose_trajectory(std::string_view data, std::string_view source) {
    std::vector<FramePose> poses;
    text::LineReader lines(data);
    std::string_view line;
    bool have_header = false;
    while (lines.next(line)) {
        const auto ln = lines.line_number();
        const auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        if (!have_header) {
            if (trimmed != kPoseHeader) {
                throw FormatError(at_line(source, ln) + "expected header '" + std::string(kPoseHeader) + "'");
            }
            have_header = true;
            continue;
        }
        const auto fields = text::split(trimmed, ',');
        if (fields.size() != 9) {
            throw FormatError(at_line(source, ln) + "expected 9 columns, found " + std::to_string(fields.size()));
        }
        const auto id = text::parse_uint(fields[0]);
        if (!id) throw FormatError(at_line(source, ln) + "bad frame_id '" + std::string(fields[0]) + "'");
        std::array<double, 8> v{};
        for (std::size_t c = 1; c < 9; ++c) {
            const auto d = text::parse_double(fields[c]);
            if (!d || !std::isfinite(*d)) {
                throw FormatError(at_line(source, ln) + "cannot parse '" + std::string(fields[c]) + "'");
            }
            v[c - 1] = *d;
        }
        try {
            poses.push_back({*id, v[0], PoseSE3({v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]})});
        } catch (const PoseError& e) {
            throw PoseError(at_line(source, ln) + "frame " + std::to_string(*id) + ": " + e.what());
        }
    }
    if (!have_header) throw FormatError(at_line(source, 1) + "missing header '" + std::string(kPoseHeader) + "'");

    std::stable_sort(poses.begin(), poses.end(),
                     [](const FramePose& a, const FramePose& b) { return a.frame_id < b.frame_id; });
    for (std::size_t k = 1; k < poses.size(); ++k) {
        if (poses[k].frame_id == poses[k - 1].frame_id) {
            throw DuplicateError(std::string(source) + ": duplicate frame_id " + std::to_string(poses[k].frame_id));
        }
        if (poses[k].timestamp < poses[k - 1].timestamp) {
            throw FormatError(std::string(source) + ": timestamp decreases at frame_id " +
                              std::to_string(poses[k].frame_id));
        }
    }
    return poses;
}

std::string write_pose_trajectory(std::span<const FramePose> poses) {
    std::string out(kPoseHeader);
    out += '\n';
    for (const auto& p : poses) {
        const auto& t = p.pose.translation();
        const auto& q = p.pose.rotation();
        out += std::to_string(p.frame_id);
        for (double v : {p.timestamp, t.x, t.y, t.z, q.w, q.x, q.y, q.z}) {
            out += ',';
            out += text::shortest(v);
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------- YOLO

std::vector<Detection> parse_yolo_file(std::string_view data, std::string_view source) {
    constexpr double slack = 1e-6;
    std::vector<Detection> out;
    text::LineReader lines(data);
    std::string_view line;
    while (lines.next(line)) {
        const auto ln = lines.line_number();
        const auto tok = text::split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 5 && tok.size() != 6) {
            throw FormatError(at_line(source, ln) + "expected 5 or 6 fields, found " + std::to_string(tok.size()));
        }
        const auto cls = text::parse_int(tok[0]);
        if (!cls) throw FormatError(at_line(source, ln) + "bad class id '" + std::string(tok[0]) + "'");
        std::array<double, 5> v{0, 0, 0, 0, 1.0};
        for (std::size_t c = 1; c < tok.size(); ++c) {
            const auto d = text::parse_double(tok[c]);
            if (!d || !std::isfinite(*d)) {
                throw FormatError(at_line(source, ln) + "cannot parse '" + std::string(tok[c]) + "'");
            }
            v[c - 1] = *d;
        }
        const bool ok_center = v[0] >= -slack && v[0] <= 1 + slack && v[1] >= -slack && v[1] <= 1 + slack;
        const bool ok_size = v[2] > 0 && v[2] <= 1 + slack && v[3] > 0 && v[3] <= 1 + slack;
        const bool ok_conf = v[4] >= -slack && v[4] <= 1 + slack;
        if (!ok_center || !ok_size || !ok_conf) {
            throw RangeError(at_line(source, ln) + "value outside the normalized range");
        }
        out.push_back({static_cast<int>(*cls), v[0], v[1], v[2], v[3], v[4]});
    }
    return out;
}

DetectionSet parse_yolo_detections(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw FormatError(dir.string() + ": not a directory");
    DetectionSet set;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        const auto id = text::parse_uint(entry.path().stem().string());
        if (!id) continue;
        set.frames[*id] = parse_yolo_file(read_file(entry.path()), entry.path().string());
    }
    return set;
}

std::string format_yolo_file(std::span<const Detection> detections, bool with_confidence) {
    std::string out;
    for (const auto& d : detections) {
        out += std::to_string(d.class_id);
        for (double v : {d.cx, d.cy, d.w, d.h}) {
            out += ' ';
            out += text::shortest(v);
        }
        if (with_confidence) {
            out += ' ';
            out += text::shortest(d.confidence);
        }
        out += '\n';
    }
    return out;
}

void write_yolo_detections(const fs::path& dir, const DetectionSet& set, bool with_confidence) {
    fs::create_directories(dir);
    for (const auto& [id, dets] : set.frames) {
        std::ofstream out(dir / (std::to_string(id) + ".txt"), std::ios::binary);
        if (!out) throw FormatError((dir / (std::to_string(id) + ".txt")).string() + ": cannot write");
        out << format_yolo_file(dets, with_confidence);
    }
}

}  // namespace reefmap
