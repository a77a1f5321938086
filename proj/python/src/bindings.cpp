// Python bindings for the reefmap core. Grids cross the boundary as numpy
// arrays indexed [j, i] (row = y), with NaN in no-data cells.

#include <cmath>
#include <limits>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "reefmap/detector_eval.hpp"
#include "reefmap/errors.hpp"
#include "reefmap/grid_io.hpp"
#include "reefmap/hotspot.hpp"
#include "reefmap/ingest.hpp"
#include "reefmap/rugosity.hpp"
#include "reefmap/survey.hpp"

namespace py = pybind11;
using namespace reefmap;

namespace {

using Box = std::tuple<double, double, double, double, double, double, double, double>;

AABB2 to_box(const std::array<double, 4>& r) { return AABB2::checked(r[0], r[1], r[2], r[3]); }

py::array_t<double> grid_values(const Grid2D& g) {
    py::array_t<double> out({g.ny(), g.nx()});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            v(j, i) = g.valid(i, j) ? g.value(i, j) : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

Grid2D grid_from_values(py::array_t<double, py::array::c_style | py::array::forcecast> values,
                        std::array<double, 2> origin, double cell_size) {
    if (values.ndim() != 2) throw ShapeError("grid values must be a 2-D array");
    const auto ny = static_cast<std::size_t>(values.shape(0));
    const auto nx = static_cast<std::size_t>(values.shape(1));
    Grid2D g({origin[0], origin[1]}, cell_size, nx, ny);
    auto v = values.unchecked<2>();
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            if (std::isfinite(v(j, i))) g.set(i, j, v(j, i));
        }
    }
    return g;
}

DetectionSet detection_set(const std::map<std::uint64_t, std::vector<std::vector<double>>>& frames) {
    DetectionSet set;
    for (const auto& [id, boxes] : frames) {
        auto& out = set.frames[id];
        for (const auto& b : boxes) {
            if (b.size() != 4 && b.size() != 5) throw PreconditionError("a box is (cx, cy, w, h[, confidence])");
            Detection d;
            d.cx = b[0];
            d.cy = b[1];
            d.w = b[2];
            d.h = b[3];
            d.confidence = b.size() == 5 ? b[4] : 1.0;
            out.push_back(d);
        }
    }
    return set;
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["map50"] = r.map50;
    d["map50_95"] = r.map50_95;
    d["ap_at_095"] = r.ap_at_095;
    py::dict per;
    for (const auto& t : r.per_threshold) per[py::float_(t.iou_threshold)] = t.ap;
    d["per_threshold"] = per;
    d["tp"] = r.tp;
    d["fp"] = r.fp;
    d["fn"] = r.fn;
    d["frames"] = r.frames;
    d["num_gt"] = r.num_gt;
    d["num_pred"] = r.num_pred;
    return d;
}

py::list peaks_list(const std::vector<Peak>& peaks) {
    py::list out;
    for (const auto& p : peaks) out.append(py::make_tuple(p.x, p.y, p.value));
    return out;
}

py::dict correlation_dict(const Correlation& c) {
    py::dict d;
    d["n"] = c.n;
    d["pearson"] = c.pearson ? py::object(py::float_(*c.pearson)) : py::object(py::none());
    d["spearman"] = c.spearman ? py::object(py::float_(*c.spearman)) : py::object(py::none());
    return d;
}

CameraGeometry camera(double altitude, double hfov, double vfov, double fps) {
    CameraGeometry cam;
    cam.altitude = altitude;
    cam.hfov = hfov;
    cam.vfov = vfov;
    cam.fps = fps;
    cam.validate();
    return cam;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "reefmap core: survey planning, rugosity, detector evaluation and hotspot mapping";

    // Base first: translators are tried in reverse registration order.
    static py::exception<Error> base(m, "ReefmapError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", base);
    py::register_exception<IndexError>(m, "IndexError", base);
    py::register_exception<TruncationError>(m, "TruncationError", base);
    py::register_exception<PoseError>(m, "PoseError", base);
    py::register_exception<DuplicateError>(m, "DuplicateError", base);
    py::register_exception<RangeError>(m, "RangeError", base);
    py::register_exception<DomainError>(m, "DomainError", base);
    py::register_exception<ShapeError>(m, "ShapeError", base);
    py::register_exception<MappingError>(m, "MappingError", base);
    py::register_exception<PreconditionError>(m, "PreconditionError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);

    py::class_<TriangleMesh>(m, "TriangleMesh")
        .def(py::init([](py::array_t<double, py::array::c_style | py::array::forcecast> vertices,
                         py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> faces) {
                 if (vertices.ndim() != 2 || vertices.shape(1) != 3) throw ShapeError("vertices must be (n, 3)");
                 if (faces.ndim() != 2 || faces.shape(1) != 3) throw ShapeError("faces must be (m, 3)");
                 auto v = vertices.unchecked<2>();
                 auto f = faces.unchecked<2>();
                 std::vector<Vec3> vs(static_cast<std::size_t>(v.shape(0)));
                 for (py::ssize_t k = 0; k < v.shape(0); ++k) vs[k] = {v(k, 0), v(k, 1), v(k, 2)};
                 std::vector<Face> fs(static_cast<std::size_t>(f.shape(0)));
                 for (py::ssize_t k = 0; k < f.shape(0); ++k) {
                     for (int c = 0; c < 3; ++c) {
                         if (f(k, c) < 0 || f(k, c) > std::numeric_limits<std::uint32_t>::max()) {
                             throw IndexError("face " + std::to_string(k) + " has an invalid vertex index");
                         }
                         fs[k][c] = static_cast<std::uint32_t>(f(k, c));
                     }
                 }
                 return TriangleMesh(std::move(vs), std::move(fs));
             }),
             py::arg("vertices"), py::arg("faces"))
        .def_property_readonly("vertex_count", &TriangleMesh::vertex_count)
        .def_property_readonly("face_count", &TriangleMesh::face_count)
        .def_property_readonly("surface_area", [](const TriangleMesh& mesh) { return mesh_surface_area(mesh); })
        .def("to_ply", [](const TriangleMesh& mesh, bool binary) {
                 return py::bytes(write_ply(mesh, binary ? PlyFormat::binary_little_endian : PlyFormat::ascii));
             },
             py::arg("binary") = true)
        .def("__eq__", [](const TriangleMesh& a, const TriangleMesh& b) { return a == b; });

    m.def("load_mesh", &load_mesh, py::arg("path"), "Reads a .ply or .obj mesh.");
    m.def("parse_ply", [](py::bytes data) { return parse_ply(std::string_view(data)); }, py::arg("data"));

    py::class_<Grid2D>(m, "Grid")
        .def(py::init(&grid_from_values), py::arg("values"), py::arg("origin"), py::arg("cell_size"))
        .def_property_readonly("origin", [](const Grid2D& g) { return py::make_tuple(g.origin().x, g.origin().y); })
        .def_property_readonly("cell_size", &Grid2D::cell_size)
        .def_property_readonly("nx", &Grid2D::nx)
        .def_property_readonly("ny", &Grid2D::ny)
        .def_property_readonly("valid_count", &Grid2D::valid_count)
        .def("values", &grid_values, "Values as a (ny, nx) array with NaN in no-data cells.")
        .def("to_csv", &write_grid_csv)
        .def_static("from_csv", [](const std::string& text) { return parse_grid_csv(text); }, py::arg("text"));

    m.def("footprint_dims",
          [](double altitude, double hfov, double vfov) {
              const auto fp = footprint_dims(camera(altitude, hfov, vfov, 6.0));
              return py::make_tuple(fp.width, fp.length);
          },
          py::arg("altitude") = 2.0, py::arg("hfov") = 120.0, py::arg("vfov") = 58.0,
          "Nadir footprint (across-track width, along-track length) in metres.");

    m.def("plan_lawnmower",
          [](std::array<double, 4> region, double overlap, double altitude, double hfov, double vfov,
             const std::string& axis, double speed) {
              const auto plan =
                  plan_lawnmower(to_box(region), camera(altitude, hfov, vfov, 6.0), overlap, parse_travel_axis(axis), speed);
              py::dict d;
              d["tracks"] = plan.track_count();
              d["spacing"] = plan.track_spacing;
              d["track_offsets"] = plan.track_offsets;
              d["path_length"] = plan.path_length();
              py::list wps;
              for (const auto& w : plan.waypoints) wps.append(py::make_tuple(w.x, w.y, w.z));
              d["waypoints"] = wps;
              return d;
          },
          py::arg("region"), py::arg("overlap") = 0.2, py::arg("altitude") = 2.0, py::arg("hfov") = 120.0,
          py::arg("vfov") = 58.0, py::arg("axis") = "y", py::arg("speed") = 0.3,
          "Lawnmower plan over region = (xmin, ymin, xmax, ymax).");

    m.def("rugosity_grid",
          [](const TriangleMesh& mesh, double cell_size, std::optional<std::array<double, 4>> region,
             double min_coverage, unsigned threads) {
              RugosityConfig cfg;
              cfg.cell_size = cell_size;
              if (region) cfg.region = to_box(*region);
              cfg.min_coverage_fraction = min_coverage;
              cfg.threads = threads;
              py::gil_scoped_release release;
              return rugosity_grid(mesh, cfg);
          },
          py::arg("mesh"), py::arg("cell_size") = 0.5, py::arg("region") = py::none(), py::arg("min_coverage") = 0.5,
          py::arg("threads") = 1);

    m.def("sample_annotation_frames", &sample_annotation_frames, py::arg("num_frames"), py::arg("fps"),
          py::arg("interval_s") = 20.0, py::arg("bracket_s") = 1.0);

    m.def("evaluate",
          [](const std::map<std::uint64_t, std::vector<std::vector<double>>>& preds,
             const std::map<std::uint64_t, std::vector<std::vector<double>>>& gts,
             std::optional<std::vector<double>> iou_thresholds, double conf) -> py::object {
              EvalConfig cfg;
              if (iou_thresholds) cfg.iou_thresholds = *iou_thresholds;
              cfg.confidence_threshold_for_counting = conf;
              const auto r = evaluate(detection_set(preds), detection_set(gts), cfg);
              if (!r) return py::none();
              return report_dict(*r);
          },
          py::arg("preds"), py::arg("gts"), py::arg("iou_thresholds") = py::none(), py::arg("conf") = 0.25,
          "preds/gts map frame id to boxes (cx, cy, w, h[, confidence]). None when no frame is shared.");

    m.def("evaluate_dirs",
          [](const std::filesystem::path& preds, const std::filesystem::path& gts, double conf) -> py::object {
              EvalConfig cfg;
              cfg.confidence_threshold_for_counting = conf;
              const auto r = evaluate(parse_yolo_detections(preds), parse_yolo_detections(gts), cfg);
              if (!r) return py::none();
              return report_dict(*r);
          },
          py::arg("preds"), py::arg("gts"), py::arg("conf") = 0.25);

    m.def("correlate", [](const Grid2D& a, const Grid2D& b) { return correlation_dict(correlate_grids(a, b)); },
          py::arg("a"), py::arg("b"));

    m.def("hotspot_peaks",
          [](const Grid2D& grid, std::size_t count, double min_separation) {
              HotspotConfig cfg;
              cfg.cell_size = grid.cell_size();
              cfg.peak_count = count;
              cfg.peak_min_separation = min_separation;
              cfg.validate();
              return peaks_list(hotspot_peaks(grid, cfg));
          },
          py::arg("grid"), py::arg("count") = 5, py::arg("min_separation") = 2.0);

    m.def("run_end_to_end",
          [](const std::string& scenario_json, std::optional<std::uint64_t> seed, double conf,
             const std::string& reducer, unsigned threads) {
              auto scn = parse_scenario_json(scenario_json);
              if (seed) scn.seed = *seed;
              EndToEndOptions opts;
              opts.conf_threshold = conf;
              opts.hotspot.reducer = parse_reducer(reducer);
              opts.threads = threads;
              EndToEndReport r;
              {
                  py::gil_scoped_release release;
                  r = run_end_to_end(scn, scn.camera, scn.overlap, opts);
              }
              py::dict d;
              d["tracks"] = r.plan.track_count();
              d["frames"] = r.frames;
              d["rugosity"] = r.rugosity;
              d["abundance"] = r.abundance;
              d["log_abundance"] = r.log_abundance;
              d["peaks"] = peaks_list(r.peaks);
              d["top_peak_offset"] =
                  r.top_peak_offset ? py::object(py::float_(*r.top_peak_offset)) : py::object(py::none());
              d["correlation"] = correlation_dict(r.correlation);
              return d;
          },
          py::arg("scenario_json"), py::arg("seed") = py::none(), py::arg("conf") = 0.25,
          py::arg("reducer") = "max", py::arg("threads") = 1,
          "plan, simulate, map and correlate a JSON scenario in memory.");
}
