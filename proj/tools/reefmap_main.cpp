// reefmap command-line tool.
//
// Exit codes: 0 success, 2 usage or configuration, 3 input parse error,
// 4 semantic mismatch (orphan frames, grid shape, no common frames).
// Standard output carries `key=value` lines only; prose goes to stderr.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "reefmap/detector_eval.hpp"
#include "reefmap/errors.hpp"
#include "reefmap/grid_io.hpp"
#include "reefmap/hotspot.hpp"
#include "reefmap/ingest.hpp"
#include "reefmap/rugosity.hpp"
#include "reefmap/survey.hpp"
#include "reefmap/text.hpp"

namespace fs = std::filesystem;
using namespace reefmap;
using reefmap::cli::Manifest;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitSemantic = 4;

int exit_code_for(const Error& e) {
    const std::string kind = e.kind();
    if (kind == "config" || kind == "precondition") return kExitUsage;
    if (kind == "mapping" || kind == "shape" || kind == "domain") return kExitSemantic;
    return kExitParse;
}

void kv(const std::string& key, const std::string& value) { std::cout << key << '=' << value << '\n'; }
void kv(const std::string& key, double value) { kv(key, text::fixed(value)); }
void kv(const std::string& key, std::size_t value) { kv(key, std::to_string(value)); }

std::string path_with_suffix(const std::string& prefix, const std::string& suffix) { return prefix + suffix; }

// "WxH", e.g. "12x12".
std::pair<double, double> parse_extent(const std::string& s) {
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos) throw PreconditionError("--region expects WxH, got '" + s + "'");
    const auto w = text::parse_double(std::string_view(s).substr(0, x));
    const auto h = text::parse_double(std::string_view(s).substr(x + 1));
    if (!w || !h || !(*w > 0.0) || !(*h > 0.0)) throw PreconditionError("--region expects positive WxH, got '" + s + "'");
    return {*w, *h};
}

std::vector<double> parse_list(const std::string& s, std::size_t n, const std::string& flag) {
    const auto parts = text::split(s, ',');
    std::vector<double> out;
    for (auto p : parts) {
        const auto v = text::parse_double(text::trim(p));
        if (!v || !std::isfinite(*v)) break;
        out.push_back(*v);
    }
    if (out.size() != n || parts.size() != n) {
        throw PreconditionError(flag + " expects " + std::to_string(n) + " comma-separated numbers, got '" + s + "'");
    }
    return out;
}

// "xmin,ymin,xmax,ymax".
AABB2 parse_box(const std::string& s, const std::string& flag) {
    const auto v = parse_list(s, 4, flag);
    if (!(v[2] > v[0]) || !(v[3] > v[1])) throw PreconditionError(flag + " max must exceed min");
    return AABB2::checked(v[0], v[1], v[2], v[3]);
}

nlohmann::json options_json(const CLI::App& app) {
    nlohmann::json out = nlohmann::json::object();
    for (const CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config" || name == "version") continue;
        if (opt->count() > 0) {
            const auto res = opt->reduced_results();
            out[name] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
        } else if (!opt->get_default_str().empty()) {
            out[name] = opt->get_default_str();
        }
    }
    return out;
}

struct Globals {
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
};

int run(Manifest& manifest, const nlohmann::json& config, const std::function<void(Manifest&)>& body) {
    manifest.set_config(config);
    int code = 0;
    try {
        body(manifest);
    } catch (const Error& e) {
        code = exit_code_for(e);
        manifest.fail(e.kind(), e.what());
        std::cerr << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        code = 1;
        manifest.fail("internal", e.what());
        std::cerr << "error: " << e.what() << '\n';
    }
    if (!manifest.save()) std::cerr << "warning: could not write manifest " << manifest.path() << '\n';
    return code;
}

// ------------------------------------------------------------------ plan

struct PlanArgs {
    std::string region;
    std::string origin = "0,0";
    double altitude = 2.0;
    double hfov = 120.0;
    double vfov = 58.0;
    double fps = 6.0;
    double overlap = 0.2;
    std::string axis = "y";
    double speed = 0.3;
    std::string out = ".";
};

void cmd_plan(const PlanArgs& a, Manifest& m) {
    m.stage("plan");
    const auto [w, h] = parse_extent(a.region);
    const auto o = parse_list(a.origin, 2, "--origin");
    CameraGeometry cam;
    cam.altitude = a.altitude;
    cam.hfov = a.hfov;
    cam.vfov = a.vfov;
    cam.fps = a.fps;
    const auto region = AABB2::checked(o[0], o[1], o[0] + w, o[1] + h);
    const auto plan = plan_lawnmower(region, cam, a.overlap, parse_travel_axis(a.axis), a.speed);
    const auto fp = footprint_dims(cam);
    const auto frames = frame_positions(plan, cam.fps).size();

    m.stage("write");
    m.write_output(fs::path(a.out) / "plan.csv", format_plan_csv(plan));

    kv("tracks", plan.track_count());
    kv("spacing", plan.track_spacing);
    kv("footprint_width", fp.width);
    kv("footprint_length", fp.length);
    kv("path_length", plan.path_length());
    kv("frames", frames);
    kv("duration_s", plan.path_length() / plan.speed);
    std::cerr << "wrote " << (fs::path(a.out) / "plan.csv").string() << '\n';
}

// ------------------------------------------------------------------ rugosity

struct RugosityArgs {
    std::string mesh;
    double cell_size = 0.5;
    std::string region;
    double min_coverage = 0.5;
    std::string out = "reef";
    std::string colormap = "reef";
    int upscale = 1;
};

void cmd_rugosity(const RugosityArgs& a, const Globals& g, Manifest& m) {
    m.stage("load");
    const auto mesh = load_mesh(a.mesh);
    m.add_input(a.mesh);

    m.stage("rugosity");
    RugosityConfig cfg;
    cfg.cell_size = a.cell_size;
    cfg.min_coverage_fraction = a.min_coverage;
    cfg.threads = g.threads;
    if (!a.region.empty()) cfg.region = parse_box(a.region, "--region");
    const auto ramp = named_ramp(a.colormap);
    const auto grid = rugosity_grid(mesh, cfg);

    m.stage("write");
    m.write_output(path_with_suffix(a.out, "_rugosity.csv"), write_grid_csv(grid));
    m.write_output(path_with_suffix(a.out, "_rugosity.ppm"), render_raster(grid, ramp, a.upscale));
    m.write_output(path_with_suffix(a.out, "_rugosity.world"), write_world_file(grid, a.upscale));

    kv("vertices", mesh.vertex_count());
    kv("faces", mesh.face_count());
    kv("surface_area", mesh_surface_area(mesh));
    kv("nx", grid.nx());
    kv("ny", grid.ny());
    kv("valid_cells", grid.valid_count());
    if (const auto s = rugosity_stats(grid)) {
        kv("min", s->min);
        kv("max", s->max);
        kv("mean", s->mean);
    } else {
        kv("min", "undefined");
        kv("max", "undefined");
        kv("mean", "undefined");
        std::cerr << "no cell met the coverage threshold\n";
    }
}

// ------------------------------------------------------------------ hotspot

struct HotspotArgs {
    std::string poses;
    std::string detections;
    double conf = 0.25;
    double cell_size = 0.5;
    std::string reducer = "max";
    std::string out = "hotspot";
    std::string region;
    std::size_t peaks = 5;
    double min_separation = 2.0;
    std::string colormap = "reef";
    int upscale = 1;
};

void cmd_hotspot(const HotspotArgs& a, Manifest& m) {
    HotspotConfig cfg;
    cfg.cell_size = a.cell_size;
    cfg.reducer = parse_reducer(a.reducer);
    cfg.peak_count = a.peaks;
    cfg.peak_min_separation = a.min_separation;
    cfg.validate();
    const auto ramp = named_ramp(a.colormap);
    m.note("reducer", std::string(reducer_name(cfg.reducer)));
    m.note("localization", "camera_xy");

    m.stage("load");
    const auto trajectory = parse_pose_trajectory(read_file(a.poses), a.poses);
    m.add_input(a.poses);
    const auto detections = parse_yolo_detections(a.detections);
    m.add_input(a.detections);

    m.stage("abundance");
    const auto loc = localize_counts(trajectory, detections, a.conf);
    std::optional<AABB2> region;
    if (!a.region.empty()) {
        region = parse_box(a.region, "--region");
    } else {
        region = sample_region(loc.samples, cfg.cell_size);
    }
    if (!region) throw MappingError("no trajectory frame has a detection file; nothing to map");
    const auto ab = abundance_grid(loc.samples, cfg, *region);
    const auto logged = log_transform(ab.grid);
    const auto peaks = hotspot_peaks(ab.grid, cfg);

    m.stage("write");
    m.write_output(path_with_suffix(a.out, "_abundance.csv"), write_grid_csv(ab.grid));
    m.write_output(path_with_suffix(a.out, "_abundance_log.ppm"), render_raster(logged, ramp, a.upscale));
    m.write_output(path_with_suffix(a.out, "_abundance_log.world"), write_world_file(logged, a.upscale));
    m.write_output(path_with_suffix(a.out, "_peaks.csv"), format_peaks_csv(peaks));

    kv("frames", trajectory.size());
    kv("samples", loc.samples.size());
    kv("skipped_frames", loc.skipped_frames.size());
    kv("outside", ab.outside);
    kv("reducer", std::string(reducer_name(cfg.reducer)));
    kv("nx", ab.grid.nx());
    kv("ny", ab.grid.ny());
    kv("valid_cells", ab.grid.valid_count());
    kv("peaks", peaks.size());
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        const std::string p = "peak" + std::to_string(k + 1);
        kv(p + "_x", peaks[k].x);
        kv(p + "_y", peaks[k].y);
        kv(p + "_value", peaks[k].value);
    }
    if (ab.outside > 0) std::cerr << ab.outside << " sample(s) fell outside the region\n";
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
    std::string preds;
    std::string gts;
    std::vector<double> iou;
    double conf = 0.25;
    std::string out = "eval";
};

void cmd_eval(const EvalArgs& a, Manifest& m) {
    EvalConfig cfg;
    if (!a.iou.empty()) cfg.iou_thresholds = a.iou;
    cfg.confidence_threshold_for_counting = a.conf;
    cfg.validate();

    m.stage("load");
    const auto preds = parse_yolo_detections(a.preds);
    m.add_input(a.preds);
    const auto gts = parse_yolo_detections(a.gts);
    m.add_input(a.gts);

    m.stage("evaluate");
    const auto report = evaluate(preds, gts, cfg);
    if (!report) throw MappingError("prediction and ground-truth directories share no frame");

    m.stage("write");
    const auto text_report = format_eval_report(*report);
    m.write_output(path_with_suffix(a.out, "_report.txt"), text_report);
    m.write_output(path_with_suffix(a.out, "_pr.csv"), format_pr_csv(*report));
    std::cout << text_report;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
    std::string scenario;
    std::string out = "sim";
};

std::string truth_csv(const ReefScenario& scn) {
    std::string out = "kind,x,y,sigma,density\n";
    out += "base,,,," + text::shortest(scn.base_density) + "\n";
    for (const auto& h : scn.hotspots) {
        out += "hotspot," + text::shortest(h.center.x) + "," + text::shortest(h.center.y) + "," +
               text::shortest(h.sigma) + "," + text::shortest(h.peak) + "\n";
    }
    return out;
}

std::string true_counts_csv(const SimulationResult& sim) {
    std::string out = "frame_id,x,y,true_count,observed\n";
    for (std::size_t f = 0; f < sim.trajectory.size(); ++f) {
        const auto& t = sim.trajectory[f].pose.translation();
        out += std::to_string(sim.trajectory[f].frame_id) + "," + text::shortest(t.x) + "," + text::shortest(t.y) +
               "," + std::to_string(sim.true_counts[f]) + "," +
               std::to_string(sim.detections.frames.at(sim.trajectory[f].frame_id).size()) + "\n";
    }
    return out;
}

void cmd_simulate(const SimulateArgs& a, const Globals& g, Manifest& m) {
    m.stage("load");
    auto scn = parse_scenario_json(read_file(a.scenario));
    m.add_input(a.scenario);
    if (g.seed) scn.seed = *g.seed;
    m.note("seed", scn.seed);

    m.stage("simulate");
    const auto plan = plan_lawnmower(scn.region, scn.camera, scn.overlap, scn.travel_axis, scn.speed);
    const auto sim = simulate_survey(plan, scn.camera, scn, g.threads);
    const auto reef = synth_reef(scn, scn.vertex_spacing, g.threads);

    m.stage("write");
    const fs::path dir = a.out;
    fs::create_directories(dir);
    for (const char* sub : {"detections", "labels"}) fs::remove_all(dir / sub);
    m.write_output(dir / "reef.ply", write_ply(reef, PlyFormat::binary_little_endian));
    m.write_output(dir / "poses.csv", write_pose_trajectory(sim.trajectory));
    m.write_output(dir / "plan.csv", format_plan_csv(plan));
    m.write_output(dir / "truth.csv", truth_csv(scn));
    m.write_output(dir / "true_counts.csv", true_counts_csv(sim));
    write_yolo_detections(dir / "detections", sim.detections, true);
    m.add_output(dir / "detections");
    write_yolo_detections(dir / "labels", sim.ground_truth, false);
    m.add_output(dir / "labels");

    std::size_t truth_total = 0;
    for (auto c : sim.true_counts) truth_total += c;
    kv("seed", std::to_string(scn.seed));
    kv("tracks", plan.track_count());
    kv("frames", sim.trajectory.size());
    kv("true_fish", truth_total);
    kv("detections", sim.detections.detection_count());
    kv("vertices", reef.vertex_count());
    kv("faces", reef.face_count());
    std::cerr << "wrote synthetic survey to " << dir.string() << '\n';
}

// ------------------------------------------------------------------ correlate

struct CorrelateArgs {
    std::string a;
    std::string b;
    std::string out = "correlate";
};

void cmd_correlate(const CorrelateArgs& a, Manifest& m) {
    m.stage("load");
    const auto ga = parse_grid_csv(read_file(a.a), a.a);
    m.add_input(a.a);
    const auto gb = parse_grid_csv(read_file(a.b), a.b);
    m.add_input(a.b);

    m.stage("correlate");
    const auto c = correlate_grids(ga, gb);
    auto show = [](const std::optional<double>& v) { return v ? text::fixed(*v) : std::string("undefined"); };
    const std::string report = "n=" + std::to_string(c.n) + "\npearson=" + show(c.pearson) +
                               "\nspearman=" + show(c.spearman) + "\n";
    m.stage("write");
    m.write_output(path_with_suffix(a.out, "_report.txt"), report);
    std::cout << report;
    if (c.n < 3) std::cerr << "fewer than 3 jointly valid cells; coefficients undefined\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reefmap: coral-reef survey planning, rugosity and fish-hotspot mapping"};
    app.set_version_flag("--version", std::string(REEFMAP_VERSION));
    app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    Globals globals;
    app.add_option("--threads", globals.threads, "Worker threads, 0 = one per core")->capture_default_str();
    app.add_option("--seed", globals.seed, "Override the scenario seed (simulate)");

    PlanArgs plan;
    auto* plan_cmd = app.add_subcommand("plan", "Lawnmower survey plan from camera geometry");
    plan_cmd->add_option("--region", plan.region, "Survey area as WxH metres, e.g. 12x12")->required();
    plan_cmd->add_option("--origin", plan.origin, "South-west corner x,y")->capture_default_str();
    plan_cmd->add_option("--altitude", plan.altitude, "Altitude above the seafloor (m)")->capture_default_str();
    plan_cmd->add_option("--hfov", plan.hfov, "Across-track field of view (deg)")->capture_default_str();
    plan_cmd->add_option("--vfov", plan.vfov, "Along-track field of view (deg)")->capture_default_str();
    plan_cmd->add_option("--fps", plan.fps, "Camera frame rate (Hz)")->capture_default_str();
    plan_cmd->add_option("--overlap", plan.overlap, "Across-track overlap in [0, 1)")->capture_default_str();
    plan_cmd->add_option("--axis", plan.axis, "Travel axis, x or y")->capture_default_str();
    plan_cmd->add_option("--speed", plan.speed, "Vehicle speed (m/s)")->capture_default_str();
    plan_cmd->add_option("--out", plan.out, "Output directory")->capture_default_str();

    RugosityArgs rug;
    auto* rug_cmd = app.add_subcommand("rugosity", "Per-cell rugosity grid from a PLY/OBJ mesh");
    rug_cmd->add_option("--mesh", rug.mesh, "Mesh file (.ply or .obj)")->required();
    rug_cmd->add_option("--cell-size", rug.cell_size, "Grid cell size (m)")->capture_default_str();
    rug_cmd->add_option("--region", rug.region, "xmin,ymin,xmax,ymax (default: mesh bounds)");
    rug_cmd->add_option("--min-coverage", rug.min_coverage, "Minimum covered cell fraction")->capture_default_str();
    rug_cmd->add_option("--out", rug.out, "Output prefix")->capture_default_str();
    rug_cmd->add_option("--colormap", rug.colormap, "reef, viridis or gray")->capture_default_str();
    rug_cmd->add_option("--upscale", rug.upscale, "Raster pixels per cell")->capture_default_str();

    HotspotArgs hot;
    auto* hot_cmd = app.add_subcommand("hotspot", "Fish-abundance grid, log raster and peaks");
    hot_cmd->add_option("--poses", hot.poses, "Pose trajectory CSV")->required();
    hot_cmd->add_option("--detections", hot.detections, "Directory of <frame_id>.txt YOLO files")->required();
    hot_cmd->add_option("--conf", hot.conf, "Confidence threshold for counting")->capture_default_str();
    hot_cmd->add_option("--cell-size", hot.cell_size, "Grid cell size (m)")->capture_default_str();
    hot_cmd->add_option("--reducer", hot.reducer, "max, mean or sum")->capture_default_str();
    hot_cmd->add_option("--out", hot.out, "Output prefix")->capture_default_str();
    hot_cmd->add_option("--region", hot.region, "xmin,ymin,xmax,ymax (default: sample bounds)");
    hot_cmd->add_option("--peaks", hot.peaks, "Number of peaks to report")->capture_default_str();
    hot_cmd->add_option("--min-separation", hot.min_separation, "Minimum peak separation (m)")->capture_default_str();
    hot_cmd->add_option("--colormap", hot.colormap, "reef, viridis or gray")->capture_default_str();
    hot_cmd->add_option("--upscale", hot.upscale, "Raster pixels per cell")->capture_default_str();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Detector mAP50 / mAP50_95 against ground truth");
    eval_cmd->add_option("--preds", ev.preds, "Prediction label directory")->required();
    eval_cmd->add_option("--gts", ev.gts, "Ground-truth label directory")->required();
    eval_cmd->add_option("--iou", ev.iou, "IoU thresholds (default 0.50:0.05:0.95)")->delimiter(',');
    eval_cmd->add_option("--conf", ev.conf, "Confidence threshold for TP/FP/FN counts")->capture_default_str();
    eval_cmd->add_option("--out", ev.out, "Output prefix")->capture_default_str();

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Synthetic reef, survey and detections from a scenario");
    sim_cmd->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
    sim_cmd->add_option("--out", sim.out, "Output directory")->capture_default_str();

    CorrelateArgs cor;
    auto* cor_cmd = app.add_subcommand("correlate", "Pearson and Spearman correlation of two grid CSVs");
    cor_cmd->add_option("--a", cor.a, "First grid CSV")->required();
    cor_cmd->add_option("--b", cor.b, "Second grid CSV")->required();
    cor_cmd->add_option("--out", cor.out, "Output prefix")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    auto config_of = [&](const CLI::App* sub) {
        nlohmann::json c = options_json(app);
        c[sub->get_name()] = options_json(*sub);
        return c;
    };

    if (*plan_cmd) {
        Manifest m("plan", fs::path(plan.out) / "plan_manifest.json");
        return run(m, config_of(plan_cmd), [&](Manifest& mm) { cmd_plan(plan, mm); });
    }
    if (*rug_cmd) {
        Manifest m("rugosity", rug.out + "_manifest.json");
        return run(m, config_of(rug_cmd), [&](Manifest& mm) { cmd_rugosity(rug, globals, mm); });
    }
    if (*hot_cmd) {
        Manifest m("hotspot", hot.out + "_manifest.json");
        return run(m, config_of(hot_cmd), [&](Manifest& mm) { cmd_hotspot(hot, mm); });
    }
    if (*eval_cmd) {
        Manifest m("eval", ev.out + "_manifest.json");
        return run(m, config_of(eval_cmd), [&](Manifest& mm) { cmd_eval(ev, mm); });
    }
    if (*sim_cmd) {
        Manifest m("simulate", fs::path(sim.out) / "manifest.json");
        return run(m, config_of(sim_cmd), [&](Manifest& mm) { cmd_simulate(sim, globals, mm); });
    }
    if (*cor_cmd) {
        Manifest m("correlate", cor.out + "_manifest.json");
        return run(m, config_of(cor_cmd), [&](Manifest& mm) { cmd_correlate(cor, mm); });
    }
    return kExitUsage;
}
