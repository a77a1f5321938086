#include "reefmap/survey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "reefmap/detector_eval.hpp"
#include "reefmap/errors.hpp"
#include "reefmap/parallel.hpp"
#include "reefmap/rugosity.hpp"
#include "reefmap/text.hpp"

namespace reefmap {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

void CameraGeometry::validate() const {
    if (!(altitude > 0.0) || !std::isfinite(altitude)) throw PreconditionError("camera altitude must be > 0");
    if (!(hfov > 0.0 && hfov < 180.0)) throw PreconditionError("hfov must be in (0, 180) degrees");
    if (!(vfov > 0.0 && vfov < 180.0)) throw PreconditionError("vfov must be in (0, 180) degrees");
    if (!(fps > 0.0) || !std::isfinite(fps)) throw PreconditionError("fps must be > 0");
    if (image_width <= 0 || image_height <= 0) throw PreconditionError("image size must be positive");
}

Footprint footprint_dims(const CameraGeometry& cam) {
    cam.validate();
    return {2.0 * cam.altitude * std::tan(cam.hfov * kDeg / 2.0), 2.0 * cam.altitude * std::tan(cam.vfov * kDeg / 2.0)};
}

TravelAxis parse_travel_axis(std::string_view name) {
    if (name == "x") return TravelAxis::x;
    if (name == "y") return TravelAxis::y;
    throw PreconditionError("travel axis must be 'x' or 'y'");
}

double SurveyPlan::path_length() const {
    double total = 0.0;
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
        const Vec3 d = waypoints[k] - waypoints[k - 1];
        total += std::hypot(d.x, d.y);
    }
    return total;
}

SurveyPlan plan_lawnmower(const AABB2& region, const CameraGeometry& cam, double overlap, TravelAxis axis,
                          double speed) {
    if (!(region.width() > 0.0) || !(region.height() > 0.0)) throw PreconditionError("survey region is degenerate");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw PreconditionError("overlap must be in [0, 1)");
    if (!(speed > 0.0) || !std::isfinite(speed)) throw PreconditionError("speed must be > 0");
    const Footprint fp = footprint_dims(cam);

    SurveyPlan plan;
    plan.region = region;
    plan.axis = axis;
    plan.speed = speed;
    plan.altitude = cam.altitude;
    plan.track_spacing = fp.width * (1.0 - overlap);

    const double across_min = axis == TravelAxis::y ? region.min.x : region.min.y;
    const double across_extent = axis == TravelAxis::y ? region.width() : region.height();
    const double along_min = axis == TravelAxis::y ? region.min.y : region.min.x;
    const double along_max = axis == TravelAxis::y ? region.max.y : region.max.x;

    std::size_t tracks = 1;
    if (fp.width < across_extent) {
        tracks = static_cast<std::size_t>(std::max(1.0, std::ceil(across_extent / plan.track_spacing - 1e-9)));
    }
    const double margin = (across_extent - static_cast<double>(tracks - 1) * plan.track_spacing) / 2.0;
    for (std::size_t k = 0; k < tracks; ++k) {
        const double across = tracks == 1 ? across_min + across_extent / 2.0
                                           : across_min + margin + static_cast<double>(k) * plan.track_spacing;
        plan.track_offsets.push_back(across);
        const bool forward = k % 2 == 0;
        const double a0 = forward ? along_min : along_max;
        const double a1 = forward ? along_max : along_min;
        const double z = -cam.altitude;
        if (axis == TravelAxis::y) {
            plan.waypoints.push_back({across, a0, z});
            plan.waypoints.push_back({across, a1, z});
        } else {
            plan.waypoints.push_back({a0, across, z});
            plan.waypoints.push_back({a1, across, z});
        }
    }
    return plan;
}

std::vector<Vec3> frame_positions(const SurveyPlan& plan, double fps) {
    if (!(fps > 0.0)) throw PreconditionError("fps must be > 0");
    std::vector<Vec3> out;
    if (plan.waypoints.empty()) return out;
    if (plan.waypoints.size() == 1) return {plan.waypoints.front()};

    std::vector<double> cumulative{0.0};
    for (std::size_t k = 1; k < plan.waypoints.size(); ++k) {
        const Vec3 d = plan.waypoints[k] - plan.waypoints[k - 1];
        cumulative.push_back(cumulative.back() + std::hypot(d.x, d.y));
    }
    const double total = cumulative.back();
    const double step = plan.speed / fps;
    const auto n = static_cast<std::size_t>(std::floor(total / step + 1e-9)) + 1;
    out.reserve(n);
    std::size_t seg = 1;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = std::min(total, static_cast<double>(k) * step);
        while (seg + 1 < cumulative.size() && cumulative[seg] < s) ++seg;
        const double len = cumulative[seg] - cumulative[seg - 1];
        const double t = len > 0.0 ? (s - cumulative[seg - 1]) / len : 0.0;
        const Vec3& a = plan.waypoints[seg - 1];
        const Vec3& b = plan.waypoints[seg];
        out.push_back(a + t * (b - a));
    }
    return out;
}

Quaternion nadir_orientation(TravelAxis axis) {
    // Camera frame: x right, y down the image, z along the optical axis.
    // Flipping about world x points the optical axis at -Z and keeps image x
    // on world x, i.e. across-track when travelling along y.
    const Quaternion look_down = Quaternion::from_axis_angle({1, 0, 0}, std::numbers::pi);
    if (axis == TravelAxis::y) return look_down;
    return Quaternion::from_axis_angle({0, 0, 1}, std::numbers::pi / 2.0) * look_down;
}

std::string format_plan_csv(const SurveyPlan& plan) {
    std::string out = "idx,x,y,z\n";
    for (std::size_t k = 0; k < plan.waypoints.size(); ++k) {
        const auto& w = plan.waypoints[k];
        out += std::to_string(k) + "," + text::fixed(w.x) + "," + text::fixed(w.y) + "," + text::fixed(w.z) + "\n";
    }
    return out;
}

void ReefScenario::validate() const {
    auto finite_pos = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!(region.width() > 0.0) || !(region.height() > 0.0)) throw ConfigError("region", "must have positive extent");
    if (!std::isfinite(base_depth)) throw ConfigError("reef.base_depth", "must be finite");
    if (!finite_pos(vertex_spacing)) throw ConfigError("reef.vertex_spacing", "must be > 0");
    for (std::size_t k = 0; k < bumps.size(); ++k) {
        if (!finite_pos(bumps[k].sigma)) throw ConfigError("reef.bumps[" + std::to_string(k) + "].sigma", "must be > 0");
    }
    if (pillar) {
        if (!finite_pos(pillar->radius)) throw ConfigError("reef.pillar.radius", "must be > 0");
        if (!finite_pos(pillar->edge_width)) throw ConfigError("reef.pillar.edge_width", "must be > 0");
    }
    if (!(base_density >= 0.0)) throw ConfigError("fish.base_density", "must be >= 0");
    for (std::size_t k = 0; k < hotspots.size(); ++k) {
        const std::string p = "fish.hotspots[" + std::to_string(k) + "]";
        if (!finite_pos(hotspots[k].sigma)) throw ConfigError(p + ".sigma", "must be > 0");
        if (!(hotspots[k].peak >= 0.0)) throw ConfigError(p + ".peak", "must be >= 0");
    }
    if (!(rugosity_gain >= 0.0)) throw ConfigError("fish.rugosity_gain", "must be >= 0");
    if (!(noise.false_positive_rate >= 0.0)) throw ConfigError("noise.false_positive_rate", "must be >= 0");
    if (!(noise.miss_probability >= 0.0 && noise.miss_probability <= 1.0)) {
        throw ConfigError("noise.miss_probability", "must be in [0, 1]");
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("survey.overlap", "must be in [0, 1)");
    if (!finite_pos(speed)) throw ConfigError("survey.speed", "must be > 0");
    if (!finite_pos(cell_size)) throw ConfigError("grid.cell_size", "must be > 0");
    try {
        camera.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError("camera", e.what());
    }
}

// ---------------------------------------------------------------- heightfield

namespace {

double pillar_profile(const Pillar& p, double r) {
    const double u = (r - p.radius) / p.edge_width;
    if (u > 700.0) return 0.0;
    return p.height / (1.0 + std::exp(u));
}

// d/dr of pillar_profile.
double pillar_slope(const Pillar& p, double r) {
    const double u = (r - p.radius) / p.edge_width;
    if (std::abs(u) > 350.0) return 0.0;
    const double e = std::exp(u);
    return -p.height * e / ((1.0 + e) * (1.0 + e) * p.edge_width);
}

}  // namespace

double seafloor_height(const ReefScenario& scn, double x, double y) {
    double z = -scn.base_depth;
    for (const auto& b : scn.bumps) {
        const double dx = x - b.center.x, dy = y - b.center.y;
        z += b.height * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
    }
    if (scn.pillar) z += pillar_profile(*scn.pillar, std::hypot(x - scn.pillar->center.x, y - scn.pillar->center.y));
    return z;
}

Point2 seafloor_gradient(const ReefScenario& scn, double x, double y) {
    Point2 g{0.0, 0.0};
    for (const auto& b : scn.bumps) {
        const double dx = x - b.center.x, dy = y - b.center.y;
        const double s2 = b.sigma * b.sigma;
        const double f = b.height * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
        g.x -= f * dx / s2;
        g.y -= f * dy / s2;
    }
    if (scn.pillar) {
        const double dx = x - scn.pillar->center.x, dy = y - scn.pillar->center.y;
        const double r = std::hypot(dx, dy);
        if (r > 0.0) {
            const double s = pillar_slope(*scn.pillar, r);
            g.x += s * dx / r;
            g.y += s * dy / r;
        }
    }
    return g;
}

double fish_density(const ReefScenario& scn, double x, double y) {
    double d = scn.base_density;
    for (const auto& h : scn.hotspots) {
        const double dx = x - h.center.x, dy = y - h.center.y;
        d += h.peak * std::exp(-(dx * dx + dy * dy) / (2.0 * h.sigma * h.sigma));
    }
    if (scn.rugosity_gain > 0.0) {
        const Point2 g = seafloor_gradient(scn, x, y);
        d += scn.rugosity_gain * (std::sqrt(1.0 + g.x * g.x + g.y * g.y) - 1.0);
    }
    return d;
}

TriangleMesh synth_reef(const ReefScenario& scn, double vertex_spacing, unsigned threads) {
    if (!(vertex_spacing > 0.0) || !std::isfinite(vertex_spacing)) throw PreconditionError("vertex_spacing must be > 0");
    const AABB2& r = scn.region;
    const auto nx = static_cast<std::size_t>(std::max(1.0, std::ceil(r.width() / vertex_spacing - 1e-9)));
    const auto ny = static_cast<std::size_t>(std::max(1.0, std::ceil(r.height() / vertex_spacing - 1e-9)));
    const double dx = r.width() / static_cast<double>(nx);
    const double dy = r.height() / static_cast<double>(ny);

    const std::size_t vx = nx + 1;
    std::vector<Vec3> verts(vx * (ny + 1));
    parallel_for(ny + 1, threads, [&](std::size_t jb, std::size_t je) {
        for (std::size_t j = jb; j < je; ++j) {
            const double y = j == ny ? r.max.y : r.min.y + static_cast<double>(j) * dy;
            for (std::size_t i = 0; i < vx; ++i) {
                const double x = i == nx ? r.max.x : r.min.x + static_cast<double>(i) * dx;
                verts[j * vx + i] = {x, y, seafloor_height(scn, x, y)};
            }
        }
    });

    std::vector<Face> faces;
    faces.reserve(nx * ny * 2);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const auto a = static_cast<std::uint32_t>(j * vx + i);
            const auto b = a + 1;
            const auto c = static_cast<std::uint32_t>((j + 1) * vx + i);
            const auto d = c + 1;
            faces.push_back({a, b, d});
            faces.push_back({a, d, c});
        }
    }
    return TriangleMesh(std::move(verts), std::move(faces));
}

// ---------------------------------------------------------------- simulation

namespace {

double draw_beta(std::mt19937_64& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

std::size_t draw_poisson(std::mt19937_64& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<long long> d(mean);
    return static_cast<std::size_t>(d(rng));
}

Detection draw_box(std::mt19937_64& rng, const CameraGeometry& cam) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> width(0.02, 0.06);
    std::uniform_real_distribution<double> aspect(0.5, 1.0);
    Detection d;
    d.class_id = kFishClass;
    d.cx = unit(rng);
    d.cy = unit(rng);
    d.w = width(rng);
    const double pixel_ratio = static_cast<double>(cam.image_width) / static_cast<double>(cam.image_height);
    d.h = std::min(1.0, d.w * pixel_ratio * aspect(rng));
    d.confidence = 1.0;
    return d;
}

}  // namespace

SimulationResult simulate_frames(const std::vector<Vec3>& positions, const CameraGeometry& cam,
                                 const ReefScenario& scn, Quaternion orientation, unsigned threads) {
    cam.validate();
    const Footprint fp = footprint_dims(cam);
    const double area = fp.width * fp.length;
    const std::size_t n = positions.size();

    std::vector<std::vector<Detection>> observed(n), truth(n);
    std::vector<std::size_t> true_counts(n, 0);

    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t f = begin; f < end; ++f) {
            const auto frame = static_cast<std::uint64_t>(f);
            std::seed_seq seq{static_cast<std::uint32_t>(scn.seed), static_cast<std::uint32_t>(scn.seed >> 32),
                              static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(frame >> 32),
                              0x5eedf15du};
            std::mt19937_64 rng(seq);
            std::bernoulli_distribution detected(1.0 - scn.noise.miss_probability);
            std::normal_distribution<double> jitter(0.0, 1.0);

            const double expected = fish_density(scn, positions[f].x, positions[f].y) * area;
            const std::size_t fish = draw_poisson(rng, expected);
            true_counts[f] = fish;
            for (std::size_t k = 0; k < fish; ++k) {
                Detection gt = draw_box(rng, cam);
                truth[f].push_back(gt);
                const bool hit = detected(rng);
                const double conf = draw_beta(rng, 5.0, 2.0);
                const double jx = jitter(rng), jy = jitter(rng), js = jitter(rng);
                if (!hit) continue;
                Detection p = gt;
                p.cx = std::clamp(gt.cx + 0.08 * gt.w * jx, 0.0, 1.0);
                p.cy = std::clamp(gt.cy + 0.08 * gt.h * jy, 0.0, 1.0);
                p.w = std::min(1.0, gt.w * std::exp(0.08 * js));
                p.h = std::min(1.0, gt.h * std::exp(0.08 * js));
                p.confidence = conf;
                observed[f].push_back(p);
            }
            const std::size_t spurious = draw_poisson(rng, scn.noise.false_positive_rate);
            for (std::size_t k = 0; k < spurious; ++k) {
                Detection p = draw_box(rng, cam);
                p.confidence = draw_beta(rng, 2.0, 5.0);
                observed[f].push_back(p);
            }
        }
    });

    SimulationResult out;
    out.true_counts = std::move(true_counts);
    out.trajectory.reserve(n);
    const double floor_z = -scn.base_depth;
    for (std::size_t f = 0; f < n; ++f) {
        const auto id = static_cast<std::uint64_t>(f);
        const Vec3 at{positions[f].x, positions[f].y, floor_z + cam.altitude};
        out.trajectory.push_back({id, static_cast<double>(f) / cam.fps, PoseSE3(at, orientation)});
        out.detections.frames[id] = std::move(observed[f]);
        out.ground_truth.frames[id] = std::move(truth[f]);
    }
    return out;
}

SimulationResult simulate_survey(const SurveyPlan& plan, const CameraGeometry& cam, const ReefScenario& scn,
                                 unsigned threads) {
    return simulate_frames(frame_positions(plan, cam.fps), cam, scn, nadir_orientation(plan.axis), threads);
}

EndToEndReport run_end_to_end(const ReefScenario& scn, const CameraGeometry& cam, double overlap,
                              const EndToEndOptions& opts) {
    scn.validate();
    EndToEndReport rep;
    rep.plan = plan_lawnmower(scn.region, cam, overlap, scn.travel_axis, scn.speed);
    const SimulationResult sim = simulate_survey(rep.plan, cam, scn, opts.threads);
    rep.frames = sim.trajectory.size();

    HotspotConfig hcfg = opts.hotspot;
    hcfg.cell_size = scn.cell_size;
    const Localization loc = localize_counts(sim.trajectory, sim.detections, opts.conf_threshold);
    rep.abundance = abundance_grid(loc.samples, hcfg, scn.region).grid;
    rep.log_abundance = log_transform(rep.abundance);
    rep.peaks = hotspot_peaks(rep.log_abundance, hcfg);
    for (auto& p : rep.peaks) p.value = rep.abundance.value(p.i, p.j);

    for (const auto& h : scn.hotspots) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : rep.peaks) best = std::min(best, std::hypot(p.x - h.center.x, p.y - h.center.y));
        rep.planted.push_back({h, best});
    }
    if (!rep.peaks.empty() && !scn.hotspots.empty()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& h : scn.hotspots) {
            best = std::min(best, std::hypot(rep.peaks.front().x - h.center.x, rep.peaks.front().y - h.center.y));
        }
        rep.top_peak_offset = best;
    }

    const TriangleMesh reef = synth_reef(scn, scn.vertex_spacing, opts.threads);
    RugosityConfig rcfg;
    rcfg.cell_size = scn.cell_size;
    rcfg.region = scn.region;
    rcfg.threads = opts.threads;
    rep.rugosity = rugosity_grid(reef, rcfg);
    rep.correlation = correlate_grids(rep.rugosity, rep.abundance);
    return rep;
}

}  // namespace reefmap
