// JSON schema for ReefScenario. Every section except "region" is optional;
// omitted keys keep the ReefScenario defaults.

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "reefmap/errors.hpp"
#include "reefmap/survey.hpp"

namespace reefmap {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* a : keys) known = known || k == a;
        if (!known) throw ConfigError(join(path, k), "unknown key");
    }
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

void read_number(const json& obj, const std::string& path, const char* key, double& out) {
    if (auto it = obj.find(key); it != obj.end()) out = number(*it, join(path, key));
}

Point2 point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [x, y]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

Point2 required_point(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(join(path, key), "missing required key");
    return point(*it, join(path, key));
}

template <typename F>
void each(const json& obj, const std::string& path, const char* key, F&& fn) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string p = join(path, key);
    if (!it->is_array()) throw ConfigError(p, "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) fn((*it)[k], p + "[" + std::to_string(k) + "]");
}

}  // namespace

ReefScenario parse_scenario_json(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    require_object(root, "");
    allow_keys(root, "", {"seed", "region", "camera", "survey", "reef", "fish", "noise", "grid"});

    ReefScenario scn;
    if (auto it = root.find("seed"); it != root.end()) {
        if (!it->is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
        scn.seed = it->get<std::uint64_t>();
    }

    auto rit = root.find("region");
    if (rit == root.end()) throw ConfigError("region", "missing required key");
    require_object(*rit, "region");
    allow_keys(*rit, "region", {"min", "max"});
    const Point2 lo = required_point(*rit, "region", "min");
    const Point2 hi = required_point(*rit, "region", "max");
    if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw ConfigError("region", "max must exceed min");
    scn.region = {lo, hi};

    if (auto it = root.find("camera"); it != root.end()) {
        require_object(*it, "camera");
        allow_keys(*it, "camera", {"altitude", "hfov", "vfov", "fps", "image_width", "image_height"});
        read_number(*it, "camera", "altitude", scn.camera.altitude);
        read_number(*it, "camera", "hfov", scn.camera.hfov);
        read_number(*it, "camera", "vfov", scn.camera.vfov);
        read_number(*it, "camera", "fps", scn.camera.fps);
        for (const char* key : {"image_width", "image_height"}) {
            if (auto s = it->find(key); s != it->end()) {
                if (!s->is_number_integer() || s->get<long long>() <= 0) {
                    throw ConfigError(join("camera", key), "expected a positive integer");
                }
                (std::string(key) == "image_width" ? scn.camera.image_width : scn.camera.image_height) =
                    s->get<int>();
            }
        }
    }

    if (auto it = root.find("survey"); it != root.end()) {
        require_object(*it, "survey");
        allow_keys(*it, "survey", {"overlap", "travel_axis", "speed"});
        read_number(*it, "survey", "overlap", scn.overlap);
        read_number(*it, "survey", "speed", scn.speed);
        if (auto a = it->find("travel_axis"); a != it->end()) {
            if (!a->is_string() || (*a != "x" && *a != "y")) throw ConfigError("survey.travel_axis", "expected \"x\" or \"y\"");
            scn.travel_axis = parse_travel_axis(a->get<std::string>());
        }
    }

    if (auto it = root.find("reef"); it != root.end()) {
        require_object(*it, "reef");
        allow_keys(*it, "reef", {"base_depth", "vertex_spacing", "bumps", "pillar"});
        read_number(*it, "reef", "base_depth", scn.base_depth);
        read_number(*it, "reef", "vertex_spacing", scn.vertex_spacing);
        each(*it, "reef", "bumps", [&](const json& b, const std::string& p) {
            require_object(b, p);
            allow_keys(b, p, {"center", "sigma", "height"});
            GaussianBump bump;
            bump.center = required_point(b, p, "center");
            read_number(b, p, "sigma", bump.sigma);
            read_number(b, p, "height", bump.height);
            scn.bumps.push_back(bump);
        });
        if (auto p = it->find("pillar"); p != it->end() && !p->is_null()) {
            require_object(*p, "reef.pillar");
            allow_keys(*p, "reef.pillar", {"center", "radius", "height", "edge_width"});
            Pillar pillar;
            pillar.center = required_point(*p, "reef.pillar", "center");
            read_number(*p, "reef.pillar", "radius", pillar.radius);
            read_number(*p, "reef.pillar", "height", pillar.height);
            read_number(*p, "reef.pillar", "edge_width", pillar.edge_width);
            scn.pillar = pillar;
        }
    }

    if (auto it = root.find("fish"); it != root.end()) {
        require_object(*it, "fish");
        allow_keys(*it, "fish", {"base_density", "hotspots", "rugosity_gain"});
        read_number(*it, "fish", "base_density", scn.base_density);
        read_number(*it, "fish", "rugosity_gain", scn.rugosity_gain);
        each(*it, "fish", "hotspots", [&](const json& h, const std::string& p) {
            require_object(h, p);
            allow_keys(h, p, {"center", "sigma", "peak"});
            FishHotspot hs;
            hs.center = required_point(h, p, "center");
            read_number(h, p, "sigma", hs.sigma);
            read_number(h, p, "peak", hs.peak);
            scn.hotspots.push_back(hs);
        });
    }

    if (auto it = root.find("noise"); it != root.end()) {
        require_object(*it, "noise");
        allow_keys(*it, "noise", {"false_positive_rate", "miss_probability"});
        read_number(*it, "noise", "false_positive_rate", scn.noise.false_positive_rate);
        read_number(*it, "noise", "miss_probability", scn.noise.miss_probability);
    }

    if (auto it = root.find("grid"); it != root.end()) {
        require_object(*it, "grid");
        allow_keys(*it, "grid", {"cell_size"});
        read_number(*it, "grid", "cell_size", scn.cell_size);
    }

    scn.validate();
    return scn;
}

}  // namespace reefmap
