#include "reefmap/hotspot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "reefmap/detector_eval.hpp"
#include "reefmap/errors.hpp"
#include "reefmap/text.hpp"

namespace reefmap {

Reducer parse_reducer(std::string_view name) {
    if (name == "max") return Reducer::max;
    if (name == "mean") return Reducer::mean;
    if (name == "sum") return Reducer::sum;
    throw PreconditionError("unknown reducer '" + std::string(name) + "' (expected max, mean or sum)");
}

std::string_view reducer_name(Reducer r) {
    switch (r) {
        case Reducer::max: return "max";
        case Reducer::mean: return "mean";
        case Reducer::sum: return "sum";
    }
    return "max";
}

void HotspotConfig::validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw PreconditionError("hotspot cell_size must be > 0");
    if (!(peak_min_separation >= 0.0) || !std::isfinite(peak_min_separation)) {
        throw PreconditionError("peak_min_separation must be >= 0");
    }
}

Localization localize_counts(std::span<const FramePose> trajectory, const DetectionSet& detections,
                             double conf_threshold) {
    std::set<std::uint64_t> known;
    for (const auto& fp : trajectory) known.insert(fp.frame_id);

    std::vector<std::uint64_t> orphans;
    for (const auto& [id, dets] : detections.frames) {
        if (!known.count(id)) orphans.push_back(id);
    }
    if (!orphans.empty()) {
        std::string msg = std::to_string(orphans.size()) + " detection frame(s) have no pose:";
        for (std::size_t k = 0; k < std::min<std::size_t>(orphans.size(), 10); ++k) {
            msg += " " + std::to_string(orphans[k]);
        }
        if (orphans.size() > 10) msg += " ...";
        throw MappingError(msg);
    }

    Localization out;
    for (const auto& fp : trajectory) {
        const auto it = detections.frames.find(fp.frame_id);
        if (it == detections.frames.end()) {
            out.skipped_frames.push_back(fp.frame_id);
            continue;
        }
        const auto& t = fp.pose.translation();
        out.samples.push_back({fp.frame_id, t.x, t.y, count_fish(it->second, conf_threshold)});
    }
    return out;
}

AbundanceGrid abundance_grid(std::span<const CountSample> samples, const HotspotConfig& cfg, const AABB2& region) {
    cfg.validate();
    AbundanceGrid out{Grid2D::covering(region, cfg.cell_size), 0};
    Grid2D& g = out.grid;
    std::vector<double> acc(g.size(), 0.0);
    std::vector<std::size_t> hits(g.size(), 0);
    for (const auto& s : samples) {
        const auto cell = grid_index(g, s.x, s.y);
        if (!cell) {
            ++out.outside;
            continue;
        }
        const auto k = g.flat(cell->i, cell->j);
        const auto c = static_cast<double>(s.count);
        if (cfg.reducer == Reducer::max) {
            acc[k] = hits[k] == 0 ? c : std::max(acc[k], c);
        } else {
            acc[k] += c;
        }
        ++hits[k];
    }
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const auto k = g.flat(i, j);
            if (hits[k] == 0) continue;
            const double v = cfg.reducer == Reducer::mean ? acc[k] / static_cast<double>(hits[k]) : acc[k];
            g.set(i, j, v);
        }
    }
    return out;
}

std::optional<AABB2> sample_region(std::span<const CountSample> samples, double cell_size) {
    if (samples.empty()) return std::nullopt;
    if (!(cell_size > 0.0)) throw PreconditionError("cell size must be > 0");
    long long i0 = std::numeric_limits<long long>::max(), j0 = i0;
    long long i1 = std::numeric_limits<long long>::min(), j1 = i1;
    for (const auto& s : samples) {
        const auto i = interval_index(0.0, cell_size, s.x);
        const auto j = interval_index(0.0, cell_size, s.y);
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
    }
    auto edge = [cell_size](long long k) { return static_cast<double>(k) * cell_size; };
    return AABB2{{edge(i0), edge(j0)}, {edge(i1 + 1), edge(j1 + 1)}};
}

Grid2D log_transform(const Grid2D& grid) {
    Grid2D out = grid;
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            if (!grid.valid(i, j)) continue;
            const double v = grid.value(i, j);
            if (v < 0.0) {
                throw DomainError("log_transform: negative value " + text::shortest(v) + " at cell " +
                                  std::to_string(i) + "," + std::to_string(j));
            }
            out.set(i, j, std::log1p(v));
        }
    }
    return out;
}

ColorRamp named_ramp(std::string_view name) {
    if (name == "reef") return {{{{8, 29, 88}, {34, 94, 168}, {29, 145, 120}, {122, 198, 70}, {250, 230, 40}}}};
    if (name == "viridis") return {{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}}};
    if (name == "gray") return {{{{0, 0, 0}, {64, 64, 64}, {128, 128, 128}, {191, 191, 191}, {255, 255, 255}}}};
    throw PreconditionError("unknown colormap '" + std::string(name) + "' (expected reef, viridis or gray)");
}

namespace {

std::array<std::uint8_t, 3> ramp_color(const ColorRamp& ramp, double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double s = t * 4.0;
    const int k = std::min(static_cast<int>(s), 3);
    const double f = s - k;
    std::array<std::uint8_t, 3> c{};
    for (int ch = 0; ch < 3; ++ch) {
        const double a = ramp.anchors[static_cast<std::size_t>(k)][static_cast<std::size_t>(ch)];
        const double b = ramp.anchors[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(ch)];
        c[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(std::lround(a + (b - a) * f));
    }
    return c;
}

}  // namespace

std::string render_raster(const Grid2D& grid, const ColorRamp& ramp, int upscale) {
    if (upscale < 1) throw PreconditionError("upscale must be >= 1");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            if (!grid.valid(i, j)) continue;
            lo = std::min(lo, grid.value(i, j));
            hi = std::max(hi, grid.value(i, j));
        }
    }
    const auto up = static_cast<std::size_t>(upscale);
    const std::size_t width = grid.nx() * up;
    const std::size_t height = grid.ny() * up;
    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + width * height * 3);
    for (std::size_t row = 0; row < height; ++row) {
        const std::size_t j = grid.ny() - 1 - row / up;
        for (std::size_t col = 0; col < width; ++col) {
            const std::size_t i = col / up;
            std::array<std::uint8_t, 3> c = kNoDataColor;
            if (grid.valid(i, j)) {
                const double t = hi > lo ? (grid.value(i, j) - lo) / (hi - lo) : 0.0;
                c = ramp_color(ramp, t);
            }
            const std::size_t px = header + (row * width + col) * 3;
            out[px] = static_cast<char>(c[0]);
            out[px + 1] = static_cast<char>(c[1]);
            out[px + 2] = static_cast<char>(c[2]);
        }
    }
    return out;
}

Pixmap parse_ppm(std::string_view bytes) {
    // Header: magic, width, height, maxval separated by whitespace (comments
    // allowed), then exactly one whitespace byte before the raster.
    std::size_t pos = 0;
    auto next_token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const auto start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        return bytes.substr(start, pos - start);
    };
    if (next_token() != "P6") throw FormatError("ppm: missing P6 magic");
    const auto w = text::parse_uint(next_token());
    const auto h = text::parse_uint(next_token());
    const auto m = text::parse_uint(next_token());
    if (!w || !h || !m || *m == 0 || *m > 255) throw FormatError("ppm: bad header");
    ++pos;
    Pixmap px{static_cast<std::size_t>(*w), static_cast<std::size_t>(*h), static_cast<int>(*m), {}};
    const std::size_t n = px.width * px.height * 3;
    if (pos + n > bytes.size()) throw TruncationError("ppm: truncated raster");
    px.rgb.assign(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos),
                  reinterpret_cast<const std::uint8_t*>(bytes.data() + pos + n));
    return px;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) return std::nullopt;
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double da = a[k] - ma;
        const double db = b[k] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t m = k;
        while (m + 1 < order.size() && v[order[m + 1]] == v[order[k]]) ++m;
        const double avg = (static_cast<double>(k) + static_cast<double>(m)) / 2.0 + 1.0;
        for (std::size_t t = k; t <= m; ++t) ranks[order[t]] = avg;
        k = m + 1;
    }
    return ranks;
}

Correlation correlate_grids(const Grid2D& a, const Grid2D& b) {
    if (!a.same_geometry(b)) throw ShapeError("grids differ in origin, cell size or dimensions");
    std::vector<double> va, vb;
    for (std::size_t j = 0; j < a.ny(); ++j) {
        for (std::size_t i = 0; i < a.nx(); ++i) {
            if (a.valid(i, j) && b.valid(i, j)) {
                va.push_back(a.value(i, j));
                vb.push_back(b.value(i, j));
            }
        }
    }
    Correlation c;
    c.n = va.size();
    if (c.n < 3) return c;
    c.pearson = pearson(va, vb);
    const auto ra = average_ranks(va);
    const auto rb = average_ranks(vb);
    c.spearman = pearson(ra, rb);
    return c;
}

std::vector<Peak> hotspot_peaks(const Grid2D& grid, const HotspotConfig& cfg) {
    cfg.validate();
    std::vector<Peak> cells;
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            if (!grid.valid(i, j)) continue;
            const auto c = grid.center(i, j);
            cells.push_back({i, j, c.x, c.y, grid.value(i, j)});
        }
    }
    // (i, j) lexicographic insertion order + stable sort = tie rule.
    std::stable_sort(cells.begin(), cells.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
    std::vector<Peak> picked;
    const double sep2 = cfg.peak_min_separation * cfg.peak_min_separation;
    for (const auto& c : cells) {
        if (picked.size() >= cfg.peak_count) break;
        const bool clear = std::all_of(picked.begin(), picked.end(), [&](const Peak& p) {
            const double dx = p.x - c.x, dy = p.y - c.y;
            return dx * dx + dy * dy >= sep2;
        });
        if (clear) picked.push_back(c);
    }
    return picked;
}

std::string format_peaks_csv(std::span<const Peak> peaks) {
    std::string out = "rank,x,y,value\n";
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        out += std::to_string(k + 1) + "," + text::fixed(peaks[k].x) + "," + text::fixed(peaks[k].y) + "," +
               text::fixed(peaks[k].value) + "\n";
    }
    return out;
}

}  // namespace reefmap
