#include "reefmap/grid_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "reefmap/errors.hpp"
#include "reefmap/text.hpp"

namespace reefmap {

namespace {
constexpr std::string_view kGridHeader = "i,j,x_center,y_center,value,valid";

std::string at_line(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}
}  // namespace

std::string write_grid_csv(const Grid2D& grid) {
    std::string out = "# grid origin_x=" + text::shortest(grid.origin().x) +
                      " origin_y=" + text::shortest(grid.origin().y) +
                      " cell_size=" + text::shortest(grid.cell_size()) + " nx=" + std::to_string(grid.nx()) +
                      " ny=" + std::to_string(grid.ny()) + "\n";
    out += kGridHeader;
    out += '\n';
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const auto c = grid.center(i, j);
            const bool ok = grid.valid(i, j);
            out += std::to_string(i) + ',' + std::to_string(j) + ',' + text::shortest(c.x) + ',' +
                   text::shortest(c.y) + ',' + (ok ? text::shortest(grid.value(i, j)) : std::string("nan")) + ',' +
                   (ok ? "1" : "0") + '\n';
        }
    }
    return out;
}

Grid2D parse_grid_csv(std::string_view data, std::string_view source) {
    struct Row {
        std::size_t i, j;
        double xc, yc, value;
        bool valid;
    };
    std::optional<Point2> origin;
    std::optional<double> cell_size;
    std::optional<std::size_t> meta_nx, meta_ny;
    std::vector<Row> rows;
    bool have_header = false;

    text::LineReader lines(data);
    std::string_view line;
    while (lines.next(line)) {
        const auto ln = lines.line_number();
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            const auto tok = text::split_ws(trimmed.substr(1));
            if (tok.empty() || tok[0] != "grid") continue;
            std::map<std::string, std::string_view> kv;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const auto eq = tok[k].find('=');
                if (eq == std::string_view::npos) throw FormatError(at_line(source, ln) + "bad grid metadata");
                kv[std::string(tok[k].substr(0, eq))] = tok[k].substr(eq + 1);
            }
            const auto ox = kv.count("origin_x") ? text::parse_double(kv["origin_x"]) : std::nullopt;
            const auto oy = kv.count("origin_y") ? text::parse_double(kv["origin_y"]) : std::nullopt;
            const auto cs = kv.count("cell_size") ? text::parse_double(kv["cell_size"]) : std::nullopt;
            const auto gx = kv.count("nx") ? text::parse_uint(kv["nx"]) : std::nullopt;
            const auto gy = kv.count("ny") ? text::parse_uint(kv["ny"]) : std::nullopt;
            if (!ox || !oy || !cs || !gx || !gy) throw FormatError(at_line(source, ln) + "incomplete grid metadata");
            origin = Point2{*ox, *oy};
            cell_size = *cs;
            meta_nx = static_cast<std::size_t>(*gx);
            meta_ny = static_cast<std::size_t>(*gy);
            continue;
        }
        if (!have_header) {
            if (trimmed != kGridHeader) {
                throw FormatError(at_line(source, ln) + "expected header '" + std::string(kGridHeader) + "'");
            }
            have_header = true;
            continue;
        }
        const auto f = text::split(trimmed, ',');
        if (f.size() != 6) throw FormatError(at_line(source, ln) + "expected 6 columns");
        const auto i = text::parse_uint(f[0]);
        const auto j = text::parse_uint(f[1]);
        const auto xc = text::parse_double(f[2]);
        const auto yc = text::parse_double(f[3]);
        const auto v = text::parse_double(f[4]);
        const auto ok = text::parse_uint(f[5]);
        if (!i || !j || !xc || !yc || !v || !ok || *ok > 1) throw FormatError(at_line(source, ln) + "malformed row");
        if (*ok == 1 && !std::isfinite(*v)) throw FormatError(at_line(source, ln) + "valid cell with non-finite value");
        rows.push_back({static_cast<std::size_t>(*i), static_cast<std::size_t>(*j), *xc, *yc, *v, *ok == 1});
    }
    if (!have_header) throw FormatError(at_line(source, 1) + "missing header '" + std::string(kGridHeader) + "'");
    if (rows.empty()) throw FormatError(std::string(source) + ": grid has no cells");

    std::size_t nx = 0, ny = 0;
    for (const auto& r : rows) {
        nx = std::max(nx, r.i + 1);
        ny = std::max(ny, r.j + 1);
    }
    if (meta_nx && (*meta_nx != nx || *meta_ny != ny)) {
        throw FormatError(std::string(source) + ": grid metadata dimensions disagree with rows");
    }
    if (rows.size() != nx * ny) throw FormatError(std::string(source) + ": grid rows do not cover every cell");

    if (!cell_size) {
        const Row* a = nullptr;
        const Row* b = nullptr;
        for (const auto& r : rows) {
            if (r.i == 0 && r.j == 0) a = &r;
            if ((nx > 1 && r.i == 1 && r.j == 0) || (nx == 1 && r.i == 0 && r.j == 1)) b = &r;
        }
        if (!a || !b) throw FormatError(std::string(source) + ": cannot infer cell size from a single cell");
        cell_size = nx > 1 ? b->xc - a->xc : b->yc - a->yc;
        origin = Point2{a->xc - *cell_size / 2.0, a->yc - *cell_size / 2.0};
    }

    Grid2D grid(*origin, *cell_size, nx, ny);
    std::vector<bool> seen(nx * ny, false);
    for (const auto& r : rows) {
        const auto k = grid.flat(r.i, r.j);
        if (seen[k]) throw FormatError(std::string(source) + ": duplicate cell " + std::to_string(r.i) + "," + std::to_string(r.j));
        seen[k] = true;
        if (r.valid) grid.set(r.i, r.j, r.value);
    }
    return grid;
}

std::string write_world_file(const Grid2D& grid, int upscale) {
    return "cell_size=" + text::shortest(grid.cell_size()) + "\n" +
           "origin_x=" + text::shortest(grid.origin().x) + "\n" +
           "origin_y=" + text::shortest(grid.origin().y) + "\n" +
           "nx=" + std::to_string(grid.nx()) + "\n" +
           "ny=" + std::to_string(grid.ny()) + "\n" +
           "upscale=" + std::to_string(upscale) + "\n" +
           "row_order=north_up\n";
}

}  // namespace reefmap
