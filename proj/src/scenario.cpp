#include "semcost/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_reader.hpp"
#include "semcost/serialize.hpp"

namespace semcost {

using nlohmann::json;
using detail::index_path;
using detail::ObjectReader;

namespace {

PlannerParams planner_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    PlannerParams p;
    p.w1 = r.number_or("w1", p.w1);
    p.w2 = r.number_or("w2", p.w2);
    p.gamma = r.number_or("gamma", p.gamma);
    p.connectivity = r.integer_or("connectivity", p.connectivity);
    r.finish();
    return p;
}

FusionParams fusion_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    FusionParams p;
    p.trust_n = r.number_or("trust_n", p.trust_n);
    p.prior_alpha = r.number_or("prior_alpha", p.prior_alpha);
    p.prior_beta = r.number_or("prior_beta", p.prior_beta);
    r.finish();
    return p;
}

ObstacleSpec obstacle_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    ObstacleSpec spec;
    spec.id = r.string("id");
    spec.family = r.string_or("family", "");
    spec.base_gain = r.number_or("base_gain", 1.0);
    const bool has_rect = r.has("rect_m");
    const bool has_cells = r.has("cells");
    if (has_rect == has_cells) {
        throw ValidationError(path, "exactly one of rect_m or cells is required");
    }
    if (has_rect) {
        const auto& arr = detail::read_array(r.at("rect_m"), r.field("rect_m"));
        if (arr.size() != 4) throw ValidationError(r.field("rect_m"), "expected [x0, y0, x1, y1]");
        RectFootprint rect;
        for (std::size_t i = 0; i < 4; ++i) {
            rect.bounds_m[i] = detail::read_number(arr[i], index_path(r.field("rect_m"), i));
        }
        spec.footprint = rect;
    } else {
        const auto& arr = detail::read_array(r.at("cells"), r.field("cells"));
        CellFootprint cells;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cells.cells.push_back(cell_from_json(arr[i], index_path(r.field("cells"), i)));
        }
        spec.footprint = std::move(cells);
    }
    r.finish();
    return spec;
}

std::string cell_text(Cell c) {
    std::ostringstream os;
    os << "(" << c.col << ", " << c.row << ")";
    return os.str();
}

}  // namespace

json to_json(Cell c) { return json::array({c.col, c.row}); }

Cell cell_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2) throw ValidationError(field, "expected [col, row]");
    return Cell{detail::read_int(j[0], field + "[0]"), detail::read_int(j[1], field + "[1]")};
}

Scenario scenario_from_json(const json& j) {
    ObjectReader r(j, "");
    Scenario s;
    s.name = r.string_or("name", "");
    s.resolution_m = r.number("resolution_m");
    s.width_cells = r.integer("width_cells");
    s.height_cells = r.integer("height_cells");
    s.start_cell = cell_from_json(r.at("start_cell"), "start_cell");
    s.goal_cell = cell_from_json(r.at("goal_cell"), "goal_cell");
    if (r.has("obstacles")) {
        const auto& arr = detail::read_array(r.at("obstacles"), "obstacles");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            s.obstacles.push_back(obstacle_from_json(arr[i], index_path("obstacles", i)));
        }
    }
    if (r.has("planner")) s.planner_params = planner_from_json(r.at("planner"), "planner");
    if (r.has("fusion")) s.fusion_params = fusion_from_json(r.at("fusion"), "fusion");
    r.finish();
    validate(s);
    return s;
}

json to_json(const Scenario& s) {
    json obstacles = json::array();
    for (const auto& o : s.obstacles) {
        json jo = {{"id", o.id}, {"family", o.family}, {"base_gain", o.base_gain}};
        if (const auto* rect = std::get_if<RectFootprint>(&o.footprint)) {
            jo["rect_m"] = rect->bounds_m;
        } else {
            json cells = json::array();
            for (Cell c : std::get<CellFootprint>(o.footprint).cells) cells.push_back(to_json(c));
            jo["cells"] = std::move(cells);
        }
        obstacles.push_back(std::move(jo));
    }
    return json{
        {"name", s.name},
        {"resolution_m", s.resolution_m},
        {"width_cells", s.width_cells},
        {"height_cells", s.height_cells},
        {"start_cell", to_json(s.start_cell)},
        {"goal_cell", to_json(s.goal_cell)},
        {"obstacles", std::move(obstacles)},
        {"planner",
         {{"w1", s.planner_params.w1},
          {"w2", s.planner_params.w2},
          {"gamma", s.planner_params.gamma},
          {"connectivity", s.planner_params.connectivity}}},
        {"fusion",
         {{"trust_n", s.fusion_params.trust_n},
          {"prior_alpha", s.fusion_params.prior_alpha},
          {"prior_beta", s.fusion_params.prior_beta}}},
    };
}

void validate(const Scenario& s) {
    if (!std::isfinite(s.resolution_m) || s.resolution_m <= 0.0) {
        throw ValidationError("resolution_m", "must be > 0");
    }
    if (s.width_cells < 2) throw ValidationError("width_cells", "must be >= 2");
    if (s.height_cells < 2) throw ValidationError("height_cells", "must be >= 2");
    auto inside = [&](Cell c) {
        return c.col >= 0 && c.row >= 0 && c.col < s.width_cells && c.row < s.height_cells;
    };
    if (!inside(s.start_cell)) {
        throw ValidationError("start_cell", cell_text(s.start_cell) + " outside the grid");
    }
    if (!inside(s.goal_cell)) {
        throw ValidationError("goal_cell", cell_text(s.goal_cell) + " outside the grid");
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
        const auto& o = s.obstacles[i];
        const std::string path = index_path("obstacles", i);
        if (o.id.empty()) throw ValidationError(path + ".id", "must not be empty");
        if (!ids.insert(o.id).second) {
            throw ValidationError(path + ".id", "duplicate obstacle id \"" + o.id + "\"");
        }
        if (!std::isfinite(o.base_gain) || o.base_gain < 0.0) {
            throw ValidationError(path + ".base_gain", "must be >= 0");
        }
        if (const auto* rect = std::get_if<RectFootprint>(&o.footprint)) {
            const auto& b = rect->bounds_m;
            for (double v : b) {
                if (!std::isfinite(v)) throw ValidationError(path + ".rect_m", "must be finite");
            }
            if (b[0] > b[2] || b[1] > b[3]) {
                throw ValidationError(path + ".rect_m", "expected x0 <= x1 and y0 <= y1");
            }
        } else {
            const auto& cells = std::get<CellFootprint>(o.footprint).cells;
            if (cells.empty()) throw ValidationError(path + ".cells", "must list at least one cell");
            for (std::size_t k = 0; k < cells.size(); ++k) {
                if (!inside(cells[k])) {
                    throw ValidationError(index_path(path + ".cells", k),
                                          cell_text(cells[k]) + " outside the grid");
                }
            }
        }
    }
    validate(s.planner_params);
    validate(s.fusion_params);
}

Scenario load_scenario(std::string_view source_text) {
    json j;
    try {
        j = json::parse(source_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario markup: ") + e.what());
    }
    return scenario_from_json(j);
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::string to_json_text(const Scenario& scenario) { return to_json(scenario).dump(2); }

SemanticGrid rasterize(const Scenario& s) {
    validate(s);
    SemanticGrid grid;
    grid.width = s.width_cells;
    grid.height = s.height_cells;
    grid.resolution_m = s.resolution_m;
    grid.cell_owner.assign(grid.cell_count(), kFreeCell);
    grid.obstacles.reserve(s.obstacles.size());

    for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
        const auto& spec = s.obstacles[i];
        Obstacle ob{spec.id, spec.family, {}, spec.base_gain};
        if (const auto* rect = std::get_if<RectFootprint>(&spec.footprint)) {
            const auto& b = rect->bounds_m;
            for (int row = 0; row < grid.height; ++row) {
                const double cy = (row + 0.5) * s.resolution_m;
                if (cy < b[1] || cy > b[3]) continue;
                for (int col = 0; col < grid.width; ++col) {
                    const double cx = (col + 0.5) * s.resolution_m;
                    if (cx >= b[0] && cx <= b[2]) ob.cells.push_back(Cell{col, row});
                }
            }
        } else {
            ob.cells = std::get<CellFootprint>(spec.footprint).cells;
        }
        if (ob.cells.empty()) {
            throw ValidationError(index_path("obstacles", i), "footprint covers no grid cell");
        }
        grid.obstacles.push_back(std::move(ob));
    }
    // Declaration order: a later obstacle overwrites earlier owners.
    for (std::size_t i = 0; i < grid.obstacles.size(); ++i) {
        for (Cell c : grid.obstacles[i].cells) grid.cell_owner[grid.index(c)] = static_cast<int>(i);
    }
    return grid;
}

json to_json(const SemanticGrid& grid) {
    json obstacles = json::array();
    for (const auto& o : grid.obstacles) {
        json cells = json::array();
        for (Cell c : o.cells) cells.push_back(to_json(c));
        obstacles.push_back(
            {{"id", o.id}, {"family", o.family}, {"base_gain", o.base_gain}, {"cells", std::move(cells)}});
    }
    return json{{"width", grid.width},
                {"height", grid.height},
                {"resolution_m", grid.resolution_m},
                {"cell_owner", grid.cell_owner},
                {"obstacles", std::move(obstacles)}};
}

std::string to_json_text(const SemanticGrid& grid) { return to_json(grid).dump(); }

}  // namespace semcost
