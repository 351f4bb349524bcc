#include "semcost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace semcost {

PathLength path_length(std::span<const Cell> path, double resolution_m) {
    PathLength len;
    for (std::size_t i = 1; i < path.size(); ++i) {
        len.cells += std::hypot(double(path[i].col - path[i - 1].col), double(path[i].row - path[i - 1].row));
    }
    len.meters = len.cells * resolution_m;
    return len;
}

std::optional<ObstacleDistances> obstacle_distances(std::span<const Cell> path, const ScalarField& global_edf,
                                                    double resolution_m) {
    if (path.empty()) return std::nullopt;
    double lo = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (Cell c : path) {
        const double d = global_edf[c];
        if (std::isinf(d)) return std::nullopt;
        lo = std::min(lo, d);
        sum += d;
    }
    return ObstacleDistances{lo * resolution_m, sum / double(path.size()) * resolution_m};
}

PathMetrics compute_metrics(std::span<const Cell> path, const ScalarField& global_edf, double resolution_m) {
    PathMetrics m;
    const PathLength len = path_length(path, resolution_m);
    m.length_cells = len.cells;
    m.length_m = len.meters;
    if (auto d = obstacle_distances(path, global_edf, resolution_m)) {
        m.min_obstacle_dist_m = d->min_m;
        m.avg_obstacle_dist_m = d->avg_m;
    }
    return m;
}

namespace {

std::string fixed(std::optional<double> v, int digits) {
    if (!v) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << *v;
    return os.str();
}

}  // namespace

std::string render_table(const ComparisonTable& table) {
    std::vector<std::string> row_labels{"Length (cells)", "Length (m)", "Min. obstacle dist. (m)",
                                        "Avg. obstacle dist. (m)"};
    for (const auto& name : table.obstacle_labels) row_labels.push_back(name + " (post.)");

    // cells[row][col]
    std::vector<std::vector<std::string>> cells(row_labels.size());
    for (const auto& col : table.columns) {
        const auto& m = col.metrics;
        cells[0].push_back(m ? fixed(m->length_cells, 3) : "ERR");
        cells[1].push_back(m ? fixed(m->length_m, 3) : "ERR");
        cells[2].push_back(m ? fixed(m->min_obstacle_dist_m, 3) : "ERR");
        cells[3].push_back(m ? fixed(m->avg_obstacle_dist_m, 3) : "ERR");
        for (std::size_t k = 0; k < table.obstacle_labels.size(); ++k) {
            cells[4 + k].push_back(k < col.posteriors.size() ? fixed(col.posteriors[k], 2) : "-");
        }
    }

    std::size_t label_w = std::string("Prompt").size();
    for (const auto& l : row_labels) label_w = std::max(label_w, l.size());
    std::vector<std::size_t> col_w;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::size_t w = table.columns[c].label.size();
        for (const auto& row : cells) w = std::max(w, row[c].size());
        col_w.push_back(w);
    }

    std::ostringstream os;
    auto rule = [&] {
        std::size_t total = label_w;
        for (auto w : col_w) total += 3 + w;
        os << std::string(total, '-') << "\n";
    };
    os << std::left << std::setw(int(label_w)) << "Prompt";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        os << " | " << std::right << std::setw(int(col_w[c])) << table.columns[c].label;
    }
    os << "\n";
    rule();
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        if (r == 4) rule();
        os << std::left << std::setw(int(label_w)) << row_labels[r];
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            os << " | " << std::right << std::setw(int(col_w[c])) << cells[r][c];
        }
        os << "\n";
    }
    for (const auto& col : table.columns) {
        if (!col.error.empty()) os << "! " << col.label << ": " << col.error << "\n";
    }
    return os.str();
}

}  // namespace semcost
