#include "semcost/planner.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace semcost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNoParent = -1;

struct Step {
    int dcol;
    int drow;
    double length;
};

// Orthogonal moves first; diagonals only under 8-connectivity.
constexpr std::array<Step, 8> kSteps{{
    {1, 0, 1.0},
    {-1, 0, 1.0},
    {0, 1, 1.0},
    {0, -1, 1.0},
    {1, 1, 1.4142135623730951},
    {-1, 1, 1.4142135623730951},
    {1, -1, 1.4142135623730951},
    {-1, -1, 1.4142135623730951},
}};

struct QueueEntry {
    double key;
    double g;
    std::size_t cell;
};

// Min-heap on key; ties go to the larger g, then to the lower row-major index.
struct EntryAfter {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const noexcept {
        if (a.key != b.key) return a.key > b.key;
        if (a.g != b.g) return a.g < b.g;
        return a.cell > b.cell;
    }
};

using OpenList = std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryAfter>;

struct CellState {
    double g = kInf;
    int parent = kNoParent;
    bool closed_anchor = false;
    bool closed_informed = false;
    bool expanded = false;  // expanded at its current g
};

class MultiHeuristicSearch {
public:
    MultiHeuristicSearch(const SemanticGrid& grid, const ScalarField& potential, Cell goal,
                         const PlannerParams& params)
        : grid_(grid), potential_(potential), goal_(goal), params_(params), cells_(grid.cell_count()) {}

    double run(Cell start) {
        const std::size_t s = grid_.index(start);
        const std::size_t t = grid_.index(goal_);
        cells_[s].g = 0.0;
        push(s);

        while (true) {
            drop_stale(anchor_, QueueKind::Anchor);
            drop_stale(informed_, QueueKind::Informed);
            if (anchor_.empty()) break;

            const double anchor_key = anchor_.top().key;
            const bool use_informed = !informed_.empty() && informed_.top().key <= params_.w2 * anchor_key;
            OpenList& queue = use_informed ? informed_ : anchor_;
            if (cells_[t].g <= queue.top().key) break;

            const std::size_t u = queue.top().cell;
            queue.pop();
            CellState& us = cells_[u];
            us.expanded = true;
            if (use_informed) {
                us.closed_informed = true;
                ++stats_.informed_count;
            } else {
                us.closed_anchor = true;
                ++stats_.anchor_count;
            }
            expand(u);
        }
        return cells_[t].g;
    }

    std::vector<std::optional<Cell>> parents() const {
        std::vector<std::optional<Cell>> out(cells_.size());
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            if (cells_[i].parent != kNoParent) out[i] = grid_.cell_at(static_cast<std::size_t>(cells_[i].parent));
        }
        return out;
    }

    const ExpansionStats& stats() const noexcept { return stats_; }

private:
    SearchNode node(std::size_t idx) const {
        const Cell c = grid_.cell_at(idx);
        return SearchNode{c, cells_[idx].g, std::nullopt,
                          std::hypot(double(c.col - goal_.col), double(c.row - goal_.row)),
                          potential_.values[idx]};
    }

    void push(std::size_t idx) {
        const CellState& cs = cells_[idx];
        const SearchNode n = node(idx);
        if (!cs.closed_anchor) anchor_.push({key(n, QueueKind::Anchor, params_), cs.g, idx});
        if (!cs.closed_informed) informed_.push({key(n, QueueKind::Informed, params_), cs.g, idx});
    }

    void drop_stale(OpenList& queue, QueueKind kind) {
        while (!queue.empty()) {
            const QueueEntry& e = queue.top();
            const CellState& cs = cells_[e.cell];
            const bool closed = kind == QueueKind::Anchor ? cs.closed_anchor : cs.closed_informed;
            if (e.g == cs.g && !cs.expanded && !closed) return;
            queue.pop();
        }
    }

    void expand(std::size_t u) {
        const Cell uc = grid_.cell_at(u);
        const double gu = cells_[u].g;
        const int steps = params_.connectivity == 8 ? 8 : 4;
        for (int k = 0; k < steps; ++k) {
            const Step& st = kSteps[k];
            const Cell vc{uc.col + st.dcol, uc.row + st.drow};
            if (!grid_.in_bounds(vc) || !grid_.is_free(vc)) continue;
            // No squeezing diagonally between two blocked cells.
            if (st.dcol != 0 && st.drow != 0 && !grid_.is_free(Cell{uc.col + st.dcol, uc.row}) &&
                !grid_.is_free(Cell{uc.col, uc.row + st.drow})) {
                continue;
            }
            const std::size_t v = grid_.index(vc);
            const double candidate = gu + st.length + params_.gamma * potential_.values[v];
            CellState& vs = cells_[v];
            if (candidate < vs.g) {
                vs.g = candidate;
                vs.parent = static_cast<int>(u);
                vs.expanded = false;
                push(v);
            }
        }
    }

    const SemanticGrid& grid_;
    const ScalarField& potential_;
    Cell goal_;
    PlannerParams params_;
    std::vector<CellState> cells_;
    OpenList anchor_;
    OpenList informed_;
    ExpansionStats stats_;
};

std::string describe(Cell c) {
    std::ostringstream os;
    os << "(" << c.col << ", " << c.row << ")";
    return os.str();
}

}  // namespace

void validate(const PlannerParams& p) {
    if (!std::isfinite(p.w1) || p.w1 <= 0.0) throw ValidationError("planner.w1", "must be > 0");
    if (!std::isfinite(p.w2) || p.w2 < 1.0) throw ValidationError("planner.w2", "must be >= 1");
    if (!std::isfinite(p.gamma) || p.gamma < 0.0) throw ValidationError("planner.gamma", "must be >= 0");
    if (p.connectivity != 4 && p.connectivity != 8) {
        throw ValidationError("planner.connectivity", "must be 4 or 8");
    }
}

double key(const SearchNode& node, QueueKind queue, const PlannerParams& params) noexcept {
    return node.g + params.w1 * (queue == QueueKind::Anchor ? node.h0 : node.h1);
}

std::vector<Cell> reconstruct_path(std::span<const std::optional<Cell>> parents, int width, Cell goal) {
    std::vector<Cell> path{goal};
    Cell cur = goal;
    const auto index = [width](Cell c) {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.col);
    };
    while (true) {
        const std::size_t idx = index(cur);
        if (idx >= parents.size()) throw Error("parent chain leaves the grid");
        if (!parents[idx]) break;
        cur = *parents[idx];
        path.push_back(cur);
        if (path.size() > parents.size()) throw Error("parent chain contains a cycle");
    }
    return {path.rbegin(), path.rend()};
}

double path_cost(const ScalarField& potential, std::span<const Cell> path, double gamma) {
    double cost = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const Cell a = path[i - 1];
        const Cell b = path[i];
        const bool diagonal = a.col != b.col && a.row != b.row;
        cost += (diagonal ? kSteps[4].length : 1.0) + gamma * potential[b];
    }
    return cost;
}

PlanResult plan(const SemanticGrid& grid, const ScalarField& potential, Cell start, Cell goal,
                const PlannerParams& params) {
    try {
        validate(params);
    } catch (const ValidationError& e) {
        throw PreconditionError(e.what());
    }
    if (potential.width != grid.width || potential.height != grid.height) {
        throw PreconditionError("potential field dimensions do not match the grid");
    }
    for (const auto& [cell, name] : {std::pair{start, "start"}, std::pair{goal, "goal"}}) {
        if (!grid.in_bounds(cell)) throw PreconditionError(std::string(name) + " " + describe(cell) + " outside the grid");
        if (!grid.is_free(cell)) {
            throw PreconditionError(std::string(name) + " " + describe(cell) + " is occupied by obstacle \"" +
                                    grid.obstacles[static_cast<std::size_t>(grid.owner(cell))].id + "\"");
        }
    }

    PlanResult result;
    if (start == goal) {
        result.path = {start};
        return result;
    }

    MultiHeuristicSearch search(grid, potential, goal, params);
    const double cost = search.run(start);
    result.expansions = search.stats();
    if (!std::isfinite(cost)) {
        std::ostringstream msg;
        msg << "no path from " << describe(start) << " to " << describe(goal) << " (" << result.expansions.anchor_count
            << " anchor / " << result.expansions.informed_count << " informed expansions)";
        throw NoPathError(msg.str(), result.expansions);
    }
    const auto parents = search.parents();
    result.path = reconstruct_path(parents, grid.width, goal);
    // A cell whose g dropped after its successors were generated leaves the
    // parent chain cheaper than g(goal); report what the path really costs.
    result.total_cost = path_cost(potential, result.path, params.gamma);
    return result;
}

}  // namespace semcost
