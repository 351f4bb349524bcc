#include "semcost/distance_field.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "semcost/error.hpp"

namespace semcost {

namespace {

// Squared distances stay exact in double: coordinates are bounded by the grid
// size, so every intermediate is an integer well below 2^53.
constexpr double kInf = std::numeric_limits<double>::infinity();

// Abscissa where the parabolas rooted at p and q intersect.
double intersection(std::span<const double> f, int p, int q) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
}

// One-dimensional lower envelope of parabolas (Felzenszwalb & Huttenlocher).
// `f` holds squared distances along a line; result written to `d`.
void transform_1d(std::span<const double> f, std::span<double> d, std::vector<int>& v,
                  std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s = intersection(f, v[k], q);
        while (s <= z[k]) {  // z[0] is -inf, so k never drops below 0
            --k;
            s = intersection(f, v[k], q);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double dq = double(q - v[j]);
        d[q] = dq * dq + f[v[j]];
    }
}

}  // namespace

ScalarField euclidean_distance_transform(std::span<const unsigned char> mask, int width, int height) {
    if (width <= 0 || height <= 0 || mask.size() != std::size_t(width) * std::size_t(height)) {
        throw PreconditionError("mask size does not match grid dimensions");
    }
    ScalarField field(width, height, kInf);
    auto& sq = field.values;
    for (std::size_t i = 0; i < mask.size(); ++i) sq[i] = mask[i] ? 0.0 : kInf;

    const int longest = std::max(width, height);
    std::vector<double> line(longest), out(longest);
    std::vector<int> v(longest);
    std::vector<double> z(longest + 1);

    // Columns first, then rows.
    for (int col = 0; col < width; ++col) {
        for (int row = 0; row < height; ++row) line[row] = sq[std::size_t(row) * width + col];
        transform_1d(std::span(line.data(), height), std::span(out.data(), height), v, z);
        for (int row = 0; row < height; ++row) sq[std::size_t(row) * width + col] = out[row];
    }
    for (int row = 0; row < height; ++row) {
        std::span<double> r(sq.data() + std::size_t(row) * width, width);
        std::copy(r.begin(), r.end(), line.begin());
        transform_1d(std::span(line.data(), width), r, v, z);
    }
    for (double& d : sq) d = std::sqrt(d);  // sqrt(inf) == inf
    return field;
}

ScalarField per_obstacle_edf(const SemanticGrid& grid, std::size_t obstacle_index) {
    if (obstacle_index >= grid.obstacles.size()) {
        throw PreconditionError("obstacle index out of range");
    }
    const auto& ob = grid.obstacles[obstacle_index];
    if (ob.cells.empty()) {
        throw PreconditionError("obstacle \"" + ob.id + "\" has no cells");
    }
    std::vector<unsigned char> mask(grid.cell_count(), 0);
    for (Cell c : ob.cells) {
        if (!grid.in_bounds(c)) throw PreconditionError("obstacle \"" + ob.id + "\" has a cell outside the grid");
        mask[grid.index(c)] = 1;
    }
    return euclidean_distance_transform(mask, grid.width, grid.height);
}

std::vector<ScalarField> per_obstacle_edfs(const SemanticGrid& grid) {
    const std::size_t n = grid.obstacles.size();
    std::vector<ScalarField> fields(n);
    const std::size_t workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < n; i += workers) fields[i] = per_obstacle_edf(grid, i);
        }));
    }
    for (auto& job : jobs) job.get();
    return fields;
}

ScalarField global_edf(std::span<const ScalarField> per_obstacle, int width, int height) {
    ScalarField field(width, height, kUnboundedDistance);
    for (const auto& f : per_obstacle) {
        if (f.width != width || f.height != height) {
            throw PreconditionError("distance field dimensions do not match the grid");
        }
        for (std::size_t i = 0; i < field.values.size(); ++i) {
            field.values[i] = std::min(field.values[i], f.values[i]);
        }
    }
    return field;
}

ScalarField global_edf(const SemanticGrid& grid) {
    const auto fields = per_obstacle_edfs(grid);
    return global_edf(fields, grid.width, grid.height);
}

bool is_unbounded(const ScalarField& field) noexcept {
    return std::any_of(field.values.begin(), field.values.end(), [](double v) { return std::isinf(v); });
}

}  // namespace semcost
