#include "loopanomaly/subdivision.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "loopanomaly/special.hpp"

namespace la {

double subdivision_base(Vec2 z) {
    const double r2 = z.norm2();
    if (r2 == 0.0) return 0.0;
    // fold into |arg| <= pi/4 with w = z * i^{-k}; then f(z) = (-1)^k f(w)
    Vec2 w = z;
    double sign = 1.0;
    int guard = 0;
    while (!(w.x > 0.0 && std::abs(w.y) <= w.x) && guard++ < 4) {
        w = Vec2{w.y, -w.x}; // multiply by -i
        sign = -sign;
    }
    // principal branch is safe here: arg(w^2) lies in [-pi/2, pi/2]
    const double re2 = w.x * w.x - w.y * w.y;
    const double im2 = 2.0 * w.x * w.y;
    const double val = (re2 * std::log(r2) - im2 * std::atan2(im2, re2)) / kPi + 0.5 * r2;
    return sign * val;
}

double quadrant_corner_fn(Vec2 z) {
    // rotate by pi/4 so the base sectors line up with the quadrants
    const double c = 0.70710678118654752440;
    const Vec2 w{c * (z.x - z.y), c * (z.x + z.y)};
    const double f1 = subdivision_base(w);
    const double rx = std::max(z.x, 0.0);
    const double ry_pos = std::max(z.y, 0.0);
    const double ry_neg = std::max(-z.y, 0.0);
    // Laplacians: f1 -> (-2,2,-2,2) on quadrants I..IV, ramps -> 2 on half
    // planes; this combination has Laplacian 1 on quadrant I and 0 elsewhere
    return -0.125 * f1 + 0.25 * rx * rx - 0.125 * ry_neg * ry_neg + 0.125 * ry_pos * ry_pos;
}

double cell_bump_fn(Vec2 z, const Box& cell) {
    return quadrant_corner_fn({z.x - cell.x0, z.y - cell.y0}) -
           quadrant_corner_fn({z.x - cell.x1, z.y - cell.y0}) -
           quadrant_corner_fn({z.x - cell.x0, z.y - cell.y1}) +
           quadrant_corner_fn({z.x - cell.x1, z.y - cell.y1});
}

namespace {

Box cell_box(const SquareSubdivisionSpec& spec, int ci, int cj) {
    const double wx = spec.domain.width() / spec.cells;
    const double wy = spec.domain.height() / spec.cells;
    return {spec.domain.x0 + ci * wx, spec.domain.y0 + cj * wy, spec.domain.x0 + (ci + 1) * wx,
            spec.domain.y0 + (cj + 1) * wy};
}

} // namespace

double subdivision_superposition(const SquareSubdivisionSpec& spec, Vec2 z) {
    double s = 0.0;
    for (int cj = 0; cj < spec.cells; ++cj) {
        for (int ci = 0; ci < spec.cells; ++ci) {
            const double target = spec.targets[static_cast<std::size_t>(cj) * spec.cells + ci];
            if (target == 0.0) continue;
            s += target * cell_bump_fn(z, cell_box(spec, ci, cj));
        }
    }
    return s;
}

GridField build_square_subdivision(const SquareSubdivisionSpec& spec) {
    if (spec.cells < 1) throw std::invalid_argument("build_square_subdivision: cells must be >= 1");
    if (spec.targets.size() != static_cast<std::size_t>(spec.cells) * spec.cells)
        throw std::invalid_argument("build_square_subdivision: target count mismatch");
    for (double t : spec.targets)
        if (!std::isfinite(t))
            throw std::invalid_argument("build_square_subdivision: non-finite target");

    const int m = spec.cells * spec.nodes_per_cell; // cells per grid side
    const int nodes = m + 1;
    const double hx = spec.domain.width() / m;
    const double hy = spec.domain.height() / m;

    std::vector<double> phi(static_cast<std::size_t>(nodes) * nodes);
    double scale = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const double y = spec.domain.y0 + j * hy;
        for (int i = 0; i < nodes; ++i) {
            const double x = spec.domain.x0 + i * hx;
            const double v = subdivision_superposition(spec, {x, y});
            phi[static_cast<std::size_t>(j) * nodes + i] = v;
            scale = std::max(scale, std::abs(v));
        }
    }
    if (scale == 0.0) scale = 1.0;

    // harmonic extension of the boundary values by red-black SOR
    std::vector<double> h(static_cast<std::size_t>(nodes) * nodes, 0.0);
    auto at = [&](std::vector<double>& v, int i, int j) -> double& {
        return v[static_cast<std::size_t>(j) * nodes + i];
    };
    for (int i = 0; i < nodes; ++i) {
        at(h, i, 0) = phi[static_cast<std::size_t>(0) * nodes + i];
        at(h, i, nodes - 1) = phi[static_cast<std::size_t>(nodes - 1) * nodes + i];
    }
    for (int j = 0; j < nodes; ++j) {
        at(h, 0, j) = phi[static_cast<std::size_t>(j) * nodes + 0];
        at(h, nodes - 1, j) = phi[static_cast<std::size_t>(j) * nodes + nodes - 1];
    }
    const double omega = 2.0 / (1.0 + std::sin(kPi / m));
    const double rx = 1.0 / (hx * hx), ry = 1.0 / (hy * hy);
    const double diag = 2.0 * (rx + ry);
    double residual = 0.0;
    int sweep = 0;
    for (; sweep < spec.solver_max_sweeps; ++sweep) {
        for (int color = 0; color < 2; ++color) {
            for (int j = 1; j < nodes - 1; ++j) {
                for (int i = 1 + ((j + color) & 1); i < nodes - 1; i += 2) {
                    const double nb = rx * (at(h, i - 1, j) + at(h, i + 1, j)) +
                                      ry * (at(h, i, j - 1) + at(h, i, j + 1));
                    const double hnew = nb / diag;
                    at(h, i, j) += omega * (hnew - at(h, i, j));
                }
            }
        }
        if (sweep % 16 == 15) {
            residual = 0.0;
            for (int j = 1; j < nodes - 1; ++j)
                for (int i = 1; i < nodes - 1; ++i) {
                    const double r = rx * (at(h, i - 1, j) + at(h, i + 1, j)) +
                                     ry * (at(h, i, j - 1) + at(h, i, j + 1)) - diag * at(h, i, j);
                    residual = std::max(residual, std::abs(r) / diag);
                }
            if (residual <= spec.solver_tolerance * scale) break;
        }
    }
    if (sweep >= spec.solver_max_sweeps)
        throw std::runtime_error("build_square_subdivision: harmonic solve stalled, residual " +
                                 std::to_string(residual));

    std::vector<double> out(static_cast<std::size_t>(nodes) * nodes);
    for (int j = 0; j < nodes; ++j)
        for (int i = 0; i < nodes; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * nodes + i;
            const bool boundary = i == 0 || j == 0 || i == nodes - 1 || j == nodes - 1;
            out[idx] = boundary ? 0.0 : phi[idx] - h[idx];
        }
    return GridField(spec.domain, nodes, nodes, std::move(out));
}

double stencil_laplacian(const GridField& f, int i, int j, int stride) {
    const double hx = f.cell_size_x() * stride;
    const double hy = f.cell_size_y() * stride;
    const double c = f.node_value(i, j);
    return (f.node_value(i - stride, j) + f.node_value(i + stride, j) - 2.0 * c) / (hx * hx) +
           (f.node_value(i, j - stride) + f.node_value(i, j + stride) - 2.0 * c) / (hy * hy);
}

StencilCheckResult stencil_check(const GridField& f, const SquareSubdivisionSpec& spec,
                                 int stride) {
    StencilCheckResult res;
    const double h = f.cell_size_x() * stride;
    res.stencil_spacing = h;
    const double corner_excl = 4.0 * h;
    const double edge_excl = 2.0 * h;
    const int nodes = f.nx();
    const double cell_w = spec.domain.width() / spec.cells;
    const double cell_h = spec.domain.height() / spec.cells;
    for (int j = stride; j < nodes - stride; ++j) {
        for (int i = stride; i < nodes - stride; ++i) {
            const Vec2 p = f.node_position(i, j);
            // locate the cell and the distances to its edges and corners
            int ci = static_cast<int>((p.x - spec.domain.x0) / cell_w);
            int cj = static_cast<int>((p.y - spec.domain.y0) / cell_h);
            ci = std::min(ci, spec.cells - 1);
            cj = std::min(cj, spec.cells - 1);
            const Box cell = cell_box(spec, ci, cj);
            const double dx = std::min(p.x - cell.x0, cell.x1 - p.x);
            const double dy = std::min(p.y - cell.y0, cell.y1 - p.y);
            if (dx < edge_excl || dy < edge_excl) continue;
            bool near_corner = false;
            for (int cx = 0; cx < 2 && !near_corner; ++cx)
                for (int cy = 0; cy < 2; ++cy) {
                    const Vec2 corner{cx ? cell.x1 : cell.x0, cy ? cell.y1 : cell.y0};
                    if ((p - corner).norm() < corner_excl) {
                        near_corner = true;
                        break;
                    }
                }
            if (near_corner) continue;
            const double target = spec.targets[static_cast<std::size_t>(cj) * spec.cells + ci];
            const double err = std::abs(stencil_laplacian(f, i, j, stride) - target);
            res.max_error = std::max(res.max_error, err);
            ++res.checked_nodes;
        }
    }
    return res;
}

double edge_gradient_mismatch(const GridField& f, const SquareSubdivisionSpec& spec) {
    const int nodes = f.nx();
    const int per_cell = (nodes - 1) / spec.cells;
    const double hx = f.cell_size_x(), hy = f.cell_size_y();
    const int corner_skip = std::max(4, per_cell / 8);
    double worst = 0.0;
    // vertical interior edges: compare one-sided x-derivatives
    for (int e = 1; e < spec.cells; ++e) {
        const int i = e * per_cell;
        for (int j = corner_skip; j < nodes - corner_skip; ++j) {
            if ((j % per_cell) < corner_skip || per_cell - (j % per_cell) < corner_skip) continue;
            const double dplus = (f.node_value(i + 1, j) - f.node_value(i, j)) / hx;
            const double dminus = (f.node_value(i, j) - f.node_value(i - 1, j)) / hx;
            worst = std::max(worst, std::abs(dplus - dminus));
        }
    }
    // horizontal interior edges
    for (int e = 1; e < spec.cells; ++e) {
        const int j = e * per_cell;
        for (int i = corner_skip; i < nodes - corner_skip; ++i) {
            if ((i % per_cell) < corner_skip || per_cell - (i % per_cell) < corner_skip) continue;
            const double dplus = (f.node_value(i, j + 1) - f.node_value(i, j)) / hy;
            const double dminus = (f.node_value(i, j) - f.node_value(i, j - 1)) / hy;
            worst = std::max(worst, std::abs(dplus - dminus));
        }
    }
    return worst;
}

} // namespace la
