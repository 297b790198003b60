#pragma once

#include <vector>

#include "loopanomaly/conformal_field.hpp"
#include "loopanomaly/geometry.hpp"

namespace la {

// Builds C^1 fields with a prescribed constant Laplacian on each cell of an
// m x m grid, vanishing on the domain boundary.  The construction
// superposes corner functions with quadrant-indicator Laplacians and then
// subtracts the harmonic extension of the resulting boundary values.

struct SquareSubdivisionSpec {
    Box domain;
    int cells = 1;                  // m x m subdivision
    std::vector<double> targets;    // row-major cell Laplacians, cells*cells entries
    int nodes_per_cell = 64;        // output grid resolution per cell side
    double solver_tolerance = 1e-10;
    int solver_max_sweeps = 200000;
};

// Base corner function: equals Re[z^2 log(z^2)]/pi + |z|^2/2 on the sector
// |arg z| < pi/4 and extends by f(iz) = -f(z).  C^1, zero on the diagonals,
// Laplacian +2 on the left/right sectors and -2 on the top/bottom ones.
double subdivision_base(Vec2 z);

// Linear combination of subdivision_base(e^{i pi/4} z) and the ramps
// [max(Re(az),0)]^2 whose Laplacian is 1 on the first quadrant {x>0,y>0}
// and 0 on the other three.
double quadrant_corner_fn(Vec2 z);

// Laplacian = 1 inside the cell, 0 outside (inclusion-exclusion of the four
// corner functions).
double cell_bump_fn(Vec2 z, const Box& cell);

// Superposition of the target Laplacians before the harmonic correction.
double subdivision_superposition(const SquareSubdivisionSpec& spec, Vec2 z);

// Full construction.  Throws std::runtime_error with the residual if the
// harmonic solve does not reach the requested tolerance.
GridField build_square_subdivision(const SquareSubdivisionSpec& spec);

// 5-point stencil Laplacian of grid node values at the given stride.
double stencil_laplacian(const GridField& f, int i, int j, int stride);

struct StencilCheckResult {
    double max_error = 0.0;       // worst |stencil - target| over checked nodes
    double stencil_spacing = 0.0; // h used by the stencil
    int checked_nodes = 0;
};

// Applies the stencil at stride over every cell interior, excluding disks
// of radius 4h around cell corners and a 2h margin along cell edges where
// the field is not C^2.
StencilCheckResult stencil_check(const GridField& f, const SquareSubdivisionSpec& spec,
                                 int stride);

// Max mismatch of one-sided normal derivatives across interior cell edges,
// sampled at grid nodes away from corners.  Halves with the grid spacing
// when the field is C^1.
double edge_gradient_mismatch(const GridField& f, const SquareSubdivisionSpec& spec);

} // namespace la
