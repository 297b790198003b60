#include <doctest.h>

#include <cmath>

#include "loopanomaly/rng.hpp"
#include "loopanomaly/special.hpp"
#include "loopanomaly/subdivision.hpp"

using namespace la;

namespace {

double fd_laplacian(double (*f)(Vec2), Vec2 p, double h) {
    return (f({p.x + h, p.y}) + f({p.x - h, p.y}) + f({p.x, p.y + h}) + f({p.x, p.y - h}) -
            4.0 * f(p)) /
           (h * h);
}

} // namespace

TEST_CASE("base function symmetry f(iz) = -f(z)") {
    Rng rng(900);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 z{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        const Vec2 iz{-z.y, z.x};
        CHECK(std::abs(subdivision_base(iz) + subdivision_base(z)) < 1e-10);
    }
    // zero on the diagonals
    for (double r : {0.3, 1.0, 2.5}) {
        CHECK(std::abs(subdivision_base({r, r})) < 1e-12);
        CHECK(std::abs(subdivision_base({-r, r})) < 1e-12);
    }
    CHECK(subdivision_base({0, 0}) == 0.0);
}

TEST_CASE("base function has laplacian +-2 on the diagonal sectors") {
    Rng rng(901);
    for (int i = 0; i < 200; ++i) {
        const double r = rng.uniform(0.3, 1.5);
        const double ang = rng.uniform(-kPi / 4 + 0.15, kPi / 4 - 0.15);
        const Vec2 right{r * std::cos(ang), r * std::sin(ang)};
        CHECK(fd_laplacian(subdivision_base, right, 1e-4) == doctest::Approx(2.0).epsilon(5e-4));
        const Vec2 top{-right.y, right.x};
        CHECK(fd_laplacian(subdivision_base, top, 1e-4) == doctest::Approx(-2.0).epsilon(5e-4));
    }
}

TEST_CASE("corner function has quadrant-indicator laplacian") {
    Rng rng(902);
    for (int i = 0; i < 150; ++i) {
        const double x = rng.uniform(0.15, 1.2), y = rng.uniform(0.15, 1.2);
        CHECK(fd_laplacian(quadrant_corner_fn, {x, y}, 1e-4) ==
              doctest::Approx(1.0).epsilon(2e-3));
        CHECK(fd_laplacian(quadrant_corner_fn, {-x, y}, 1e-4) ==
              doctest::Approx(0.0).scale(1.0).epsilon(2e-3));
        CHECK(fd_laplacian(quadrant_corner_fn, {-x, -y}, 1e-4) ==
              doctest::Approx(0.0).scale(1.0).epsilon(2e-3));
        CHECK(fd_laplacian(quadrant_corner_fn, {x, -y}, 1e-4) ==
              doctest::Approx(0.0).scale(1.0).epsilon(2e-3));
    }
}

TEST_CASE("zero targets give the zero field") {
    SquareSubdivisionSpec spec;
    spec.domain = {0, 0, 1, 1};
    spec.cells = 2;
    spec.targets = {0, 0, 0, 0};
    spec.nodes_per_cell = 16;
    const GridField f = build_square_subdivision(spec);
    CHECK(f.sup_abs() < 1e-12);
}

TEST_CASE("single cell with target 1") {
    SquareSubdivisionSpec spec;
    spec.domain = {0, 0, 1, 1};
    spec.cells = 2;
    spec.targets = {1.0, 0.0, 0.0, 0.0};
    spec.nodes_per_cell = 48;
    const GridField f = build_square_subdivision(spec);

    // vanishes on the domain boundary
    for (int i = 0; i < f.nx(); ++i) {
        CHECK(f.node_value(i, 0) == 0.0);
        CHECK(f.node_value(0, i) == 0.0);
    }

    const StencilCheckResult check = stencil_check(f, spec, 8);
    CHECK(check.checked_nodes > 20);
    const double h = check.stencil_spacing;
    CHECK(check.max_error <= 1.0 * h * std::log(1.0 / h));
}

TEST_CASE("mixed targets and C1 halving across edges") {
    SquareSubdivisionSpec spec;
    spec.domain = {0, 0, 1, 1};
    spec.cells = 2;
    spec.targets = {1.0, -0.5, 2.0, 0.25};

    spec.nodes_per_cell = 32;
    const GridField coarse = build_square_subdivision(spec);
    const double mis_coarse = edge_gradient_mismatch(coarse, spec);

    spec.nodes_per_cell = 64;
    const GridField fine = build_square_subdivision(spec);
    const double mis_fine = edge_gradient_mismatch(fine, spec);

    CHECK(mis_fine <= 0.65 * mis_coarse); // C1: mismatch is O(grid spacing)

    const StencilCheckResult check = stencil_check(fine, spec, 8);
    const double h = check.stencil_spacing;
    CHECK(check.max_error <= 1.0 * h * std::log(1.0 / h));
}

TEST_CASE("invalid specs are rejected") {
    SquareSubdivisionSpec spec;
    spec.domain = {0, 0, 1, 1};
    spec.cells = 2;
    spec.targets = {1.0};
    CHECK_THROWS_AS((void)build_square_subdivision(spec), std::invalid_argument);
    spec.targets = {1.0, 0.0, 0.0, std::nan("")};
    CHECK_THROWS_AS((void)build_square_subdivision(spec), std::invalid_argument);
}
