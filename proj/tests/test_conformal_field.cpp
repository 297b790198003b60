#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "loopanomaly/conformal_field.hpp"
#include "loopanomaly/special.hpp"
#include "oracles.hpp"

using namespace la;

namespace {

// f + h as a field; test-side helper for the two-route energy identity
class FieldSum final : public ConformalField {
  public:
    FieldSum(FieldPtr a, FieldPtr b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(Vec2 p) const override { return a_->eval(p) + b_->eval(p); }
    Vec2 gradient(Vec2 p) const override { return a_->gradient(p) + b_->gradient(p); }
    double laplacian(Vec2 p) const override { return a_->laplacian(p) + b_->laplacian(p); }
    double sup_abs() const override { return a_->sup_abs() + b_->sup_abs(); }
    double lipschitz_bound() const override {
        return a_->lipschitz_bound() + b_->lipschitz_bound();
    }
    Box support() const override {
        const Box u = a_->support(), v = b_->support();
        return {std::min(u.x0, v.x0), std::min(u.y0, v.y0), std::max(u.x1, v.x1),
                std::max(u.y1, v.y1)};
    }
    std::string describe() const override { return "sum"; }

  private:
    FieldPtr a_, b_;
};

} // namespace

TEST_CASE("eval: compact support and node values") {
    const GridField grid = GridField::constant(0.7, Box{-1, -1, 1, 1}, 5);
    CHECK(grid.eval({5.0, 5.0}) == 0.0);
    CHECK(grid.eval({-1.0, 0.5}) == doctest::Approx(0.7));
    CHECK(grid.eval({0.0, 0.0}) == doctest::Approx(0.7));
    CHECK(grid.eval({0.25, -0.3}) == doctest::Approx(0.7)); // interpolation of constant

    const BumpField bump({0, 0}, 1.0, 1.0, BumpField::Profile::cone2);
    CHECK(bump.eval({2.0, 0.0}) == 0.0);
    CHECK(bump.eval({0, 0}) == doctest::Approx(1.0));

    // tapered sine away from the boundary margin equals j^-1 sin(j x1)
    const double side = kTwoPi;
    const TaperedSineField sine(8, Box{0, 0, side, side});
    const Vec2 p{side / 2 + 0.1, side / 2};
    CHECK(sine.eval(p) == doctest::Approx(std::sin(8 * p.x) / 8.0).epsilon(1e-12));
}

TEST_CASE("gradients") {
    const GridField grid = GridField::constant(2.0, Box{-1, -1, 1, 1}, 9);
    const Vec2 g = grid.gradient({0.2, 0.1});
    CHECK(std::abs(g.x) < 1e-12);
    CHECK(std::abs(g.y) < 1e-12);

    const double side = kTwoPi;
    const TaperedSineField sine(6, Box{0, 0, side, side}, 1.0);
    const Vec2 p{side / 2 + 0.123, side / 2 - 0.05};
    const Vec2 gs = sine.gradient(p);
    CHECK(gs.x == doctest::Approx(std::cos(6 * p.x)).epsilon(1e-12));
    CHECK(gs.y == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    // analytic vs finite-difference on the smooth bump
    const BumpField bump({0.1, -0.2}, 1.2, 0.8, BumpField::Profile::smooth3);
    for (Vec2 q : {Vec2{0.3, 0.1}, Vec2{-0.4, 0.2}, Vec2{0.0, -0.5}}) {
        const Vec2 ga = bump.gradient(q);
        const double h = 1e-6;
        const double fx = (bump.eval({q.x + h, q.y}) - bump.eval({q.x - h, q.y})) / (2 * h);
        const double fy = (bump.eval({q.x, q.y + h}) - bump.eval({q.x, q.y - h})) / (2 * h);
        CHECK(ga.x == doctest::Approx(fx).epsilon(1e-7));
        CHECK(ga.y == doctest::Approx(fy).epsilon(1e-7));
    }
}

TEST_CASE("dirichlet energy closed forms") {
    SUBCASE("zero field") {
        const BumpField zero({0, 0}, 1.0, 0.0, BumpField::Profile::smooth3);
        CHECK(dirichlet_energy(zero) == 0.0);
    }
    SUBCASE("plain sine on the period box: 2 pi^2") {
        const TaperedSineField sine(6, Box{0, 0, kTwoPi, kTwoPi}, 1.0, /*tapered=*/false);
        CHECK(dirichlet_energy(sine) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-3));
        // the plain family has j-independent energy
        const TaperedSineField sine2(24, Box{0, 0, kTwoPi, kTwoPi}, 1.0, false);
        CHECK(dirichlet_energy(sine2) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-3));
    }
    SUBCASE("cone bump vs radial oracle (2 pi / 3 for A = R = 1)") {
        const BumpField bump({0.3, 0.4}, 1.0, 1.0, BumpField::Profile::cone2);
        const double oracle = oracles::radial_integral(
            [&](double r) {
                const double d = bump.radial_derivative(r);
                return d * d;
            },
            1.0);
        CHECK(oracle == doctest::Approx(2.0 * kPi / 3.0).epsilon(1e-10));
        CHECK(dirichlet_energy(bump) == doctest::Approx(oracle).epsilon(1e-3));
    }
    SUBCASE("smooth bump vs radial oracle") {
        const BumpField bump({0, 0}, 1.3, 0.6, BumpField::Profile::smooth3);
        const double oracle = oracles::radial_integral(
            [&](double r) {
                const double d = bump.radial_derivative(r);
                return d * d;
            },
            1.3);
        CHECK(dirichlet_energy(bump) == doctest::Approx(oracle).epsilon(1e-3));
    }
}

TEST_CASE("rho volume") {
    const Box region{-2, -1, 2, 1};
    SUBCASE("zero field gives the area exactly") {
        const BumpField zero({0, 0}, 1.0, 0.0, BumpField::Profile::smooth3);
        CHECK(rho_volume(zero, region) == region.area());
    }
    SUBCASE("constant on the region") {
        const GridField grid = GridField::constant(std::log(2.0), region, 5);
        CHECK(rho_volume(grid, region) == doctest::Approx(2.0 * region.area()).epsilon(1e-12));
    }
    SUBCASE("bump vs radial oracle") {
        const BumpField bump({0, 0}, 0.9, 0.8, BumpField::Profile::smooth3);
        const double oracle =
            region.area() +
            oracles::radial_integral([&](double r) { return std::expm1(bump.radial(r)); }, 0.9);
        CHECK(rho_volume(bump, region) == doctest::Approx(oracle).epsilon(1e-3));
    }
}

TEST_CASE("lipschitz estimates") {
    SUBCASE("zero field") {
        const BumpField zero({0, 0}, 1.0, 0.0, BumpField::Profile::smooth3);
        CHECK(lipschitz_estimate(zero, 20000, Rng(2)).value == 0.0);
    }
    SUBCASE("plain sine has slope 1") {
        const TaperedSineField sine(8, Box{0, 0, kTwoPi, kTwoPi}, 1.0, false);
        const LipschitzEstimate est = lipschitz_estimate(sine, 200000, Rng(3));
        CHECK(est.value == doctest::Approx(1.0).epsilon(0.02));
        CHECK(est.value <= sine.lipschitz_bound() * (1.0 + 1e-9));
    }
    SUBCASE("cone bump attains 2 near the center") {
        const BumpField bump({0, 0}, 1.0, 1.0, BumpField::Profile::cone2);
        const LipschitzEstimate est = lipschitz_estimate(bump, 400000, Rng(4));
        CHECK(est.value == doctest::Approx(2.0).epsilon(0.03));
        CHECK(est.analytic_bound.has_value());
        CHECK(*est.analytic_bound == doctest::Approx(2.0));
    }
    SUBCASE("exp-lipschitz transfer: Lip(e^rho) <= e^sup * Lip(rho)") {
        Rng rng(5);
        for (FieldPtr f :
             {FieldPtr(std::make_shared<BumpField>(Vec2{0, 0}, 1.0, 0.9,
                                                   BumpField::Profile::cone2)),
              FieldPtr(std::make_shared<TaperedSineField>(4, Box{0, 0, kTwoPi, kTwoPi}, 1.0))}) {
            const Box d = f->support();
            double lip_exp = 0.0;
            for (int i = 0; i < 100000; ++i) {
                const Vec2 a = rng.uniform_in(d);
                const double ang = rng.uniform(0.0, kTwoPi);
                const double eps = 1e-4;
                const Vec2 b{a.x + eps * std::cos(ang), a.y + eps * std::sin(ang)};
                lip_exp = std::max(lip_exp, std::abs(std::exp(f->eval(a)) - std::exp(f->eval(b))) /
                                                (a - b).norm());
            }
            CHECK(lip_exp <= std::exp(f->sup_abs()) * f->lipschitz_bound() * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("grid dirichlet energy is translation invariant") {
    Rng rng(77);
    std::vector<double> v(21 * 21);
    for (double& x : v) x = rng.normal();
    const GridField f(Box{0, 0, 2, 2}, 21, 21, v);
    const GridField g = f.translated({0.1, -0.3});
    const double e0 = f.dirichlet_energy_exact();
    const double e1 = g.dirichlet_energy_exact();
    CHECK(std::abs(e0 - e1) <= 1e-12 * e0);
}

TEST_CASE("grid field respects its lipschitz bound") {
    Rng rng(13);
    std::vector<double> v(16 * 16);
    for (double& x : v) x = rng.normal();
    const GridField f(Box{-1, -1, 1, 1}, 16, 16, v);
    const double lip = f.lipschitz_bound();
    for (int i = 0; i < 20000; ++i) {
        const Vec2 a = rng.uniform_in(f.support());
        Vec2 b = a;
        const double ang = rng.uniform(0.0, kTwoPi);
        b.x += 1e-3 * std::cos(ang);
        b.y += 1e-3 * std::sin(ang);
        if (!f.support().contains(b)) continue;
        CHECK(std::abs(f.eval(a) - f.eval(b)) <= lip * (a - b).norm() * (1.0 + 1e-9));
    }
}

TEST_CASE("two-route energy identity under a smooth background") {
    // integral |grad(f+h)|^2 - integral |grad h|^2
    //   = integral (|grad_h f|^2 + 2 K_h f) dnu_h
    const auto f =
        std::make_shared<BumpField>(Vec2{0.1, -0.05}, 0.8, 0.4, BumpField::Profile::smooth3);
    const auto h =
        std::make_shared<BumpField>(Vec2{-0.2, 0.15}, 1.1, 0.3, BumpField::Profile::smooth3);
    const FieldSum sum(f, h);
    const double lhs = dirichlet_energy(sum, 2048) - dirichlet_energy(*h, 2048);

    const Box d = sum.support();
    const int m = 2048;
    const double hx = d.width() / m, hy = d.height() / m;
    double rhs = 0.0;
    for (int j = 0; j < m; ++j) {
        const double y = d.y0 + (j + 0.5) * hy;
        double row = 0.0;
        for (int i = 0; i < m; ++i) {
            const Vec2 p{d.x0 + (i + 0.5) * hx, y};
            const double hv = h->eval(p);
            const double grad_h_sq = std::exp(-hv) * f->gradient(p).norm2();
            row += (grad_h_sq + 2.0 * curvature_term(*h, p) * f->eval(p)) * std::exp(hv);
        }
        rhs += row * hx * hy;
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3));
}

TEST_CASE("grid field file round trip") {
    Rng rng(31);
    std::vector<double> v(12 * 9);
    for (double& x : v) x = rng.normal();
    const GridField f(Box{0.5, -0.25, 2.5, 1.25}, 12, 9, v);
    std::stringstream buf;
    write_grid_field(buf, f);
    const GridField g = read_grid_field(buf);
    CHECK(g.nx() == 12);
    CHECK(g.ny() == 9);
    CHECK(g.support().x0 == f.support().x0);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(g.values()[i] == v[i]);
}
