#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loopanomaly/geometry.hpp"
#include "loopanomaly/rng.hpp"

namespace la {

// Conformal factor rho: Lipschitz, supported in a box D, bounded.  eval is
// defined on the whole plane and returns exactly 0 outside D.
class ConformalField {
  public:
    virtual ~ConformalField() = default;

    virtual double eval(Vec2 p) const = 0;
    virtual Vec2 gradient(Vec2 p) const;
    virtual double laplacian(Vec2 p) const;

    virtual double sup_abs() const = 0;        // sup |rho|
    virtual double lipschitz_bound() const = 0;
    virtual bool lipschitz_is_statistical() const { return false; }
    virtual Box support() const = 0;
    virtual std::string describe() const = 0;

    // spacing used by the finite-difference fallbacks
    virtual double grad_spacing() const { return 1e-5; }

    bool is_identically_zero() const { return sup_abs() == 0.0; }
};

using FieldPtr = std::shared_ptr<const ConformalField>;

// Piecewise-bilinear field on an (nx x ny)-node grid over a box.  Bilinear
// interpolation preserves the Lipschitz property of the node data.
class GridField final : public ConformalField {
  public:
    GridField(Box box, int nx_nodes, int ny_nodes, std::vector<double> values);

    static GridField constant(double c, Box box, int nodes_per_side = 9);

    double eval(Vec2 p) const override;
    Vec2 gradient(Vec2 p) const override;
    double sup_abs() const override;
    double lipschitz_bound() const override; // max per-cell bilinear bound
    bool lipschitz_is_statistical() const override { return true; }
    Box support() const override { return box_; }
    std::string describe() const override;
    double grad_spacing() const override { return 0.25 * cell_x_; }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double cell_size_x() const { return cell_x_; }
    double cell_size_y() const { return cell_y_; }
    double node_value(int i, int j) const { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
    Vec2 node_position(int i, int j) const {
        return {box_.x0 + i * cell_x_, box_.y0 + j * cell_y_};
    }
    const std::vector<double>& values() const { return values_; }

    // exact Dirichlet energy of the bilinear interpolant
    double dirichlet_energy_exact() const;

    GridField translated(Vec2 shift) const;

  private:
    Box box_;
    int nx_, ny_;
    double cell_x_, cell_y_;
    std::vector<double> values_;
};

// Radially symmetric bump on a disk of radius R.
// profile cone2:     A * (1 - r/R)^2
// profile smooth3:   A * (1 - (r/R)^2)^3
// profile mollifier: A * exp(1 - 1/(1 - (r/R)^2)), compactly supported C-inf
class BumpField final : public ConformalField {
  public:
    enum class Profile { cone2, smooth3, mollifier };

    BumpField(Vec2 center, double radius, double amplitude, Profile profile);

    double eval(Vec2 p) const override;
    Vec2 gradient(Vec2 p) const override;
    double laplacian(Vec2 p) const override;
    double sup_abs() const override { return std::abs(amplitude_); }
    double lipschitz_bound() const override;
    Box support() const override;
    std::string describe() const override;

    double radial(double r) const;
    double radial_derivative(double r) const;

  private:
    Vec2 center_;
    double radius_, amplitude_;
    Profile profile_;
};

// amp * j^-1 * taper(x) * sin(j x1) on a box; the taper is a C^2 quintic
// ramp over a margin equal to 10% of the box side.  With tapered = false
// the plain sine is used (periodic across the seam of a matching torus).
class TaperedSineField final : public ConformalField {
  public:
    TaperedSineField(int j, Box box, double amplitude = 1.0, bool tapered = true,
                     double margin_frac = 0.1);

    double eval(Vec2 p) const override;
    Vec2 gradient(Vec2 p) const override;
    double sup_abs() const override { return std::abs(amplitude_) / j_; }
    double lipschitz_bound() const override;
    Box support() const override { return box_; }
    std::string describe() const override;

    int j() const { return j_; }

  private:
    double taper_1d(double u, double lo, double hi, double margin, double& dtaper) const;

    int j_;
    Box box_;
    double amplitude_;
    bool tapered_;
    double margin_frac_;
};

// kappa * x1 restricted to a box; test fixture for loops well inside D.
class LinearField final : public ConformalField {
  public:
    LinearField(double kappa, Box box) : kappa_(kappa), box_(box) {}

    double eval(Vec2 p) const override { return box_.contains(p) ? kappa_ * p.x : 0.0; }
    Vec2 gradient(Vec2 p) const override {
        return box_.contains(p) ? Vec2{kappa_, 0.0} : Vec2{0.0, 0.0};
    }
    double laplacian(Vec2) const override { return 0.0; }
    double sup_abs() const override {
        return std::abs(kappa_) * std::max(std::abs(box_.x0), std::abs(box_.x1));
    }
    double lipschitz_bound() const override { return std::abs(kappa_); }
    Box support() const override { return box_; }
    std::string describe() const override;

  private:
    double kappa_;
    Box box_;
};

// A * cos(2 pi kx x / Lx) * cos(2 pi ky y / Ly) on [0,Lx] x [0,Ly];
// periodic across the seam, intended as a torus test field.
class CosineProductField final : public ConformalField {
  public:
    CosineProductField(double amplitude, int kx, int ky, double Lx, double Ly);

    double eval(Vec2 p) const override;
    Vec2 gradient(Vec2 p) const override;
    double laplacian(Vec2 p) const override;
    double sup_abs() const override { return std::abs(amplitude_); }
    double lipschitz_bound() const override;
    Box support() const override { return {0.0, 0.0, Lx_, Ly_}; }
    std::string describe() const override;

  private:
    double amplitude_;
    int kx_, ky_;
    double Lx_, Ly_;
};

// ---- quadrature over fields ----

// (rho, rho)_grad = integral |grad rho|^2 over the support.  Grid fields use
// the exact per-cell bilinear integral; analytic kinds use the composite
// midpoint rule with the analytic gradient.
double dirichlet_energy(const ConformalField& field, int n_side = 1024);

// integral of e^rho over the region; the region part outside the support
// contributes its Lebesgue area exactly.
double rho_volume(const ConformalField& field, const Box& region, int n_side = 1024);

struct LipschitzEstimate {
    double value = 0.0;
    bool statistical = false;
    std::optional<double> analytic_bound;
};

LipschitzEstimate lipschitz_estimate(const ConformalField& field, std::int64_t n_pairs, Rng rng);

// -e^{-h} * laplacian(h): the curvature factor that makes the two-route
// Dirichlet-energy identity used in the tests exact.
double curvature_term(const ConformalField& h, Vec2 p);

// ---- grid field binary file format ----
// magic "LAGF" (u32), nx nodes (u32), ny nodes (u32), cell size x, cell size
// y, bounding box x0 y0 x1 y1 (f64 each), then nx*ny doubles row-major.
void write_grid_field(std::ostream& out, const GridField& f);
GridField read_grid_field(std::istream& in);
void write_grid_field_file(const std::string& path, const GridField& f);
GridField read_grid_field_file(const std::string& path);

} // namespace la
