#include "loopanomaly/conformal_field.hpp"

#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "loopanomaly/special.hpp"

namespace la {

Vec2 ConformalField::gradient(Vec2 p) const {
    const double h = grad_spacing();
    return {(eval({p.x + h, p.y}) - eval({p.x - h, p.y})) / (2.0 * h),
            (eval({p.x, p.y + h}) - eval({p.x, p.y - h})) / (2.0 * h)};
}

double ConformalField::laplacian(Vec2 p) const {
    const double h = grad_spacing();
    return (eval({p.x + h, p.y}) + eval({p.x - h, p.y}) + eval({p.x, p.y + h}) +
            eval({p.x, p.y - h}) - 4.0 * eval(p)) /
           (h * h);
}

// ---- GridField ----

GridField::GridField(Box box, int nx_nodes, int ny_nodes, std::vector<double> values)
    : box_(box), nx_(nx_nodes), ny_(ny_nodes), values_(std::move(values)) {
    if (nx_ < 2 || ny_ < 2) throw std::invalid_argument("GridField: need at least 2x2 nodes");
    if (values_.size() != static_cast<std::size_t>(nx_) * ny_)
        throw std::invalid_argument("GridField: value count does not match node grid");
    cell_x_ = box_.width() / (nx_ - 1);
    cell_y_ = box_.height() / (ny_ - 1);
}

GridField GridField::constant(double c, Box box, int nodes_per_side) {
    std::vector<double> v(static_cast<std::size_t>(nodes_per_side) * nodes_per_side, c);
    return GridField(box, nodes_per_side, nodes_per_side, std::move(v));
}

double GridField::eval(Vec2 p) const {
    if (!box_.contains(p)) return 0.0;
    double fx = (p.x - box_.x0) / cell_x_;
    double fy = (p.y - box_.y0) / cell_y_;
    int i = static_cast<int>(fx);
    int j = static_cast<int>(fy);
    if (i > nx_ - 2) i = nx_ - 2;
    if (j > ny_ - 2) j = ny_ - 2;
    const double ux = fx - i, uy = fy - j;
    const double v00 = node_value(i, j), v10 = node_value(i + 1, j);
    const double v01 = node_value(i, j + 1), v11 = node_value(i + 1, j + 1);
    return v00 * (1 - ux) * (1 - uy) + v10 * ux * (1 - uy) + v01 * (1 - ux) * uy +
           v11 * ux * uy;
}

Vec2 GridField::gradient(Vec2 p) const {
    // central differences of the interpolant; one-sided where the stencil
    // would leave the box
    const double h = grad_spacing();
    auto d1 = [&](Vec2 a, Vec2 b, double span) { return (eval(a) - eval(b)) / span; };
    double gx, gy;
    if (p.x - h >= box_.x0 && p.x + h <= box_.x1)
        gx = d1({p.x + h, p.y}, {p.x - h, p.y}, 2 * h);
    else if (p.x + h <= box_.x1)
        gx = d1({p.x + h, p.y}, p, h);
    else
        gx = d1(p, {p.x - h, p.y}, h);
    if (p.y - h >= box_.y0 && p.y + h <= box_.y1)
        gy = d1({p.x, p.y + h}, {p.x, p.y - h}, 2 * h);
    else if (p.y + h <= box_.y1)
        gy = d1({p.x, p.y + h}, p, h);
    else
        gy = d1(p, {p.x, p.y - h}, h);
    return {gx, gy};
}

double GridField::sup_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridField::lipschitz_bound() const {
    double m2 = 0.0;
    for (int j = 0; j + 1 < ny_; ++j) {
        for (int i = 0; i + 1 < nx_; ++i) {
            const double v00 = node_value(i, j), v10 = node_value(i + 1, j);
            const double v01 = node_value(i, j + 1), v11 = node_value(i + 1, j + 1);
            const double gx = std::max(std::abs(v10 - v00), std::abs(v11 - v01)) / cell_x_;
            const double gy = std::max(std::abs(v01 - v00), std::abs(v11 - v10)) / cell_y_;
            m2 = std::max(m2, gx * gx + gy * gy);
        }
    }
    return std::sqrt(m2);
}

std::string GridField::describe() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "grid(%dx%d)", nx_, ny_);
    return buf;
}

double GridField::dirichlet_energy_exact() const {
    double total = 0.0;
    const double hx = cell_x_, hy = cell_y_;
    for (int j = 0; j + 1 < ny_; ++j) {
        double row = 0.0;
        for (int i = 0; i + 1 < nx_; ++i) {
            const double v00 = node_value(i, j), v10 = node_value(i + 1, j);
            const double v01 = node_value(i, j + 1), v11 = node_value(i + 1, j + 1);
            const double b = (v10 - v00) / hx;
            const double c = (v01 - v00) / hy;
            const double d = (v11 - v10 - v01 + v00) / (hx * hy);
            // exact integral of |grad u|^2 for the bilinear patch
            row += hx * hy *
                   (b * b + c * c + (b * hy + c * hx) * d + (d * d) * (hx * hx + hy * hy) / 3.0);
        }
        total += row;
    }
    return total;
}

GridField GridField::translated(Vec2 shift) const {
    Box b{box_.x0 + shift.x, box_.y0 + shift.y, box_.x1 + shift.x, box_.y1 + shift.y};
    return GridField(b, nx_, ny_, values_);
}

// ---- BumpField ----

BumpField::BumpField(Vec2 center, double radius, double amplitude, Profile profile)
    : center_(center), radius_(radius), amplitude_(amplitude), profile_(profile) {
    if (radius_ <= 0.0) throw std::invalid_argument("BumpField: radius must be positive");
}

double BumpField::radial(double r) const {
    const double u = r / radius_;
    if (u >= 1.0) return 0.0;
    if (profile_ == Profile::cone2) {
        const double w = 1.0 - u;
        return amplitude_ * w * w;
    }
    const double w = 1.0 - u * u;
    if (profile_ == Profile::smooth3) return amplitude_ * w * w * w;
    return amplitude_ * std::exp(1.0 - 1.0 / w);
}

double BumpField::radial_derivative(double r) const {
    const double u = r / radius_;
    if (u >= 1.0) return 0.0;
    if (profile_ == Profile::cone2) return -2.0 * amplitude_ * (1.0 - u) / radius_;
    const double w = 1.0 - u * u;
    if (profile_ == Profile::smooth3) return -6.0 * amplitude_ * u * w * w / radius_;
    return amplitude_ * std::exp(1.0 - 1.0 / w) * (-2.0 * u / (w * w)) / radius_;
}

double BumpField::eval(Vec2 p) const { return radial((p - center_).norm()); }

Vec2 BumpField::gradient(Vec2 p) const {
    const Vec2 d = p - center_;
    const double r = d.norm();
    if (r == 0.0 || r >= radius_) return {0.0, 0.0};
    const double dr = radial_derivative(r);
    return (dr / r) * d;
}

double BumpField::laplacian(Vec2 p) const {
    const Vec2 d = p - center_;
    const double r = d.norm();
    const double u = r / radius_;
    if (u >= 1.0) return 0.0;
    const double R2 = radius_ * radius_;
    if (profile_ == Profile::cone2) {
        if (r == 0.0) return std::numeric_limits<double>::infinity();
        return (2.0 * amplitude_ / R2) * (2.0 * u - 1.0) / u;
    }
    const double w = 1.0 - u * u;
    if (profile_ == Profile::smooth3) return -(6.0 * amplitude_ / R2) * w * (2.0 - 6.0 * u * u);
    // exp(g(u)) with g = 1 - 1/w: laplacian = (rho_uu + rho_u / u) / R^2,
    // and g'(u)/u = -2/w^2 extends continuously through u = 0
    const double g1 = -2.0 * u / (w * w);
    const double g2 = -2.0 / (w * w) - 8.0 * u * u / (w * w * w);
    const double e = amplitude_ * std::exp(1.0 - 1.0 / w);
    return e * (g1 * g1 + g2 - 2.0 / (w * w)) / R2;
}

double BumpField::lipschitz_bound() const {
    if (profile_ == Profile::cone2) return 2.0 * std::abs(amplitude_) / radius_;
    if (profile_ == Profile::smooth3) {
        // max of 6|A| u (1-u^2)^2 / R at u = 1/sqrt(5)
        const double u = 1.0 / std::sqrt(5.0);
        const double w = 1.0 - u * u;
        return 6.0 * std::abs(amplitude_) * u * w * w / radius_;
    }
    double m = 0.0;
    for (int i = 1; i < 4096; ++i) m = std::max(m, std::abs(radial_derivative(radius_ * i / 4096.0)));
    return m;
}

Box BumpField::support() const {
    return {center_.x - radius_, center_.y - radius_, center_.x + radius_, center_.y + radius_};
}

std::string BumpField::describe() const {
    char buf[96];
    const char* name = profile_ == Profile::cone2
                           ? "cone2"
                           : (profile_ == Profile::smooth3 ? "smooth3" : "mollifier");
    std::snprintf(buf, sizeof buf, "bump(%s,A=%g,R=%g)", name, amplitude_, radius_);
    return buf;
}

// ---- TaperedSineField ----

TaperedSineField::TaperedSineField(int j, Box box, double amplitude, bool tapered,
                                   double margin_frac)
    : j_(j), box_(box), amplitude_(amplitude), tapered_(tapered), margin_frac_(margin_frac) {
    if (j_ < 1) throw std::invalid_argument("TaperedSineField: j must be >= 1");
}

// quintic smoothstep ramp: C^2, 0 at the boundary, 1 past the margin
double TaperedSineField::taper_1d(double u, double lo, double hi, double margin,
                                  double& dtaper) const {
    dtaper = 0.0;
    double s = 1.0, ds = 0.0;
    if (u < lo + margin) {
        const double v = (u - lo) / margin;
        s = v * v * v * (10.0 + v * (-15.0 + 6.0 * v));
        ds = 30.0 * v * v * (1.0 - v) * (1.0 - v) / margin;
    } else if (u > hi - margin) {
        const double v = (hi - u) / margin;
        s = v * v * v * (10.0 + v * (-15.0 + 6.0 * v));
        ds = -30.0 * v * v * (1.0 - v) * (1.0 - v) / margin;
    }
    dtaper = ds;
    return s;
}

double TaperedSineField::eval(Vec2 p) const {
    if (!box_.contains(p)) return 0.0;
    const double base = amplitude_ / j_ * std::sin(j_ * p.x);
    if (!tapered_) return base;
    const double mx = margin_frac_ * box_.width();
    const double my = margin_frac_ * box_.height();
    double dwx, dwy;
    const double wx = taper_1d(p.x, box_.x0, box_.x1, mx, dwx);
    const double wy = taper_1d(p.y, box_.y0, box_.y1, my, dwy);
    return base * wx * wy;
}

Vec2 TaperedSineField::gradient(Vec2 p) const {
    if (!box_.contains(p)) return {0.0, 0.0};
    const double s = std::sin(j_ * p.x), c = std::cos(j_ * p.x);
    if (!tapered_) return {amplitude_ * c, 0.0};
    const double mx = margin_frac_ * box_.width();
    const double my = margin_frac_ * box_.height();
    double dwx, dwy;
    const double wx = taper_1d(p.x, box_.x0, box_.x1, mx, dwx);
    const double wy = taper_1d(p.y, box_.y0, box_.y1, my, dwy);
    const double a = amplitude_;
    return {a * wy * (wx * c + dwx * s / j_), a * wx * dwy * s / j_};
}

double TaperedSineField::lipschitz_bound() const {
    if (!tapered_) return std::abs(amplitude_);
    const double mx = margin_frac_ * box_.width();
    const double my = margin_frac_ * box_.height();
    const double dmax = 1.875 / std::min(mx, my); // quintic ramp slope peak 15/8
    return std::abs(amplitude_) * (1.0 + 2.0 * dmax / j_);
}

std::string TaperedSineField::describe() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s_sine(j=%d,A=%g)", tapered_ ? "tapered" : "plain", j_,
                  amplitude_);
    return buf;
}

std::string LinearField::describe() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "linear(k=%g)", kappa_);
    return buf;
}

// ---- CosineProductField ----

CosineProductField::CosineProductField(double amplitude, int kx, int ky, double Lx, double Ly)
    : amplitude_(amplitude), kx_(kx), ky_(ky), Lx_(Lx), Ly_(Ly) {}

double CosineProductField::eval(Vec2 p) const {
    if (p.x < 0.0 || p.x > Lx_ || p.y < 0.0 || p.y > Ly_) return 0.0;
    return amplitude_ * std::cos(kTwoPi * kx_ * p.x / Lx_) * std::cos(kTwoPi * ky_ * p.y / Ly_);
}

Vec2 CosineProductField::gradient(Vec2 p) const {
    const double ax = kTwoPi * kx_ / Lx_, ay = kTwoPi * ky_ / Ly_;
    const double cx = std::cos(ax * p.x), sx = std::sin(ax * p.x);
    const double cy = std::cos(ay * p.y), sy = std::sin(ay * p.y);
    return {-amplitude_ * ax * sx * cy, -amplitude_ * ay * cx * sy};
}

double CosineProductField::laplacian(Vec2 p) const {
    const double ax = kTwoPi * kx_ / Lx_, ay = kTwoPi * ky_ / Ly_;
    return -(ax * ax + ay * ay) * eval(p);
}

double CosineProductField::lipschitz_bound() const {
    const double ax = kTwoPi * kx_ / Lx_, ay = kTwoPi * ky_ / Ly_;
    return std::abs(amplitude_) * std::sqrt(ax * ax + ay * ay);
}

std::string CosineProductField::describe() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "cosine(A=%g,kx=%d,ky=%d)", amplitude_, kx_, ky_);
    return buf;
}

// ---- quadrature ----

double dirichlet_energy(const ConformalField& field, int n_side) {
    if (const auto* grid = dynamic_cast<const GridField*>(&field))
        return grid->dirichlet_energy_exact();
    const Box d = field.support();
    const double hx = d.width() / n_side, hy = d.height() / n_side;
    double total = 0.0;
    for (int j = 0; j < n_side; ++j) {
        const double y = d.y0 + (j + 0.5) * hy;
        double row = 0.0;
        for (int i = 0; i < n_side; ++i) {
            const double x = d.x0 + (i + 0.5) * hx;
            row += field.gradient({x, y}).norm2();
        }
        total += row;
    }
    return total * hx * hy;
}

double rho_volume(const ConformalField& field, const Box& region, int n_side) {
    const Box d = field.support();
    const Box inter{std::max(region.x0, d.x0), std::max(region.y0, d.y0),
                    std::min(region.x1, d.x1), std::min(region.y1, d.y1)};
    double extra = 0.0;
    if (inter.x1 > inter.x0 && inter.y1 > inter.y0 && !field.is_identically_zero()) {
        const double hx = inter.width() / n_side, hy = inter.height() / n_side;
        for (int j = 0; j < n_side; ++j) {
            const double y = inter.y0 + (j + 0.5) * hy;
            double row = 0.0;
            for (int i = 0; i < n_side; ++i) {
                const double x = inter.x0 + (i + 0.5) * hx;
                row += std::expm1(field.eval({x, y}));
            }
            extra += row * hx * hy;
        }
    }
    return region.area() + extra;
}

LipschitzEstimate lipschitz_estimate(const ConformalField& field, std::int64_t n_pairs, Rng rng) {
    // pairs are restricted to the support: the constant measured is that of
    // rho on its domain, not of the cutoff across the boundary
    const Box d = field.support();
    double best = 0.0;
    const double tiny = 1e-4 * std::max(d.width(), d.height());
    for (std::int64_t i = 0; i < n_pairs; ++i) {
        const Vec2 a = rng.uniform_in(d);
        Vec2 b;
        if (i % 2 == 0) {
            b = rng.uniform_in(d);
        } else {
            const double ang = rng.uniform(0.0, kTwoPi);
            b = {a.x + tiny * std::cos(ang), a.y + tiny * std::sin(ang)};
            if (!d.contains(b)) continue;
        }
        const double dist = (a - b).norm();
        if (dist < 1e-14) continue;
        best = std::max(best, std::abs(field.eval(a) - field.eval(b)) / dist);
    }
    LipschitzEstimate est;
    est.value = best;
    est.statistical = true;
    if (!field.lipschitz_is_statistical()) est.analytic_bound = field.lipschitz_bound();
    return est;
}

double curvature_term(const ConformalField& h, Vec2 p) {
    return -std::exp(-h.eval(p)) * h.laplacian(p);
}

// ---- grid field IO ----

namespace {
constexpr std::uint32_t kGridMagic = 0x4647414C; // "LAGF"
}

void write_grid_field(std::ostream& out, const GridField& f) {
    const std::uint32_t magic = kGridMagic;
    const std::uint32_t nx = static_cast<std::uint32_t>(f.nx());
    const std::uint32_t ny = static_cast<std::uint32_t>(f.ny());
    const double cx = f.cell_size_x(), cy = f.cell_size_y();
    const Box b = f.support();
    out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
    out.write(reinterpret_cast<const char*>(&nx), sizeof nx);
    out.write(reinterpret_cast<const char*>(&ny), sizeof ny);
    out.write(reinterpret_cast<const char*>(&cx), sizeof cx);
    out.write(reinterpret_cast<const char*>(&cy), sizeof cy);
    out.write(reinterpret_cast<const char*>(&b.x0), sizeof b.x0);
    out.write(reinterpret_cast<const char*>(&b.y0), sizeof b.y0);
    out.write(reinterpret_cast<const char*>(&b.x1), sizeof b.x1);
    out.write(reinterpret_cast<const char*>(&b.y1), sizeof b.y1);
    for (double v : f.values()) out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

GridField read_grid_field(std::istream& in) {
    std::uint32_t magic = 0, nx = 0, ny = 0;
    double cx = 0, cy = 0;
    Box b;
    in.read(reinterpret_cast<char*>(&magic), sizeof magic);
    if (!in || magic != kGridMagic) throw std::runtime_error("read_grid_field: bad magic");
    in.read(reinterpret_cast<char*>(&nx), sizeof nx);
    in.read(reinterpret_cast<char*>(&ny), sizeof ny);
    in.read(reinterpret_cast<char*>(&cx), sizeof cx);
    in.read(reinterpret_cast<char*>(&cy), sizeof cy);
    in.read(reinterpret_cast<char*>(&b.x0), sizeof b.x0);
    in.read(reinterpret_cast<char*>(&b.y0), sizeof b.y0);
    in.read(reinterpret_cast<char*>(&b.x1), sizeof b.x1);
    in.read(reinterpret_cast<char*>(&b.y1), sizeof b.y1);
    std::vector<double> values(static_cast<std::size_t>(nx) * ny);
    for (double& v : values) in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("read_grid_field: truncated file");
    return GridField(b, static_cast<int>(nx), static_cast<int>(ny), std::move(values));
}

void write_grid_field_file(const std::string& path, const GridField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_grid_field_file: cannot open " + path);
    write_grid_field(out, f);
}

GridField read_grid_field_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_grid_field_file: cannot open " + path);
    return read_grid_field(in);
}

} // namespace la
