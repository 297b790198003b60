#include "loopanomaly/plot.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace la {

namespace {

// 5x7 bitmap font, bit 4 is the leftmost column
struct Glyph {
    char c;
    unsigned char rows[7];
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
    {'b', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E}},
    {'c', {0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E}},
    {'d', {0x01, 0x01, 0x0D, 0x13, 0x11, 0x11, 0x0F}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
    {'g', {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'h', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
    {'j', {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C}},
    {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
    {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x11, 0x11}},
    {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
    {'p', {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
    {'q', {0x00, 0x00, 0x0D, 0x13, 0x0F, 0x01, 0x01}},
    {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
    {'s', {0x00, 0x00, 0x0E, 0x10, 0x0E, 0x01, 0x1E}},
    {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
    {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}},
    {'v', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'w', {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0A}},
    {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
    {'y', {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
};

struct Rgb {
    unsigned char r, g, b;
};

constexpr Rgb kPalette[] = {{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189},
                            {255, 127, 14}, {23, 190, 207}};
constexpr Rgb kAxis{40, 40, 40};
constexpr Rgb kGridLine{220, 220, 220};

class Canvas {
  public:
    Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 255) {}

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
        const std::size_t i = (static_cast<std::size_t>(y) * w_ + x) * 3;
        px_[i] = c.r;
        px_[i + 1] = c.g;
        px_[i + 2] = c.b;
    }

    void line(double x0, double y0, double x1, double y1, Rgb c) {
        const double dx = x1 - x0, dy = y1 - y0;
        const int steps = static_cast<int>(std::max(std::abs(dx), std::abs(dy))) + 1;
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            set(static_cast<int>(std::lround(x0 + t * dx)),
                static_cast<int>(std::lround(y0 + t * dy)), c);
        }
    }

    void marker(int x, int y, Rgb c) {
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx)
                if (dx * dx + dy * dy <= 5) set(x + dx, y + dy, c);
    }

    void text(int x, int y, const std::string& s, Rgb c) {
        for (char ch : s) {
            const Glyph* g = nullptr;
            const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            for (const Glyph& cand : kFont)
                if (cand.c == lower) {
                    g = &cand;
                    break;
                }
            if (g) {
                for (int r = 0; r < 7; ++r)
                    for (int col = 0; col < 5; ++col)
                        if (g->rows[r] & (1 << (4 - col))) set(x + col, y + r, c);
            }
            x += 6;
        }
    }

    void write_png(const std::string& path) const {
        FILE* fp = std::fopen(path.c_str(), "wb");
        if (!fp) throw std::runtime_error("write_plot_png: cannot open " + path);
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png_create_info_struct(png);
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            std::fclose(fp);
            throw std::runtime_error("write_plot_png: libpng failure");
        }
        png_init_io(png, fp);
        png_set_IHDR(png, info, static_cast<png_uint_32>(w_), static_cast<png_uint_32>(h_), 8,
                     PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int y = 0; y < h_; ++y)
            png_write_row(png, const_cast<png_bytep>(&px_[static_cast<std::size_t>(y) * w_ * 3]));
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
    }

  private:
    int w_, h_;
    std::vector<unsigned char> px_;
};

std::string format_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

void write_plot_png(const std::string& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& options) {
    const int W = options.width, H = options.height;
    const int ml = 80, mr = 25, mt = 20, mb = 50;
    Canvas canvas(W, H);

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double x = options.log_x ? std::log10(s.x[i]) : s.x[i];
            const double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, s.y[i] - e);
            ymax = std::max(ymax, s.y[i] + e);
        }
    }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
    }
    if (ymin > ymax) {
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    const double ypad = 0.08 * (ymax - ymin + 1e-12);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) {
        const double v = options.log_x ? std::log10(x) : x;
        return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr);
    };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    // frame and ticks
    canvas.line(ml, mt, ml, H - mb, kAxis);
    canvas.line(ml, H - mb, W - mr, H - mb, kAxis);
    const int n_ticks = 6;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / n_ticks;
        const double vx = options.log_x ? std::pow(10.0, fx) : fx;
        const double sx = px(vx);
        canvas.line(sx, mt, sx, H - mb, kGridLine);
        canvas.line(sx, H - mb, sx, H - mb + 4, kAxis);
        canvas.text(static_cast<int>(sx) - 15, H - mb + 8, format_tick(vx), kAxis);

        const double vy = ymin + (ymax - ymin) * i / n_ticks;
        const double sy = py(vy);
        canvas.line(ml, sy, W - mr, sy, kGridLine);
        canvas.line(ml - 4, sy, ml, sy, kAxis);
        canvas.text(5, static_cast<int>(sy) - 3, format_tick(vy), kAxis);
    }
    canvas.text(ml + (W - ml - mr) / 2 - 3 * static_cast<int>(options.x_label.size()), H - 14,
                options.x_label, kAxis);
    canvas.text(5, 6, options.y_label, kAxis);

    int legend_y = mt + 6;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const Rgb color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        const bool reference = !s.label.empty() && s.label[0] == '=';
        if (reference && !s.y.empty()) {
            const double sy = py(s.y[0]);
            for (int x = ml; x < W - mr; x += 6) canvas.line(x, sy, x + 3, sy, color);
        } else {
            for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
                canvas.line(px(s.x[i]), py(s.y[i]), px(s.x[i + 1]), py(s.y[i + 1]), color);
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const double sx = px(s.x[i]);
                canvas.marker(static_cast<int>(sx), static_cast<int>(py(s.y[i])), color);
                if (i < s.yerr.size() && s.yerr[i] > 0.0) {
                    const double lo = py(s.y[i] - s.yerr[i]), hi = py(s.y[i] + s.yerr[i]);
                    canvas.line(sx, lo, sx, hi, color);
                    canvas.line(sx - 3, lo, sx + 3, lo, color);
                    canvas.line(sx - 3, hi, sx + 3, hi, color);
                }
            }
        }
        canvas.text(W - mr - 180, legend_y, s.label, color);
        legend_y += 12;
    }

    canvas.write_png(path);
}

} // namespace la
