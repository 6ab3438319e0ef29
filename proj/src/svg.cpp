#include "modlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kSize = 480.0;
constexpr double kPad = 50.0;

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string header(double w, double h) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
       << ' ' << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return os.str();
}

// Blue to yellow ramp on t in [0, 1].
std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(40 + 215 * t));
    const int g = static_cast<int>(std::lround(40 + 190 * t));
    const int b = static_cast<int>(std::lround(160 - 120 * t));
    std::ostringstream os;
    os << "rgb(" << r << ',' << g << ',' << b << ')';
    return os.str();
}

double to_px_x(double x) { return kPad + (x + 1.0) * 0.5 * kSize; }
double to_px_y(double y) { return kPad + (1.0 - y) * 0.5 * kSize; }

} // namespace

std::string svg_heatmap(const DiscretizedDomain& dom, std::span<const double> values, const std::string& title) {
    require(values.size() == dom.size(), "heatmap values must match the grid");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::ostringstream os;
    os << std::setprecision(6) << header(kSize + 2 * kPad, kSize + 2 * kPad);
    os << "<text x=\"" << kPad << "\" y=\"30\" font-size=\"16\">" << escape(title) << "</text>\n";
    os << "<circle cx=\"" << to_px_x(0) << "\" cy=\"" << to_px_y(0) << "\" r=\"" << 0.5 * kSize
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (std::size_t c = 0; c < dom.size(); ++c) {
        os << "<polygon points=\"";
        for (const Complex p : dom.outline(c)) os << to_px_x(p.real()) << ',' << to_px_y(p.imag()) << ' ';
        os << "\" fill=\"" << ramp((values[c] - lo) / span) << "\" stroke=\"none\"/>\n";
    }
    os << "<text x=\"" << kPad << "\" y=\"" << kSize + 2 * kPad - 15 << "\" font-size=\"12\">min " << lo << "  max " << hi
       << "</text>\n</svg>\n";
    return os.str();
}

std::string svg_loglog(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                       const std::string& ylabel) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        require(s.x.size() == s.y.size(), "series x/y length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
            x0 = std::min(x0, std::log10(s.x[i]));
            x1 = std::max(x1, std::log10(s.x[i]));
            y0 = std::min(y0, std::log10(s.y[i]));
            y1 = std::max(y1, std::log10(s.y[i]));
        }
    }
    if (!(x1 >= x0)) x0 = 0.0, x1 = 1.0;
    if (!(y1 >= y0)) y0 = 0.0, y1 = 1.0;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double v) { return kPad + (std::log10(v) - x0) / (x1 - x0) * kSize; };
    auto py = [&](double v) { return kPad + kSize - (std::log10(v) - y0) / (y1 - y0) * kSize; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << std::setprecision(6) << header(kSize + 2 * kPad, kSize + 2 * kPad);
    os << "<text x=\"" << kPad << "\" y=\"30\" font-size=\"16\">" << escape(title) << "</text>\n";
    os << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize << "\" height=\"" << kSize
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kPad + kSize / 2 << "\" y=\"" << kSize + kPad + 35
       << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(xlabel) << " (log10 " << x0 << " .. " << x1
       << ")</text>\n";
    os << "<text x=\"15\" y=\"" << kPad + kSize / 2 << "\" font-size=\"12\" transform=\"rotate(-90 15 "
       << kPad + kSize / 2 << ")\" text-anchor=\"middle\">" << escape(ylabel) << " (log10 " << y0 << " .. " << y1
       << ")</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = colors[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
        for (std::size_t i = 0; i < series[k].x.size(); ++i)
            if (series[k].x[i] > 0.0 && series[k].y[i] > 0.0) os << px(series[k].x[i]) << ',' << py(series[k].y[i]) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << kPad + 10 << "\" y=\"" << kPad + 20 + 16 * k << "\" font-size=\"12\" fill=\"" << color
           << "\">" << escape(series[k].label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_dirichlet(const DirichletDomain& dom, int resolution) {
    require(resolution >= 8, "dirichlet raster needs resolution >= 8");
    const double cell = kSize / resolution;
    std::ostringstream os;
    os << std::setprecision(6) << header(kSize + 2 * kPad, kSize + 2 * kPad);
    os << "<circle cx=\"" << to_px_x(0) << "\" cy=\"" << to_px_y(0) << "\" r=\"" << 0.5 * kSize
       << "\" fill=\"#eeeeee\" stroke=\"black\"/>\n";
    for (int j = 0; j < resolution; ++j) {
        const double y = 1.0 - (j + 0.5) * 2.0 / resolution;
        int run_start = -1;
        for (int i = 0; i <= resolution; ++i) {
            bool in = false;
            if (i < resolution) {
                const Complex z(-1.0 + (i + 0.5) * 2.0 / resolution, y);
                in = DiskPoint::admissible(z) && dirichlet_membership(DiskPoint(z), dom) != Membership::outside;
            }
            if (in && run_start < 0) run_start = i;
            if (!in && run_start >= 0) {
                os << "<rect x=\"" << kPad + run_start * cell << "\" y=\"" << kPad + j * cell << "\" width=\""
                   << (i - run_start) * cell << "\" height=\"" << cell << "\" fill=\"#4477aa\"/>\n";
                run_start = -1;
            }
        }
    }
    os << "<circle cx=\"" << to_px_x(dom.center().re()) << "\" cy=\"" << to_px_y(dom.center().im())
       << "\" r=\"3\" fill=\"red\"/>\n</svg>\n";
    return os.str();
}

} // namespace modlab
