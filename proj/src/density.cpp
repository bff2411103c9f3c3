#include "nscore/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nscore/csv_util.hpp"
#include "nscore/error.hpp"

namespace nscore {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

double sample_sd(std::span<const double> xs) {
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

double silverman_bandwidth(std::span<const double> xs) {
    if (xs.size() < 2) throw InvalidInput("bandwidth needs at least 2 observations");
    const double sd = sample_sd(xs);
    if (!(sd > 0.0)) throw InvalidInput("bandwidth undefined for zero variance");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    return 0.9 * spread * std::pow(static_cast<double>(xs.size()), -0.2);
}

DensityCurve kde(std::span<const double> xs, std::size_t grid_size) {
    if (xs.size() < 2) throw InvalidInput("density estimate needs at least 2 observations");
    if (grid_size < 2) throw InvalidInput("density grid needs at least 2 points");
    for (double v : xs) {
        if (!std::isfinite(v)) throw InvalidInput("density input contains a non-finite value");
    }
    DensityCurve c;
    c.n = xs.size();
    c.bandwidth = silverman_bandwidth(xs);
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it - 3.0 * c.bandwidth;
    const double hi = *hi_it + 3.0 * c.bandwidth;

    const double norm = 1.0 / (static_cast<double>(xs.size()) * c.bandwidth *
                               std::sqrt(2.0 * std::numbers::pi));
    c.grid.resize(grid_size);
    c.density.resize(grid_size);
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_size - 1);
        double s = 0.0;
        for (double v : xs) {
            const double z = (x - v) / c.bandwidth;
            s += std::exp(-0.5 * z * z);
        }
        c.grid[g] = x;
        c.density[g] = s * norm;
    }
    return c;
}

BoxplotSummary boxplot_summary(std::span<const double> xs) {
    if (xs.empty()) throw InvalidInput("boxplot of an empty sample");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    BoxplotSummary b;
    b.min = sorted.front();
    b.max = sorted.back();
    b.q1 = quantile_sorted(sorted, 0.25);
    b.median = quantile_sorted(sorted, 0.5);
    b.q3 = quantile_sorted(sorted, 0.75);
    const double reach = 1.5 * (b.q3 - b.q1);
    const double lo_fence = b.q1 - reach;
    const double hi_fence = b.q3 + reach;
    b.lower_whisker = b.q1;
    b.upper_whisker = b.q3;
    for (double v : sorted) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            b.lower_whisker = std::min(b.lower_whisker, v);
            b.upper_whisker = std::max(b.upper_whisker, v);
        }
    }
    return b;
}

LogTransform log10_positive(std::span<const double> xs) {
    LogTransform t;
    for (double v : xs) {
        if (v > 0.0) {
            t.values.push_back(std::log10(v));
        } else {
            ++t.dropped;
        }
    }
    return t;
}

std::string render_density_svg(const std::string& title, const std::vector<SvgSeries>& series) {
    constexpr double width = 640.0;
    constexpr double height = 400.0;
    constexpr double margin = 40.0;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};

    double x_lo = 0.0, x_hi = 1.0, y_hi = 1.0;
    bool first = true;
    for (const auto& s : series) {
        if (!s.curve || s.curve->grid.empty()) continue;
        const double lo = s.curve->grid.front();
        const double hi = s.curve->grid.back();
        const double top = *std::max_element(s.curve->density.begin(), s.curve->density.end());
        x_lo = first ? lo : std::min(x_lo, lo);
        x_hi = first ? hi : std::max(x_hi, hi);
        y_hi = first ? top : std::max(y_hi, top);
        first = false;
    }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    if (!(y_hi > 0.0)) y_hi = 1.0;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    svg << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    std::size_t idx = 0;
    for (const auto& s : series) {
        if (!s.curve) continue;
        const char* color = colors[idx % 4];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
        for (std::size_t i = 0; i < s.curve->grid.size(); ++i) {
            const double px = margin + (s.curve->grid[i] - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
            const double py = height - margin - s.curve->density[i] / y_hi * (height - 2 * margin);
            svg << format_double(px) << ',' << format_double(py) << ' ';
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << width - margin - 120 << "\" y=\"" << 40 + 16 * idx
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
            << s.label << "</text>\n";
        ++idx;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace nscore
