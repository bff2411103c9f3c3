#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nscore {

struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    std::size_t n = 0;
};

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to sd when the IQR is zero.
double silverman_bandwidth(std::span<const double> xs);

/// Gaussian-kernel density on grid_size points spanning [min - 3h, max + 3h].
DensityCurve kde(std::span<const double> xs, std::size_t grid_size = 512);

/// Type-7 (linear interpolation) sample quantile, q in [0, 1]. Input must be sorted.
double quantile_sorted(std::span<const double> sorted, double q);

struct BoxplotSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double lower_whisker = 0.0;
    double upper_whisker = 0.0;
    std::vector<double> outliers;  // ascending
};

BoxplotSummary boxplot_summary(std::span<const double> xs);

/// log10 of the positive entries; dropped counts the non-positive ones.
struct LogTransform {
    std::vector<double> values;
    std::size_t dropped = 0;
};

LogTransform log10_positive(std::span<const double> xs);

struct SvgSeries {
    std::string label;
    const DensityCurve* curve = nullptr;
};

/// Minimal line plot of one or more density curves.
std::string render_density_svg(const std::string& title, const std::vector<SvgSeries>& series);

}  // namespace nscore
