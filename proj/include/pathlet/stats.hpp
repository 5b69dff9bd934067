#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace pathlet {

struct Regression {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double ser = 0.0; // standard error of the regression
    std::size_t n = 0;
    bool y_constant = false; // SS_tot == 0; r_squared reported as 0 by convention
};

/// Ordinary least squares line fit. Throws std::invalid_argument when fewer
/// than two points are given or all x coincide.
Regression ols(const std::vector<std::pair<double, double>>& points);

/// Sample standard deviation divided by the mean. Throws on an empty input
/// or a zero mean.
double coeff_variation(const std::vector<double>& values);

} // namespace pathlet
