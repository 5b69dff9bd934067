#include "pathlet/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace pathlet {

Regression ols(const std::vector<std::pair<double, double>>& points) {
    std::size_t n = points.size();
    if (n < 2) throw std::invalid_argument("ols needs at least two points");
    double sx = 0, sy = 0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
    }
    double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("ols: degenerate x (all values equal)");

    Regression r;
    r.n = n;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (const auto& [x, y] : points) {
        double e = y - (r.intercept + r.slope * x);
        ss_res += e * e;
        ss_tot += (y - my) * (y - my);
    }
    if (ss_tot == 0.0) {
        r.y_constant = true;
        r.r_squared = 0.0;
    } else {
        r.r_squared = 1.0 - ss_res / ss_tot;
        if (r.r_squared < 0.0) r.r_squared = 0.0;
        if (r.r_squared > 1.0) r.r_squared = 1.0;
    }
    r.ser = n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2)) : 0.0;
    return r;
}

double coeff_variation(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("coeff_variation: empty input");
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (mean == 0.0) throw std::invalid_argument("coeff_variation: zero mean");
    if (values.size() == 1) return 0.0;
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return sd / mean;
}

} // namespace pathlet
