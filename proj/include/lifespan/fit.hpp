#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "lifespan/errors.hpp"

namespace lifespan {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<double> residuals;
};

/// Least squares on (ln v, ln T*). Needs at least 4 strictly positive pairs.
inline FitResult fit_power_law(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 4) throw InvalidData("power-law fit needs at least 4 pairs");
    const std::size_t m = pairs.size();
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(pairs[i].first > 0.0) || !(pairs[i].second > 0.0))
            throw InvalidData("power-law fit requires positive values");
        x[i] = std::log(pairs[i].first);
        y[i] = std::log(pairs[i].second);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    FitResult f;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw InvalidData("degenerate abscissae in power-law fit");
    f.slope = (m * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / m;
    double ss = 0, tss = 0;
    const double mean = sy / m;
    f.residuals.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        f.residuals[i] = y[i] - (f.intercept + f.slope * x[i]);
        ss += f.residuals[i] * f.residuals[i];
        tss += (y[i] - mean) * (y[i] - mean);
    }
    f.r2 = tss > 0 ? std::max(0.0, 1.0 - ss / tss) : 1.0;
    return f;
}

}  // namespace lifespan
