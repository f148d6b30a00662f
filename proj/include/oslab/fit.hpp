#pragma once

#include <vector>

#include "oslab/errors.hpp"

namespace oslab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DimensionMismatchError("fit needs matching x/y lengths");
    LineFit out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double n = static_cast<double>(x.size());
    const double denom = n * sxx - sx * sx;
    if (x.size() < 2 || denom == 0.0) {
        throw NumericError("line fit needs at least two distinct abscissae");
    }
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    out.points = static_cast<int>(x.size());
    return out;
}

// Least squares for the proportional model y = c * x (no intercept),
// the right shape when the fitted law has no constant factor.
inline double fit_proportional(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DimensionMismatchError("fit needs matching x/y lengths");
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (x.empty() || sxx == 0.0) throw NumericError("proportional fit needs a nonzero abscissa");
    return sxy / sxx;
}

} // namespace oslab
