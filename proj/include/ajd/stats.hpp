#pragma once

#include <span>
#include <vector>

namespace ajd {

double normal_cdf(double x);
// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9).
double normal_quantile(double p);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Correlation of the sorted sample against standard normal quantiles at
// plotting positions (i - 0.5)/n; clamped to [0, 1].
double normal_quantile_correlation(std::vector<double> sample);

}  // namespace ajd
